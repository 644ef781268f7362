#include "plap/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace plap {

namespace {

// Shortest text that parses back to the same double.
std::string shortest(double v) {
  std::array<char, 32> buf;
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

constexpr std::array<char, 4> kPointsMagic{'P', 'L', 'A', 'P'};
constexpr std::uint32_t kVersion = 1;

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

template <typename T>
void put_le(std::ostream& os, T v) {
  std::uint64_t bits = 0;
  if constexpr (std::is_same_v<T, double>) {
    bits = std::bit_cast<std::uint64_t>(v);
  } else {
    bits = static_cast<std::uint64_t>(v);
  }
  char buf[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  os.write(buf, sizeof(T));
}

template <typename T>
T get_le(std::istream& is, const std::string& path) {
  unsigned char buf[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(buf), sizeof(T))) {
    throw IoError("'" + path + "': unexpected end of file");
  }
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) bits |= std::uint64_t{buf[i]} << (8 * i);
  if constexpr (std::is_same_v<T, double>) {
    return std::bit_cast<double>(bits);
  } else {
    return static_cast<T>(bits);
  }
}

std::uint32_t get_be32(std::istream& is, const std::string& path) {
  unsigned char buf[4];
  if (!is.read(reinterpret_cast<char*>(buf), 4)) {
    throw IoError("'" + path + "': unexpected end of file");
  }
  return (std::uint32_t{buf[0]} << 24) | (std::uint32_t{buf[1]} << 16) |
         (std::uint32_t{buf[2]} << 8) | std::uint32_t{buf[3]};
}

void check_magic(std::istream& is, const std::array<char, 4>& magic, const std::string& path) {
  std::array<char, 4> got{};
  if (!is.read(got.data(), 4) || got != magic) {
    throw IoError("'" + path + "': bad magic, expected " + std::string(magic.data(), 4));
  }
  const auto version = get_le<std::uint32_t>(is, path);
  if (version != kVersion) {
    throw IoError("'" + path + "': unsupported version " + std::to_string(version));
  }
}

void finish_write(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r' && c != ' ' && c != '\t') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

bool parse_double(const std::string& s, double& v) {
  if (s.empty()) return false;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  return ec == std::errc() && ptr == end;
}

bool parse_index(const std::string& s, std::size_t& v) {
  if (s.empty()) return false;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  return ec == std::errc() && ptr == end;
}

// Rows of a CSV file, skipping blank lines, '#' comments and a header row.
template <typename RowFn>
void for_each_row(const std::string& path, RowFn&& fn) {
  std::ifstream in = open_in(path);
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r" || line[0] == '#') continue;
    const auto cells = split_csv(line);
    double probe = 0.0;
    if (first && !parse_double(cells[0], probe)) {
      first = false;
      continue;
    }
    first = false;
    fn(cells, lineno);
  }
}

[[noreturn]] void bad_row(const std::string& path, std::size_t lineno, const std::string& why) {
  throw IoError("'" + path + "' line " + std::to_string(lineno) + ": " + why);
}

}  // namespace

PointCloud read_points_csv(const std::string& path) {
  std::vector<double> coords;
  std::size_t d = 0;
  std::size_t n = 0;
  for_each_row(path, [&](const std::vector<std::string>& cells, std::size_t lineno) {
    if (d == 0) d = cells.size();
    if (cells.size() != d) bad_row(path, lineno, "expected " + std::to_string(d) + " columns");
    for (const auto& c : cells) {
      double v = 0.0;
      if (!parse_double(c, v)) bad_row(path, lineno, "not a number: '" + c + "'");
      coords.push_back(v);
    }
    ++n;
  });
  if (n == 0) throw IoError("'" + path + "': no points");
  return PointCloud(n, d, std::move(coords));
}

void write_points_csv(const std::string& path, const PointCloud& points) {
  std::ofstream out = open_out(path);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto x = points.point(i);
    for (std::size_t k = 0; k < x.size(); ++k) out << (k ? "," : "") << shortest(x[k]);
    out << '\n';
  }
  finish_write(out, path);
}

PointCloud read_points_binary(const std::string& path) {
  std::ifstream in = open_in(path);
  check_magic(in, kPointsMagic, path);
  const auto n = get_le<std::uint64_t>(in, path);
  const auto d = get_le<std::uint64_t>(in, path);
  if (n == 0 || d == 0 || n > std::numeric_limits<std::uint64_t>::max() / 8 / d) {
    throw IoError("'" + path + "': invalid shape");
  }
  std::vector<double> coords(n * d);
  for (double& v : coords) v = get_le<double>(in, path);
  return PointCloud(n, d, std::move(coords));
}

void write_points_binary(const std::string& path, const PointCloud& points) {
  std::ofstream out = open_out(path);
  out.write(kPointsMagic.data(), 4);
  put_le<std::uint32_t>(out, kVersion);
  put_le<std::uint64_t>(out, points.size());
  put_le<std::uint64_t>(out, points.dim());
  for (double v : points.coords()) put_le<double>(out, v);
  finish_write(out, path);
}

PointCloud read_points(const std::string& path) {
  std::array<char, 4> head{};
  {
    std::ifstream in = open_in(path);
    in.read(head.data(), 4);
  }
  return head == kPointsMagic ? read_points_binary(path) : read_points_csv(path);
}

void write_graph_cache(const std::string& path, const WeightedGraph& graph) {
  std::ofstream out = open_out(path);
  put_le<std::uint64_t>(out, graph.size());
  put_le<std::uint64_t>(out, graph.nnz());
  for (std::size_t v : graph.offsets()) put_le<std::uint64_t>(out, v);
  for (std::size_t v : graph.columns()) put_le<std::uint64_t>(out, v);
  for (double v : graph.values()) put_le<double>(out, v);
  put_le<double>(out, graph.sigma());
  finish_write(out, path);
}

WeightedGraph read_graph_cache(const std::string& path) {
  std::ifstream in = open_in(path);
  const auto n = get_le<std::uint64_t>(in, path);
  const auto nnz = get_le<std::uint64_t>(in, path);
  if (nnz > (std::uint64_t{1} << 40) || n > (std::uint64_t{1} << 40)) {
    throw IoError("'" + path + "': implausible size");
  }
  std::vector<std::size_t> offsets(n + 1);
  std::vector<std::size_t> cols(nnz);
  std::vector<double> ws(nnz);
  for (auto& v : offsets) v = get_le<std::uint64_t>(in, path);
  for (auto& v : cols) v = get_le<std::uint64_t>(in, path);
  for (auto& v : ws) v = get_le<double>(in, path);
  const double sigma = get_le<double>(in, path);
  if (in.peek() != std::char_traits<char>::eof()) {
    throw IoError("'" + path + "': trailing bytes after graph cache");
  }
  try {
    return WeightedGraph::from_csr(n, std::move(offsets), std::move(cols), std::move(ws), sigma);
  } catch (const std::invalid_argument& e) {
    throw IoError("'" + path + "': " + e.what());
  }
}

LabelSet read_labels_csv(const std::string& path) {
  std::vector<std::size_t> idx;
  std::vector<double> vals;
  for_each_row(path, [&](const std::vector<std::string>& cells, std::size_t lineno) {
    std::size_t i = 0;
    double v = 0.0;
    if (cells.size() != 2 || !parse_index(cells[0], i) || !parse_double(cells[1], v)) {
      bad_row(path, lineno, "expected vertex_index,value");
    }
    idx.push_back(i);
    vals.push_back(v);
  });
  return LabelSet(std::move(idx), std::move(vals));
}

void write_labels_csv(const std::string& path, const LabelSet& labels) {
  std::ofstream out = open_out(path);
  out << "vertex_index,value\n";
  for (std::size_t t = 0; t < labels.size(); ++t) {
    out << labels.indices[t] << ',' << shortest(labels.values[t]) << '\n';
  }
  finish_write(out, path);
}

MulticlassLabels read_class_labels_csv(const std::string& path, int num_classes) {
  std::vector<std::size_t> idx;
  std::vector<int> cls;
  for_each_row(path, [&](const std::vector<std::string>& cells, std::size_t lineno) {
    std::size_t i = 0;
    std::size_t c = 0;
    if (cells.size() != 2 || !parse_index(cells[0], i) || !parse_index(cells[1], c)) {
      bad_row(path, lineno, "expected vertex_index,class_id");
    }
    idx.push_back(i);
    cls.push_back(static_cast<int>(c));
  });
  return MulticlassLabels(std::move(idx), std::move(cls), num_classes);
}

void write_class_labels_csv(const std::string& path, const MulticlassLabels& labels) {
  std::ofstream out = open_out(path);
  out << "vertex_index,class_id\n";
  for (std::size_t t = 0; t < labels.size(); ++t) {
    out << labels.indices[t] << ',' << labels.classes[t] << '\n';
  }
  finish_write(out, path);
}

void write_field_csv(std::ostream& os, const ScalarField& u) {
  os << "vertex_index,value\n";
  for (std::size_t i = 0; i < u.size(); ++i) os << i << ',' << shortest(u[i]) << '\n';
}

void write_predictions_csv(std::ostream& os, const ScoreMatrix& scores) {
  os << "vertex_index,predicted_class,score\n";
  for (std::size_t i = 0; i < scores.rows(); ++i) {
    const int c = scores.predict(i);
    os << i << ',' << c << ',' << shortest(scores.at(i, c)) << '\n';
  }
}

PointCloud read_idx_images(const std::string& path, std::size_t limit) {
  std::ifstream in = open_in(path);
  const std::uint32_t magic = get_be32(in, path);
  if (magic != 0x00000803) throw IoError("'" + path + "': not an IDX image file");
  std::size_t n = get_be32(in, path);
  const std::size_t rows = get_be32(in, path);
  const std::size_t cols = get_be32(in, path);
  if (limit > 0 && limit < n) n = limit;
  const std::size_t d = rows * cols;
  if (n == 0 || d == 0) throw IoError("'" + path + "': empty IDX image file");
  std::vector<unsigned char> raw(n * d);
  if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()))) {
    throw IoError("'" + path + "': truncated IDX image data");
  }
  std::vector<double> coords(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) coords[i] = raw[i] / 255.0;
  return PointCloud(n, d, std::move(coords));
}

std::vector<int> read_idx_labels(const std::string& path, std::size_t limit) {
  std::ifstream in = open_in(path);
  const std::uint32_t magic = get_be32(in, path);
  if (magic != 0x00000801) throw IoError("'" + path + "': not an IDX label file");
  std::size_t n = get_be32(in, path);
  if (limit > 0 && limit < n) n = limit;
  std::vector<unsigned char> raw(n);
  if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n))) {
    throw IoError("'" + path + "': truncated IDX label data");
  }
  return std::vector<int>(raw.begin(), raw.end());
}

}  // namespace plap
