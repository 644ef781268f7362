#pragma once

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "plap/classify.hpp"
#include "plap/graph.hpp"
#include "plap/operators.hpp"
#include "plap/point_cloud.hpp"

namespace plap {

/// Unreadable, unwritable or malformed files.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One point per row, comma separated; a first row that does not parse as
/// numbers is taken as a header.
PointCloud read_points_csv(const std::string& path);
void write_points_csv(const std::string& path, const PointCloud& points);

/// "PLAP", u32 version = 1, u64 n, u64 d, then n d little-endian f64 row-major.
PointCloud read_points_binary(const std::string& path);
void write_points_binary(const std::string& path, const PointCloud& points);

/// Binary when the file starts with the magic, CSV otherwise.
PointCloud read_points(const std::string& path);

/// Graph cache: u64 n, u64 nnz, (n + 1) u64 row
/// offsets, nnz u64 column indices, nnz f64 weights, f64 sigma. Little-endian.
void write_graph_cache(const std::string& path, const WeightedGraph& graph);
WeightedGraph read_graph_cache(const std::string& path);

/// "vertex_index,value" rows (header optional).
LabelSet read_labels_csv(const std::string& path);
void write_labels_csv(const std::string& path, const LabelSet& labels);

/// "vertex_index,class_id" rows (header optional).
MulticlassLabels read_class_labels_csv(const std::string& path, int num_classes = 0);
void write_class_labels_csv(const std::string& path, const MulticlassLabels& labels);

/// "vertex_index,value".
void write_field_csv(std::ostream& os, const ScalarField& u);

/// "vertex_index,predicted_class,score"; score is the winning column.
void write_predictions_csv(std::ostream& os, const ScoreMatrix& scores);

/// IDX images (magic 0x00000803): each image flattened, pixels scaled to [0, 1].
PointCloud read_idx_images(const std::string& path, std::size_t limit = 0);
/// IDX labels (magic 0x00000801).
std::vector<int> read_idx_labels(const std::string& path, std::size_t limit = 0);

}  // namespace plap
