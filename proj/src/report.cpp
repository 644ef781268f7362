#include "plap/report.hpp"

#include <algorithm>
#include <cmath>

namespace plap {

nlohmann::json json_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

std::size_t SolveReport::total_iterations() const {
  std::size_t s = 0;
  for (const auto& st : stages) s += st.iterations;
  return s;
}

std::size_t SolveReport::nonlinear_iterations() const {
  std::size_t s = 0;
  for (const auto& st : stages) {
    if (st.p > 2.0) s += st.iterations;
  }
  return s;
}

std::size_t SolveReport::max_stage_iterations() const {
  std::size_t m = 0;
  for (const auto& st : stages) {
    if (st.p > 2.0) m = std::max(m, st.iterations);
  }
  return m;
}

nlohmann::json SolveReport::to_json(bool include_timing) const {
  nlohmann::json j;
  j["method"] = method;
  j["p"] = json_number(p);
  auto stage_list = nlohmann::json::array();
  for (const auto& st : stages) {
    nlohmann::json s;
    s["p"] = json_number(st.p);
    s["iterations"] = st.iterations;
    auto res = nlohmann::json::array();
    for (double r : st.residuals) res.push_back(json_number(r));
    s["residuals"] = res;
    stage_list.push_back(s);
  }
  j["stages"] = stage_list;
  if (include_timing) j["wall_time_ms"] = wall_time_ms;
  j["linear_solver"] = linear_solver;
  j["seed"] = seed;
  j["converged"] = converged;
  j["final_residual"] = json_number(final_residual);
  if (residual_dim > 0) j["residual_dim"] = residual_dim;
  if (game_fields) {
    j["alpha"] = alpha ? json_number(*alpha) : nlohmann::json();
    j["theta_policy"] = theta_policy.empty() ? nlohmann::json() : nlohmann::json(theta_policy);
    auto b = nlohmann::json::array();
    for (double w : bracket_width_history) b.push_back(json_number(w));
    j["bracket_width_history"] = b;
    j["eps_reg"] = json_number(eps_reg.value_or(0.0));
  }
  if (weight_normalization) j["weight_normalization"] = json_number(*weight_normalization);
  if (bracket_fallback) j["bracket_fallback"] = true;
  if (!warnings.empty()) j["warnings"] = warnings;
  return j;
}

}  // namespace plap
