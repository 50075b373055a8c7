#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "nuidx/cv.hpp"
#include "nuidx/error.hpp"
#include "nuidx/matrix.hpp"

namespace nuidx {

/**
 * Integer index: each coefficient rounded to the nearest tenth and scaled by
 * 10. Halves round away from zero (0.05 -> 1, -0.05 -> -1). Negative
 * coefficients stay negative; nothing is clamped.
 */
struct IndexModel {
  std::vector<int> weights;
  std::vector<double> raw_coefficients;
  double lambda = 0.0;
  bool balancing_weights = false;

  std::vector<std::size_t> negative_features() const {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < weights.size(); ++k)
      if (weights[k] < 0) out.push_back(k);
    return out;
  }
};

inline int index_weight(double coefficient) {
  if (coefficient == 0.0) return 0;
  return static_cast<int>(std::lround(coefficient * 10.0));
}

inline IndexModel build_index_model(std::span<const double> coefficients, double lambda = 0.0,
                                    bool balancing = false) {
  IndexModel m;
  m.raw_coefficients.assign(coefficients.begin(), coefficients.end());
  m.weights.reserve(coefficients.size());
  for (double c : coefficients) m.weights.push_back(index_weight(c));
  m.lambda = lambda;
  m.balancing_weights = balancing;
  return m;
}

inline IndexModel build_index_model(const glm::LassoFit& fit, bool balancing = false) {
  return build_index_model(fit.final_coefficients(), fit.selected_lambda(), balancing);
}

/// S_i = sum_k weight_k x_ik.
inline std::vector<int> score(const IndexModel& model, const BinaryMatrix& x) {
  if (x.cols() != model.weights.size())
    throw data_error("index has " + std::to_string(model.weights.size()) +
                     " features but the data has " + std::to_string(x.cols()));
  std::vector<int> s(x.rows(), 0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    int acc = 0;
    auto r = x.row(i);
    for (std::size_t k = 0; k < r.size(); ++k)
      if (r[k]) acc += model.weights[k];
    s[i] = acc;
  }
  return s;
}

/// Number of features present per row.
inline std::vector<int> symptom_count(const BinaryMatrix& x) {
  std::vector<int> s(x.rows(), 0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    int acc = 0;
    for (auto v : x.row(i)) acc += v;
    s[i] = acc;
  }
  return s;
}

}  // namespace nuidx
