#pragma once

// Central finite-difference gradient oracle, independent of the autodiff
// path it checks: losses are re-evaluated forward-only around perturbed
// parameter coordinates.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "embedkit/common/rng.hpp"
#include "embedkit/numcore/ops.hpp"
#include "embedkit/numcore/tensor.hpp"

namespace oracles {

using embedkit::Rng;
using embedkit::numcore::Tensor;

struct GradCheckReport {
  std::size_t checked = 0;
  std::size_t failures = 0;
  double worst_rel = 0.0;
  std::string worst_at;
};

inline double central_difference(Tensor& leaf, std::size_t idx,
                                 const std::function<double()>& value,
                                 double h = 1e-5) {
  auto data = leaf.mutable_data();
  const double orig = data[idx];
  data[idx] = orig + h;
  const double fp = value();
  data[idx] = orig - h;
  const double fm = value();
  data[idx] = orig;
  return (fp - fm) / (2.0 * h);
}

// Compares analytic gradients (already accumulated in the leaves) against
// central differences on a seeded sample of coordinates per leaf. Gradients
// below the finite-difference noise floor are compared absolutely.
inline GradCheckReport check_gradients(
    std::vector<std::pair<std::string, Tensor>>& leaves,
    const std::function<double()>& value, Rng& rng, double rel_tol = 1e-4,
    std::size_t coords_per_leaf = 8, double abs_floor = 1e-7) {
  GradCheckReport report;
  for (auto& [name, leaf] : leaves) {
    const std::size_t n = leaf.numel();
    std::vector<std::size_t> coords;
    if (n <= coords_per_leaf) {
      for (std::size_t i = 0; i < n; ++i) coords.push_back(i);
    } else {
      coords = rng.sample_without_replacement(n, coords_per_leaf);
    }
    for (std::size_t idx : coords) {
      const double analytic = leaf.grad()[idx];
      const double numeric = central_difference(leaf, idx, value);
      const double denom = std::max(std::abs(analytic), std::abs(numeric));
      const double abs_err = std::abs(analytic - numeric);
      const double rel = denom > 0 ? abs_err / denom : 0.0;
      ++report.checked;
      const bool ok = rel < rel_tol || abs_err < abs_floor;
      if (!ok) {
        ++report.failures;
        if (rel > report.worst_rel) {
          report.worst_rel = rel;
          report.worst_at = name + "[" + std::to_string(idx) + "]";
        }
      }
    }
  }
  return report;
}

}  // namespace oracles
