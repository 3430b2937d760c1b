#include "embedkit/train/infonce.hpp"

#include <algorithm>
#include <cmath>

#include "embedkit/common/errors.hpp"

namespace embedkit::train {

using namespace numcore;

Tensor infonce(const Tensor& query, const Tensor& positive,
               const std::vector<Tensor>& negatives, double tau) {
  if (tau <= 0.0) fail_config("infonce: temperature must be positive");

  // Logit row [s+, s1-, ..., sn-] / tau; cross-entropy against index 0 is
  // exactly the stabilized formula.
  std::vector<Tensor> sims;
  sims.reserve(negatives.size() + 1);
  sims.push_back(dot(query, positive));
  for (const auto& n : negatives) sims.push_back(dot(query, n));
  auto logits = scale(transpose(stack_rows(sims)), 1.0 / tau);
  return cross_entropy_rows(logits, {0});
}

double infonce_value(double s_positive, const std::vector<double>& s_negatives,
                     double tau) {
  if (tau <= 0.0) fail_config("infonce: temperature must be positive");
  double mx = s_positive / tau;
  for (double s : s_negatives) mx = std::max(mx, s / tau);
  double lse = std::exp(s_positive / tau - mx);
  for (double s : s_negatives) lse += std::exp(s / tau - mx);
  return std::log(lse) + mx - s_positive / tau;
}

Tensor infonce_in_batch(const std::vector<Tensor>& queries,
                        const std::vector<Tensor>& positives, double tau) {
  if (tau <= 0.0) fail_config("infonce: temperature must be positive");
  if (queries.size() != positives.size() || queries.size() < 2) {
    fail_data("infonce_in_batch: need matching query/positive lists of size >= 2");
  }
  auto Q = stack_rows(queries);
  auto D = stack_rows(positives);
  auto logits = scale(matmul(Q, transpose(D)), 1.0 / tau);
  std::vector<int> targets(queries.size());
  for (std::size_t i = 0; i < targets.size(); ++i) targets[i] = int(i);
  return cross_entropy_rows(logits, targets);
}

}  // namespace embedkit::train
