#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace embedkit::evalbench {

// Binary-gain nDCG with the standard log2 discount.
double ndcg_at_k(const std::vector<std::string>& ranked_ids,
                 const std::set<std::string>& relevant, std::size_t k);

double recall_at_k(const std::vector<std::string>& ranked_ids,
                   const std::set<std::string>& relevant, std::size_t k);

// Spearman rank correlation with average ranks on ties; errors when either
// side is constant (the correlation is undefined, never NaN).
double spearman(const std::vector<double>& a, const std::vector<double>& b);

// Average precision over a ranked list of relevance flags.
double average_precision(const std::vector<bool>& ranked_relevance);

// Best accuracy over every threshold on the observed similarities
// (prediction: similarity >= threshold).
double best_threshold_accuracy(const std::vector<double>& similarities,
                               const std::vector<int>& labels);

struct ConfusionStats {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
};
ConfusionStats classification_stats(const std::vector<std::string>& gold,
                                    const std::vector<std::string>& predicted);

// Homogeneity/completeness harmonic mean over a labeled clustering.
double v_measure(const std::vector<int>& gold, const std::vector<int>& predicted);

struct KMeansResult {
  std::vector<int> assignment;
  double inertia = 0.0;
};
// Seeded k-means++ with `restarts` independent initializations; the lowest
// inertia run wins. Errors when points < k or all points coincide.
KMeansResult kmeans(const std::vector<std::vector<double>>& points, std::size_t k,
                    std::uint64_t seed, std::size_t restarts = 10);

}  // namespace embedkit::evalbench
