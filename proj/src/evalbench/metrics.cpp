#include "embedkit/evalbench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "embedkit/common/errors.hpp"
#include "embedkit/common/rng.hpp"

namespace embedkit::evalbench {

double ndcg_at_k(const std::vector<std::string>& ranked_ids,
                 const std::set<std::string>& relevant, std::size_t k) {
  if (relevant.empty()) fail_data("ndcg: no relevant documents");
  double dcg = 0.0;
  for (std::size_t i = 0; i < ranked_ids.size() && i < k; ++i) {
    if (relevant.count(ranked_ids[i])) dcg += 1.0 / std::log2(double(i) + 2.0);
  }
  double idcg = 0.0;
  for (std::size_t i = 0; i < relevant.size() && i < k; ++i) {
    idcg += 1.0 / std::log2(double(i) + 2.0);
  }
  return dcg / idcg;
}

double recall_at_k(const std::vector<std::string>& ranked_ids,
                   const std::set<std::string>& relevant, std::size_t k) {
  if (relevant.empty()) fail_data("recall: no relevant documents");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < ranked_ids.size() && i < k; ++i) {
    hit += relevant.count(ranked_ids[i]);
  }
  return double(hit) / double(relevant.size());
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    double avg = (double(i) + double(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
    i = j + 1;
  }
  return ranks;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = double(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double num = 0, va = 0, vb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  if (va == 0.0 || vb == 0.0) {
    fail_data("spearman: correlation undefined for a constant sequence");
  }
  return num / std::sqrt(va * vb);
}

}  // namespace

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 3) {
    fail_data("spearman: need matching sequences of at least 3 values");
  }
  return pearson(average_ranks(a), average_ranks(b));
}

double average_precision(const std::vector<bool>& ranked_relevance) {
  std::size_t total = 0;
  for (bool r : ranked_relevance) total += r;
  if (total == 0) fail_data("average_precision: no relevant candidates");
  double ap = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < ranked_relevance.size(); ++i) {
    if (ranked_relevance[i]) {
      ++hits;
      ap += double(hits) / double(i + 1);
    }
  }
  return ap / double(total);
}

double best_threshold_accuracy(const std::vector<double>& similarities,
                               const std::vector<int>& labels) {
  if (similarities.size() != labels.size() || similarities.empty()) {
    fail_data("best_threshold_accuracy: size mismatch");
  }
  bool has0 = false, has1 = false;
  for (int l : labels) {
    if (l == 0) has0 = true;
    else if (l == 1) has1 = true;
    else fail_data("best_threshold_accuracy: labels must be 0/1");
  }
  if (!has0 || !has1) {
    fail_data("best_threshold_accuracy: both classes must be present");
  }

  // Candidate thresholds: every observed similarity (prediction sim >= t)
  // plus one above the maximum (predict all negative).
  std::vector<double> candidates = similarities;
  candidates.push_back(*std::max_element(similarities.begin(), similarities.end()) +
                       1.0);
  double best = 0.0;
  for (double t : candidates) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < similarities.size(); ++i) {
      int pred = similarities[i] >= t ? 1 : 0;
      correct += pred == labels[i];
    }
    best = std::max(best, double(correct) / double(similarities.size()));
  }
  return best;
}

ConfusionStats classification_stats(const std::vector<std::string>& gold,
                                    const std::vector<std::string>& predicted) {
  if (gold.size() != predicted.size() || gold.empty()) {
    fail_data("classification_stats: size mismatch");
  }
  std::set<std::string> classes(gold.begin(), gold.end());
  std::map<std::string, double> tp, fp, fn;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] == predicted[i]) {
      ++correct;
      tp[gold[i]] += 1;
    } else {
      fp[predicted[i]] += 1;
      fn[gold[i]] += 1;
    }
  }
  ConfusionStats s;
  s.accuracy = double(correct) / double(gold.size());
  double f1_sum = 0.0;
  for (const auto& c : classes) {
    double p_den = tp[c] + fp[c], r_den = tp[c] + fn[c];
    double precision = p_den > 0 ? tp[c] / p_den : 0.0;
    double recall = r_den > 0 ? tp[c] / r_den : 0.0;
    f1_sum += (precision + recall) > 0 ? 2 * precision * recall / (precision + recall)
                                       : 0.0;
  }
  s.macro_f1 = f1_sum / double(classes.size());
  return s;
}

namespace {

double entropy(const std::map<int, std::size_t>& counts, std::size_t n) {
  double h = 0.0;
  for (const auto& [label, c] : counts) {
    if (c == 0) continue;
    double p = double(c) / double(n);
    h -= p * std::log(p);
  }
  return h;
}

}  // namespace

double v_measure(const std::vector<int>& gold, const std::vector<int>& predicted) {
  if (gold.size() != predicted.size() || gold.empty()) {
    fail_data("v_measure: size mismatch");
  }
  const std::size_t n = gold.size();
  std::map<int, std::size_t> class_counts, cluster_counts;
  std::map<std::pair<int, int>, std::size_t> joint;
  for (std::size_t i = 0; i < n; ++i) {
    ++class_counts[gold[i]];
    ++cluster_counts[predicted[i]];
    ++joint[{gold[i], predicted[i]}];
  }
  double h_c = entropy(class_counts, n);
  double h_k = entropy(cluster_counts, n);

  // H(C|K) = -sum_{c,k} p(c,k) log( p(c,k) / p(k) )
  double h_c_given_k = 0.0, h_k_given_c = 0.0;
  for (const auto& [ck, count] : joint) {
    double p_joint = double(count) / double(n);
    h_c_given_k -=
        p_joint * std::log(double(count) / double(cluster_counts[ck.second]));
    h_k_given_c -= p_joint * std::log(double(count) / double(class_counts[ck.first]));
  }
  double homogeneity = h_c == 0.0 ? 1.0 : 1.0 - h_c_given_k / h_c;
  double completeness = h_k == 0.0 ? 1.0 : 1.0 - h_k_given_c / h_k;
  if (homogeneity + completeness == 0.0) return 0.0;
  return 2.0 * homogeneity * completeness / (homogeneity + completeness);
}

KMeansResult kmeans(const std::vector<std::vector<double>>& points, std::size_t k,
                    std::uint64_t seed, std::size_t restarts) {
  if (k == 0) fail_config("kmeans: k must be positive");
  if (points.size() < k) {
    fail_data("kmeans: " + std::to_string(points.size()) + " points for k=" +
              std::to_string(k));
  }
  const std::size_t dim = points[0].size();

  bool all_identical = true;
  for (const auto& p : points) {
    all_identical = all_identical && p == points[0];
  }
  if (all_identical && k > 1) {
    fail_data("kmeans: every point is identical, clustering is degenerate");
  }

  auto dist2 = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < dim; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
  };

  KMeansResult best;
  best.inertia = -1.0;
  for (std::size_t restart = 0; restart < restarts; ++restart) {
    Rng rng(derive_seed(seed, restart));

    // k-means++ seeding
    std::vector<std::vector<double>> centers;
    centers.push_back(points[rng.uniform_int(points.size())]);
    std::vector<double> d2(points.size());
    while (centers.size() < k) {
      double total = 0.0;
      for (std::size_t i = 0; i < points.size(); ++i) {
        double d = dist2(points[i], centers[0]);
        for (std::size_t c = 1; c < centers.size(); ++c) {
          d = std::min(d, dist2(points[i], centers[c]));
        }
        d2[i] = d;
        total += d;
      }
      if (total == 0.0) {
        // remaining points coincide with the centers; spread deterministically
        centers.push_back(points[centers.size() % points.size()]);
        continue;
      }
      double r = rng.uniform() * total;
      std::size_t pick = 0;
      double acc = 0.0;
      for (std::size_t i = 0; i < points.size(); ++i) {
        acc += d2[i];
        if (acc >= r) {
          pick = i;
          break;
        }
      }
      centers.push_back(points[pick]);
    }

    std::vector<int> assignment(points.size(), 0);
    for (int iter = 0; iter < 100; ++iter) {
      bool changed = false;
      for (std::size_t i = 0; i < points.size(); ++i) {
        int arg = 0;
        double bestd = dist2(points[i], centers[0]);
        for (std::size_t c = 1; c < k; ++c) {
          double d = dist2(points[i], centers[c]);
          if (d < bestd) {
            bestd = d;
            arg = int(c);
          }
        }
        if (assignment[i] != arg) {
          assignment[i] = arg;
          changed = true;
        }
      }
      std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
      std::vector<std::size_t> counts(k, 0);
      for (std::size_t i = 0; i < points.size(); ++i) {
        ++counts[std::size_t(assignment[i])];
        for (std::size_t c = 0; c < dim; ++c) {
          sums[std::size_t(assignment[i])][c] += points[i][c];
        }
      }
      for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0) {
          // re-seed an empty cluster with the farthest point
          std::size_t far = 0;
          double fard = -1.0;
          for (std::size_t i = 0; i < points.size(); ++i) {
            double d = dist2(points[i], centers[std::size_t(assignment[i])]);
            if (d > fard) {
              fard = d;
              far = i;
            }
          }
          centers[c] = points[far];
          changed = true;
          continue;
        }
        for (std::size_t d = 0; d < dim; ++d) centers[c][d] = sums[c][d] / double(counts[c]);
      }
      if (!changed) break;
    }

    double inertia = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      inertia += dist2(points[i], centers[std::size_t(assignment[i])]);
    }
    if (best.inertia < 0.0 || inertia < best.inertia) {
      best.inertia = inertia;
      best.assignment = assignment;
    }
  }
  return best;
}

}  // namespace embedkit::evalbench
