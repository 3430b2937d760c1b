#pragma once

// Independent textbook implementations of the evaluation metrics, written
// against the formulas directly (log2 entropies, explicit rank maps,
// quadratic threshold sweeps) rather than the library's code paths.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace oracles {

inline double naive_ndcg(const std::vector<std::string>& ranked,
                         const std::set<std::string>& relevant, std::size_t k) {
  double dcg = 0;
  for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) {
    if (relevant.count(ranked[i])) dcg += std::log(2.0) / std::log(double(i + 2));
  }
  double ideal = 0;
  for (std::size_t i = 0; i < std::min(k, relevant.size()); ++i) {
    ideal += std::log(2.0) / std::log(double(i + 2));
  }
  return dcg / ideal;
}

inline double naive_recall(const std::vector<std::string>& ranked,
                           const std::set<std::string>& relevant, std::size_t k) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) {
    hits += relevant.count(ranked[i]) ? 1 : 0;
  }
  return double(hits) / double(relevant.size());
}

// Spearman via explicit average-rank maps and the textbook Pearson form.
inline double naive_spearman(const std::vector<double>& x,
                             const std::vector<double>& y) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      std::size_t below = 0, equal = 0;
      for (std::size_t j = 0; j < v.size(); ++j) {
        if (v[j] < v[i]) ++below;
        if (v[j] == v[i]) ++equal;
      }
      r[i] = double(below) + (double(equal) + 1.0) / 2.0;
    }
    return r;
  };
  auto rx = ranks(x), ry = ranks(y);
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= double(rx.size());
  my /= double(ry.size());
  double num = 0, dx = 0, dy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    num += (rx[i] - mx) * (ry[i] - my);
    dx += (rx[i] - mx) * (rx[i] - mx);
    dy += (ry[i] - my) * (ry[i] - my);
  }
  return num / std::sqrt(dx * dy);
}

inline double naive_ap(const std::vector<bool>& rel) {
  double ap = 0;
  std::size_t hits = 0, total = 0;
  for (bool r : rel) total += r;
  for (std::size_t i = 0; i < rel.size(); ++i) {
    if (rel[i]) {
      ++hits;
      ap += double(hits) / double(i + 1);
    }
  }
  return ap / double(total);
}

// Quadratic sweep over (every similarity as threshold) plus all-negative.
inline double naive_best_threshold_accuracy(const std::vector<double>& sims,
                                            const std::vector<int>& labels) {
  double best = 0;
  auto acc_at = [&](double t) {
    std::size_t ok = 0;
    for (std::size_t i = 0; i < sims.size(); ++i) {
      ok += (sims[i] >= t ? 1 : 0) == labels[i];
    }
    return double(ok) / double(sims.size());
  };
  for (double t : sims) best = std::max(best, acc_at(t));
  double above = *std::max_element(sims.begin(), sims.end()) + 1;
  best = std::max(best, acc_at(above));
  return best;
}

// V-measure from the contingency table with log2 entropies (the base
// cancels in the homogeneity/completeness ratios).
inline double naive_v_measure(const std::vector<int>& gold,
                              const std::vector<int>& pred) {
  const double n = double(gold.size());
  std::map<int, double> cc, kc;
  std::map<std::pair<int, int>, double> joint;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    cc[gold[i]] += 1;
    kc[pred[i]] += 1;
    joint[{gold[i], pred[i]}] += 1;
  }
  auto h = [&](const std::map<int, double>& m) {
    double out = 0;
    for (auto& [k, v] : m) out -= v / n * std::log2(v / n);
    return out;
  };
  double hc = h(cc), hk = h(kc);
  double hck = 0, hkc = 0;
  for (auto& [ck, v] : joint) {
    hck -= v / n * std::log2(v / kc[ck.second]);
    hkc -= v / n * std::log2(v / cc[ck.first]);
  }
  double hom = hc == 0 ? 1 : 1 - hck / hc;
  double com = hk == 0 ? 1 : 1 - hkc / hk;
  return hom + com == 0 ? 0 : 2 * hom * com / (hom + com);
}

inline double naive_accuracy(const std::vector<std::string>& gold,
                             const std::vector<std::string>& pred) {
  std::size_t ok = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) ok += gold[i] == pred[i];
  return double(ok) / double(gold.size());
}

inline double naive_macro_f1(const std::vector<std::string>& gold,
                             const std::vector<std::string>& pred) {
  std::set<std::string> classes(gold.begin(), gold.end());
  double sum = 0;
  for (const auto& c : classes) {
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      if (pred[i] == c && gold[i] == c) ++tp;
      if (pred[i] == c && gold[i] != c) ++fp;
      if (pred[i] != c && gold[i] == c) ++fn;
    }
    double p = tp + fp > 0 ? tp / (tp + fp) : 0;
    double r = tp + fn > 0 ? tp / (tp + fn) : 0;
    sum += p + r > 0 ? 2 * p * r / (p + r) : 0;
  }
  return sum / double(classes.size());
}

}  // namespace oracles
