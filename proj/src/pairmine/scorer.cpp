#include "embedkit/pairmine/scorer.hpp"

#include <cmath>

#include "embedkit/common/hash.hpp"
#include "embedkit/common/rng.hpp"

namespace embedkit::pairmine {

std::vector<double> HashProjectionScorer::embed(const std::string& text) const {
  std::vector<double> acc(dim_, 0.0);
  std::size_t start = 0;
  bool any = false;
  auto add_word = [&](std::string_view w) {
    if (w.empty()) return;
    any = true;
    std::uint64_t h = fnv1a64(w);
    std::uint64_t state = h;
    for (std::size_t i = 0; i < dim_; ++i) {
      state = mix_seed(state);
      // map to {-1, +1}: random signs give near-orthogonal word directions
      acc[i] += (state & 1) ? 1.0 : -1.0;
    }
  };
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == ' ' || text[i] == '\n' || text[i] == '\t') {
      add_word(std::string_view(text).substr(start, i - start));
      start = i + 1;
    }
  }
  if (!any) {
    acc[0] = 1.0;
    return acc;
  }
  double norm = 0.0;
  for (double v : acc) norm += v * v;
  norm = std::sqrt(norm);
  if (norm == 0.0) {
    acc[0] = 1.0;
    return acc;
  }
  for (double& v : acc) v /= norm;
  return acc;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace embedkit::pairmine
