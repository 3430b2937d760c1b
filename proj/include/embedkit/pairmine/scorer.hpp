#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace embedkit::pairmine {

// Provider of unit-norm text embeddings. Implementations: the trained
// encoder (see encoder::EncoderScorer) and the deterministic hash-projection
// stub below, which stands in for an external cleaning model in tests and
// cold-start mining.
class SimilarityScorer {
public:
  virtual ~SimilarityScorer() = default;
  virtual std::vector<double> embed(const std::string& text) const = 0;
  virtual std::size_t dim() const = 0;
};

// Bag-of-words hash projection: each word hashes to a fixed pseudo-random
// direction; a text embeds as the normalized sum. Deterministic, no model
// needed, identical texts score 1 and disjoint texts near 0.
class HashProjectionScorer : public SimilarityScorer {
public:
  explicit HashProjectionScorer(std::size_t dim = 256) : dim_(dim) {}

  std::vector<double> embed(const std::string& text) const override;
  std::size_t dim() const override { return dim_; }

private:
  std::size_t dim_;
};

double cosine(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace embedkit::pairmine
