#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "embedkit/common/jsonl.hpp"
#include "embedkit/corpus/document.hpp"

namespace embedkit::corpus {

// Deterministic pseudo-site generator used for benchmarks and the bundled
// end-to-end fixtures: pages carry topic words shared between headings and
// their paragraphs, so structural pairs are learnable by a small encoder.
struct SynthConfig {
  std::size_t num_docs = 1000;
  std::uint64_t seed = 42;
  std::vector<std::string> categories = {"news",  "economy", "science",
                                         "sports", "travel",  "food"};
  std::size_t max_sections = 3;      // h2+p sections per page
  double messy_markup_prob = 0.2;    // unclosed tags, entities, comments
  double url_noise_prob = 0.15;      // stray URLs inside paragraph text
};

struct SynthPage {
  std::string id;
  std::string url;
  std::string category;
  std::string html;
  StructuredDocument expected;  // ground-truth clean structure
};

std::vector<SynthPage> generate_synthetic_site(const SynthConfig& cfg);

// Emits html/<id>.html files plus manifest.jsonl into out_dir.
void write_synthetic_site(const std::vector<SynthPage>& pages,
                          const std::string& out_dir);

// Small evaluation task files derived from the same generator state; one
// JSONL file per task kind under out_dir (see docs/formats.md).
void write_synthetic_eval_tasks(const std::vector<SynthPage>& pages,
                                const std::string& out_dir, std::uint64_t seed);

}  // namespace embedkit::corpus
