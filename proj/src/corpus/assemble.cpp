#include "embedkit/corpus/assemble.hpp"

#include <algorithm>
#include <map>

#include "embedkit/common/errors.hpp"
#include "embedkit/common/rng.hpp"

namespace embedkit::corpus {

json PretrainSample::to_json() const {
  json j;
  j["text"] = text;
  j["merged_from"] = merged_from;
  j["kept_headings"] = kept_headings;
  j["over_limit"] = over_limit;
  return j;
}

PretrainSample PretrainSample::from_json(const json& j) {
  PretrainSample s;
  s.text = require_field(j, "text", "pretrain sample").get<std::string>();
  for (const auto& id : require_field(j, "merged_from", "pretrain sample")) {
    s.merged_from.push_back(id.get<std::string>());
  }
  s.kept_headings = j.value("kept_headings", false);
  s.over_limit = j.value("over_limit", false);
  return s;
}

namespace {

struct DocView {
  const StructuredDocument* doc;
  // Included block texts and their token counts under the active policy.
  std::vector<std::string> parts;
  std::size_t tokens = 0;
};

DocView make_view(const StructuredDocument& doc, bool keep_headings,
                  const TokenCounter& count) {
  DocView v;
  v.doc = &doc;
  for (const auto& b : doc.blocks) {
    if (b.is_heading() && !keep_headings) continue;
    v.parts.push_back(b.text);
    v.tokens += count(b.text);
  }
  return v;
}

std::string join_parts(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += '\n';
    out += p;
  }
  return out;
}

}  // namespace

AssembleResult assemble_pretrain_samples(const std::vector<StructuredDocument>& docs,
                                         const AssembleConfig& cfg,
                                         const TokenCounter& count_tokens) {
  if (cfg.token_limit < 16) {
    fail_config("assemble: token_limit must be at least 16, got " +
                std::to_string(cfg.token_limit));
  }

  AssembleResult result;
  result.stats.total_docs = docs.size();

  // Category-local processing keeps merged samples topically coherent.
  std::map<std::string, std::vector<std::size_t>> by_category;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    by_category[docs[i].category].push_back(i);
  }

  Rng rng(cfg.seed);

  for (auto& [category, indices] : by_category) {
    rng.shuffle(indices);

    std::vector<std::size_t> pool;
    for (std::size_t idx : indices) {
      if (rng.bernoulli(cfg.merge_fraction)) {
        pool.push_back(idx);
        ++result.stats.merged_docs;
      } else {
        ++result.stats.separate_docs;
        for (const auto& b : docs[idx].blocks) {
          if (b.is_heading()) continue;
          PretrainSample s;
          s.text = b.text;
          s.merged_from = {docs[idx].id};
          s.over_limit = count_tokens(b.text) > cfg.token_limit;
          result.samples.push_back(std::move(s));
        }
      }
    }

    // Greedy fill of merged samples, one draw pair per sample.
    PretrainSample sample;
    std::vector<std::string> parts;
    std::size_t tokens = 0;
    std::size_t limit_eff = 0;
    bool open = false;

    auto open_sample = [&]() {
      sample = PretrainSample{};
      sample.kept_headings = rng.bernoulli(cfg.heading_keep_prob);
      bool permit = rng.bernoulli(cfg.overlimit_prob);
      limit_eff = permit ? std::size_t(double(cfg.token_limit) * cfg.overlimit_factor)
                         : cfg.token_limit;
      parts.clear();
      tokens = 0;
      open = true;
    };
    auto close_sample = [&]() {
      if (!open || parts.empty()) {
        open = false;
        return;
      }
      sample.text = join_parts(parts);
      sample.over_limit = tokens > cfg.token_limit;
      ++result.stats.merged_samples;
      if (sample.kept_headings) ++result.stats.kept_heading_samples;
      if (sample.over_limit) ++result.stats.over_limit_samples;
      result.samples.push_back(std::move(sample));
      open = false;
    };

    for (std::size_t idx : pool) {
      if (!open) open_sample();
      DocView v = make_view(docs[idx], sample.kept_headings, count_tokens);
      if (v.parts.empty()) continue;

      if (tokens + v.tokens > limit_eff && !parts.empty()) {
        close_sample();
        open_sample();
        v = make_view(docs[idx], sample.kept_headings, count_tokens);
      }

      if (v.tokens > limit_eff && parts.empty()) {
        // Document alone exceeds the cap: split at paragraph boundaries.
        std::vector<std::string> chunk;
        std::size_t chunk_tokens = 0;
        auto flush_chunk = [&]() {
          if (chunk.empty()) return;
          PretrainSample s;
          s.kept_headings = sample.kept_headings;
          s.text = join_parts(chunk);
          s.merged_from = {docs[idx].id};
          s.over_limit = chunk_tokens > cfg.token_limit;
          ++result.stats.merged_samples;
          if (s.kept_headings) ++result.stats.kept_heading_samples;
          if (s.over_limit) ++result.stats.over_limit_samples;
          result.samples.push_back(std::move(s));
          chunk.clear();
          chunk_tokens = 0;
        };
        for (const auto& part : v.parts) {
          std::size_t pt = count_tokens(part);
          if (chunk_tokens + pt > cfg.token_limit && !chunk.empty()) flush_chunk();
          chunk.push_back(part);
          chunk_tokens += pt;
        }
        flush_chunk();
        open = false;
        continue;
      }

      parts.insert(parts.end(), v.parts.begin(), v.parts.end());
      tokens += v.tokens;
      sample.merged_from.push_back(docs[idx].id);
    }
    close_sample();
  }

  return result;
}

std::vector<std::string> split_sample_text(const std::string& text,
                                           std::size_t token_limit,
                                           const TokenCounter& count_tokens) {
  std::vector<std::string> paragraphs;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string::npos) {
      paragraphs.push_back(text.substr(start));
      break;
    }
    paragraphs.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }

  std::vector<std::string> out;
  std::string current;
  std::size_t tokens = 0;
  for (const auto& p : paragraphs) {
    std::size_t pt = count_tokens(p);
    if (!current.empty() && tokens + pt > token_limit) {
      out.push_back(current);
      current.clear();
      tokens = 0;
    }
    if (!current.empty()) current += '\n';
    current += p;
    tokens += pt;
  }
  if (!current.empty()) out.push_back(current);
  return out;
}

std::vector<std::string> group_short_texts(const std::vector<std::string>& lines,
                                           const TokenCounter& count_tokens,
                                           std::size_t threshold,
                                           std::size_t capacity) {
  if (capacity < threshold) {
    fail_config("group_short_texts: capacity " + std::to_string(capacity) +
                " below threshold " + std::to_string(threshold));
  }
  std::vector<std::string> out;
  std::string group;
  std::size_t tokens = 0;
  auto flush = [&]() {
    if (!group.empty()) {
      out.push_back(group);
      group.clear();
      tokens = 0;
    }
  };
  for (const auto& line : lines) {
    std::size_t lt = count_tokens(line);
    if (lt > threshold) {
      flush();
      out.push_back(line);
      continue;
    }
    if (tokens + lt > capacity) flush();
    if (!group.empty()) group += '\n';
    group += line;
    tokens += lt;
  }
  flush();
  return out;
}

}  // namespace embedkit::corpus
