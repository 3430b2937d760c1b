#include "embedkit/corpus/synth.hpp"

#include <filesystem>

#include "embedkit/common/rng.hpp"

namespace embedkit::corpus {

namespace {

const char* kSyllables[] = {"ka", "ve", "mi", "to", "ru", "za", "ne", "po",
                            "li", "da", "su", "fe", "go", "ha", "ju", "ro",
                            "ty", "wa", "xi", "bo", "ce", "qu", "na", "pi"};

std::string make_word(Rng& rng, std::size_t syllables) {
  std::string w;
  for (std::size_t i = 0; i < syllables; ++i) {
    w += kSyllables[rng.uniform_int(std::size(kSyllables))];
  }
  return w;
}

struct Lexicon {
  std::vector<std::string> common;
  std::vector<std::vector<std::string>> per_category;
};

Lexicon make_lexicon(const SynthConfig& cfg, Rng& rng) {
  Lexicon lex;
  for (int i = 0; i < 40; ++i) lex.common.push_back(make_word(rng, 2));
  lex.per_category.resize(cfg.categories.size());
  for (auto& words : lex.per_category) {
    for (int i = 0; i < 30; ++i) words.push_back(make_word(rng, 3));
  }
  return lex;
}

std::string sentence(Rng& rng, const std::vector<std::string>& topic,
                     const std::vector<std::string>& common,
                     std::size_t words) {
  std::string out;
  for (std::size_t i = 0; i < words; ++i) {
    if (!out.empty()) out += ' ';
    // Topic words dominate so headings and paragraphs share vocabulary.
    if (rng.uniform() < 0.6 && !topic.empty()) {
      out += topic[rng.uniform_int(topic.size())];
    } else {
      out += common[rng.uniform_int(common.size())];
    }
  }
  return out;
}

}  // namespace

std::vector<SynthPage> generate_synthetic_site(const SynthConfig& cfg) {
  Rng rng(cfg.seed);
  Lexicon lex = make_lexicon(cfg, rng);

  std::vector<SynthPage> pages;
  pages.reserve(cfg.num_docs);
  for (std::size_t n = 0; n < cfg.num_docs; ++n) {
    const std::size_t cat = n % cfg.categories.size();
    SynthPage page;
    page.id = "doc" + std::to_string(n);
    page.category = cfg.categories[cat];
    page.url = "http://" + page.category + ".example/" + page.id;

    // Page-local topic: a few category words repeated across blocks.
    std::vector<std::string> topic;
    for (int i = 0; i < 4; ++i) {
      topic.push_back(lex.per_category[cat][rng.uniform_int(
          lex.per_category[cat].size())]);
    }

    const bool messy = rng.uniform() < cfg.messy_markup_prob;
    const bool news_layout = page.category == "news" || rng.uniform() < 0.2;

    std::string html = "<!doctype html><html><head><title>x</title>\n";
    html += "<script>var x = '<p>not content</p>';</script>\n";
    html += "<style>p { color: red; }</style></head><body>\n";
    html += "<nav><p>home</p><p>about</p></nav>\n";

    auto add_block = [&](const std::string& tag, const std::string& markup_text,
                         const std::string& clean_text, const std::string& cls) {
      html += "<" + tag;
      if (!cls.empty()) html += " class=\"" + cls + "\"";
      html += ">" + markup_text;
      if (!messy || rng.uniform() < 0.7) html += "</" + tag + ">";
      html += "\n";
      Block b;
      if (tag[0] == 'h') {
        b.kind = Block::Kind::heading;
        b.level = tag[1] - '0';
      } else {
        b.kind = Block::Kind::paragraph;
        b.label = cls;
      }
      b.text = clean_text;
      page.expected.blocks.push_back(std::move(b));
    };

    std::string title = sentence(rng, topic, lex.common, 3 + rng.uniform_int(3));
    add_block("h1", title, title, "");

    std::string lead = sentence(rng, topic, lex.common, 8 + rng.uniform_int(10));
    if (rng.uniform() < cfg.url_noise_prob) {
      lead += " http://spam.example/track?id=" + std::to_string(n);
    }
    add_block("p", lead, lead, news_layout ? "summary" : "");

    if (news_layout) {
      std::string body = sentence(rng, topic, lex.common, 10 + rng.uniform_int(8));
      add_block("p", body, body, "");
    }

    const std::size_t sections = 1 + rng.uniform_int(cfg.max_sections);
    for (std::size_t s = 0; s < sections; ++s) {
      std::string head = sentence(rng, topic, lex.common, 2 + rng.uniform_int(3));
      add_block("h2", head, head, "");
      std::string body = sentence(rng, topic, lex.common, 8 + rng.uniform_int(12));
      std::string markup = body;
      if (messy && rng.uniform() < 0.5) {
        markup += " &amp; more";
        body += " & more";
      }
      add_block("p", markup, body, "");
    }

    if (messy) html += "<!-- trailing comment <p>ghost</p> -->\n";
    html += "<nav><p>footer links</p></nav></body></html>\n";
    page.html = std::move(html);

    page.expected.id = page.id;
    page.expected.source_url = page.url;
    page.expected.category = page.category;
    pages.push_back(std::move(page));
  }
  return pages;
}

void write_synthetic_site(const std::vector<SynthPage>& pages,
                          const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(out_dir) / "html");
  std::vector<json> manifest;
  for (const auto& p : pages) {
    std::string rel = "html/" + p.id + ".html";
    atomic_write_file(fs::path(out_dir) / rel, p.html);
    json m;
    m["id"] = p.id;
    m["url"] = p.url;
    m["category"] = p.category;
    m["file"] = rel;
    manifest.push_back(std::move(m));
  }
  write_jsonl(fs::path(out_dir) / "manifest.jsonl", manifest);
}

void write_synthetic_eval_tasks(const std::vector<SynthPage>& pages,
                                const std::string& out_dir, std::uint64_t seed) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  Rng rng(derive_seed(seed, 0x45564131));

  auto page_title = [](const SynthPage& p) { return p.expected.blocks[0].text; };
  auto page_lead = [](const SynthPage& p) { return p.expected.blocks[1].text; };

  const std::size_t n_eval = std::min<std::size_t>(pages.size(), 60);

  {
    std::vector<json> lines;
    json header;
    header["header"] = true;
    header["task_id"] = "synth-retrieval";
    header["kind"] = "retrieval";
    lines.push_back(header);
    for (std::size_t i = 0; i < n_eval; ++i) {
      json d;
      d["record"] = "doc";
      d["id"] = "d" + std::to_string(i);
      d["text"] = page_lead(pages[i]);
      lines.push_back(d);
    }
    for (std::size_t i = 0; i < n_eval; ++i) {
      json q;
      q["record"] = "query";
      q["id"] = "q" + std::to_string(i);
      q["text"] = page_title(pages[i]);
      q["relevant"] = {"d" + std::to_string(i)};
      lines.push_back(q);
    }
    write_jsonl(fs::path(out_dir) / "retrieval.jsonl", lines);
  }

  {
    std::vector<json> lines;
    json header;
    header["header"] = true;
    header["task_id"] = "synth-sts";
    header["kind"] = "sts";
    lines.push_back(header);
    for (std::size_t i = 0; i < n_eval; ++i) {
      // Graded gold: same page 3, same category 2, different category 1.
      json a;
      a["text_a"] = page_title(pages[i]);
      a["text_b"] = page_lead(pages[i]);
      a["score"] = 3.0;
      lines.push_back(a);
      std::size_t j = rng.uniform_int(pages.size());
      json b;
      b["text_a"] = page_title(pages[i]);
      b["text_b"] = page_lead(pages[j]);
      b["score"] = pages[j].category == pages[i].category ? 2.0 : 1.0;
      lines.push_back(b);
    }
    write_jsonl(fs::path(out_dir) / "sts.jsonl", lines);
  }

  {
    std::vector<json> lines;
    json header;
    header["header"] = true;
    header["task_id"] = "synth-classification";
    header["kind"] = "classification";
    header["template_id"] = "synth-topic";
    lines.push_back(header);
    for (std::size_t i = 0; i < n_eval; ++i) {
      json r;
      r["text"] = page_lead(pages[i]);
      r["label"] = pages[i].category;
      lines.push_back(r);
    }
    write_jsonl(fs::path(out_dir) / "classification.jsonl", lines);
  }

  {
    std::vector<json> lines;
    json header;
    header["header"] = true;
    header["task_id"] = "synth-pair-classification";
    header["kind"] = "pair_classification";
    lines.push_back(header);
    for (std::size_t i = 0; i < n_eval; ++i) {
      json pos;
      pos["text_a"] = page_title(pages[i]);
      pos["text_b"] = page_lead(pages[i]);
      pos["label"] = 1;
      lines.push_back(pos);
      std::size_t j = (i + 1 + rng.uniform_int(pages.size() - 1)) % pages.size();
      json neg;
      neg["text_a"] = page_title(pages[i]);
      neg["text_b"] = page_lead(pages[j]);
      neg["label"] = 0;
      lines.push_back(neg);
    }
    write_jsonl(fs::path(out_dir) / "pair_classification.jsonl", lines);
  }

  {
    std::vector<json> lines;
    json header;
    header["header"] = true;
    header["task_id"] = "synth-cross-classification";
    header["kind"] = "cross_classification";
    header["template_id"] = "synth-match";
    lines.push_back(header);
    for (std::size_t i = 0; i < n_eval; ++i) {
      json pos;
      pos["text_a"] = page_title(pages[i]);
      pos["text_b"] = page_lead(pages[i]);
      pos["label"] = "match";
      lines.push_back(pos);
      std::size_t j = (i + 1 + rng.uniform_int(pages.size() - 1)) % pages.size();
      json neg;
      neg["text_a"] = page_title(pages[i]);
      neg["text_b"] = page_lead(pages[j]);
      neg["label"] = "mismatch";
      lines.push_back(neg);
    }
    write_jsonl(fs::path(out_dir) / "cross_classification.jsonl", lines);
  }

  {
    std::vector<json> lines;
    json header;
    header["header"] = true;
    header["task_id"] = "synth-reranking";
    header["kind"] = "reranking";
    lines.push_back(header);
    for (std::size_t i = 0; i < n_eval; ++i) {
      json r;
      r["query"] = page_title(pages[i]);
      json cands = json::array();
      json own;
      own["text"] = page_lead(pages[i]);
      own["positive"] = true;
      cands.push_back(own);
      for (int k = 0; k < 4; ++k) {
        std::size_t j = (i + 1 + rng.uniform_int(pages.size() - 1)) % pages.size();
        json c;
        c["text"] = page_lead(pages[j]);
        c["positive"] = false;
        cands.push_back(c);
      }
      r["candidates"] = cands;
      lines.push_back(r);
    }
    write_jsonl(fs::path(out_dir) / "reranking.jsonl", lines);
  }

  {
    std::vector<json> lines;
    json header;
    header["header"] = true;
    header["task_id"] = "synth-clustering";
    header["kind"] = "clustering";
    lines.push_back(header);
    for (std::size_t i = 0; i < n_eval; ++i) {
      json r;
      r["text"] = page_lead(pages[i]);
      r["cluster"] = pages[i].category;
      lines.push_back(r);
    }
    write_jsonl(fs::path(out_dir) / "clustering.jsonl", lines);
  }
}

}  // namespace embedkit::corpus
