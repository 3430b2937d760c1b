#include "embedkit/corpus/html_parser.hpp"

#include <algorithm>
#include <cctype>
#include <regex>

#include "embedkit/common/errors.hpp"
#include "embedkit/common/utf8.hpp"

namespace embedkit::corpus {

json StructuredDocument::to_json() const {
  json j;
  j["id"] = id;
  j["url"] = source_url;
  j["category"] = category;
  j["blocks"] = json::array();
  for (const auto& b : blocks) {
    json jb;
    jb["kind"] = b.is_heading() ? "heading" : "paragraph";
    if (b.is_heading()) jb["level"] = b.level;
    jb["text"] = b.text;
    if (!b.label.empty()) jb["label"] = b.label;
    j["blocks"].push_back(std::move(jb));
  }
  return j;
}

StructuredDocument StructuredDocument::from_json(const json& j) {
  StructuredDocument d;
  d.id = require_field(j, "id", "document").get<std::string>();
  d.source_url = j.value("url", "");
  d.category = j.value("category", "");
  for (const auto& jb : require_field(j, "blocks", "document")) {
    Block b;
    std::string kind = require_field(jb, "kind", "block").get<std::string>();
    if (kind == "heading") {
      b.kind = Block::Kind::heading;
      b.level = jb.value("level", 1);
    } else if (kind == "paragraph") {
      b.kind = Block::Kind::paragraph;
    } else {
      fail_schema("block kind must be heading|paragraph, got " + kind);
    }
    b.text = require_field(jb, "text", "block").get<std::string>();
    b.label = jb.value("label", "");
    d.blocks.push_back(std::move(b));
  }
  return d;
}

namespace {

std::string to_lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return char(std::tolower(c)); });
  return s;
}

bool is_block_level(const std::string& tag) {
  static const char* kTags[] = {"p",  "h1", "h2", "h3",      "h4",  "h5",
                                "h6", "div", "ul", "ol",      "li",  "table",
                                "tr", "td",  "nav", "section", "article",
                                "header", "footer", "blockquote", "aside"};
  for (const char* t : kTags) {
    if (tag == t) return true;
  }
  return false;
}

void decode_entity(std::string_view ent, std::string& out) {
  if (ent.size() >= 2 && ent[0] == '#') {
    char32_t cp = 0;
    bool ok = true;
    if (ent[1] == 'x' || ent[1] == 'X') {
      for (char c : ent.substr(2)) {
        if (std::isxdigit(static_cast<unsigned char>(c))) {
          cp = cp * 16 + char32_t(std::isdigit(static_cast<unsigned char>(c))
                                      ? c - '0'
                                      : std::tolower(c) - 'a' + 10);
        } else {
          ok = false;
        }
      }
      ok = ok && ent.size() > 2;
    } else {
      for (char c : ent.substr(1)) {
        if (std::isdigit(static_cast<unsigned char>(c))) {
          cp = cp * 10 + char32_t(c - '0');
        } else {
          ok = false;
        }
      }
    }
    if (ok && cp > 0 && cp <= 0x10FFFF) {
      append_utf8(out, cp);
      return;
    }
  } else if (ent == "amp") {
    out += '&';
    return;
  } else if (ent == "lt") {
    out += '<';
    return;
  } else if (ent == "gt") {
    out += '>';
    return;
  } else if (ent == "quot") {
    out += '"';
    return;
  } else if (ent == "apos") {
    out += '\'';
    return;
  } else if (ent == "nbsp") {
    out += ' ';
    return;
  }
  // Unknown entity: keep the raw text.
  out += '&';
  out.append(ent);
  out += ';';
}

struct TagToken {
  std::string name;      // lowercase
  bool closing = false;
  bool self_closing = false;
  std::string class_attr;
};

// Parses a tag starting at s[pos] == '<'. Returns one-past-'>' (or the end
// of input when the tag never closes, consuming the rest).
std::size_t parse_tag(std::string_view s, std::size_t pos, TagToken& tag) {
  std::size_t i = pos + 1;
  if (i < s.size() && s[i] == '/') {
    tag.closing = true;
    ++i;
  }
  while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])))) {
    tag.name += char(std::tolower(static_cast<unsigned char>(s[i])));
    ++i;
  }
  // attributes
  while (i < s.size() && s[i] != '>') {
    if (s[i] == '/' && i + 1 < s.size() && s[i + 1] == '>') {
      tag.self_closing = true;
      i += 2;
      return i;
    }
    // scan one attribute
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t name_start = i;
    while (i < s.size() && s[i] != '=' && s[i] != '>' && s[i] != '/' &&
           !std::isspace(static_cast<unsigned char>(s[i]))) {
      ++i;
    }
    std::string attr = to_lower(std::string(s.substr(name_start, i - name_start)));
    std::string value;
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i < s.size() && s[i] == '=') {
      ++i;
      while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
      if (i < s.size() && (s[i] == '"' || s[i] == '\'')) {
        char q = s[i++];
        std::size_t vstart = i;
        while (i < s.size() && s[i] != q) ++i;
        value = std::string(s.substr(vstart, i - vstart));
        if (i < s.size()) ++i;
      } else {
        std::size_t vstart = i;
        while (i < s.size() && s[i] != '>' &&
               !std::isspace(static_cast<unsigned char>(s[i]))) {
          ++i;
        }
        value = std::string(s.substr(vstart, i - vstart));
      }
    }
    if (attr == "class") tag.class_attr = value;
    if (attr.empty() && i < s.size() && s[i] != '>') ++i;  // stray character
  }
  if (i < s.size()) ++i;  // consume '>'
  return i;
}

std::string collapse_ws(const std::string& in) {
  std::string out;
  out.reserve(in.size());
  bool pending = false;
  for (char c : in) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending = !out.empty();
    } else {
      if (pending) out += ' ';
      pending = false;
      out += c;
    }
  }
  return out;
}

}  // namespace

StructuredDocument parse_structured_html(std::string_view html) {
  StructuredDocument doc;

  bool in_block = false;
  Block current;
  std::string text;
  int nav_depth = 0;

  auto flush = [&]() {
    if (!in_block) return;
    current.text = collapse_ws(text);
    if (!current.text.empty()) doc.blocks.push_back(current);
    text.clear();
    in_block = false;
  };

  std::size_t i = 0;
  const std::size_t n = html.size();
  while (i < n) {
    char c = html[i];
    if (c != '<') {
      std::size_t start = i;
      while (i < n && html[i] != '<' && html[i] != '&') ++i;
      if (in_block && nav_depth == 0) text.append(html.substr(start, i - start));
      if (i < n && html[i] == '&') {
        std::size_t semi = html.find(';', i + 1);
        if (semi != std::string_view::npos && semi - i <= 10) {
          if (in_block && nav_depth == 0) {
            decode_entity(html.substr(i + 1, semi - i - 1), text);
          }
          i = semi + 1;
        } else {
          if (in_block && nav_depth == 0) text += '&';
          ++i;
        }
      }
      continue;
    }

    // comments, doctype, processing instructions
    if (html.compare(i, 4, "<!--") == 0) {
      std::size_t end = html.find("-->", i + 4);
      i = end == std::string_view::npos ? n : end + 3;
      continue;
    }
    if (i + 1 < n && (html[i + 1] == '!' || html[i + 1] == '?')) {
      std::size_t end = html.find('>', i);
      i = end == std::string_view::npos ? n : end + 1;
      continue;
    }
    if (i + 1 >= n || (!std::isalpha(static_cast<unsigned char>(html[i + 1])) &&
                       html[i + 1] != '/')) {
      if (in_block && nav_depth == 0) text += '<';
      ++i;
      continue;
    }

    TagToken tag;
    i = parse_tag(html, i, tag);

    if (tag.name == "script" || tag.name == "style") {
      if (!tag.closing && !tag.self_closing) {
        // skip raw content to the matching close tag
        std::string close = "</" + tag.name;
        std::size_t end = i;
        while (end < n) {
          std::size_t cand = html.find('<', end);
          if (cand == std::string_view::npos) {
            end = n;
            break;
          }
          if (html.size() - cand >= close.size()) {
            std::string got = to_lower(std::string(html.substr(cand, close.size())));
            if (got == close) {
              std::size_t gt = html.find('>', cand);
              end = gt == std::string_view::npos ? n : gt + 1;
              break;
            }
          }
          end = cand + 1;
        }
        i = end;
      }
      continue;
    }

    if (tag.name == "nav") {
      if (tag.self_closing) continue;
      if (tag.closing) {
        nav_depth = std::max(0, nav_depth - 1);
      } else {
        flush();
        ++nav_depth;
      }
      continue;
    }

    if (tag.name == "br") {
      if (in_block && nav_depth == 0) text += ' ';
      continue;
    }

    bool is_heading = tag.name.size() == 2 && tag.name[0] == 'h' &&
                      tag.name[1] >= '1' && tag.name[1] <= '6';
    if (is_heading || tag.name == "p") {
      if (tag.closing) {
        flush();
      } else {
        flush();
        if (nav_depth == 0) {
          in_block = true;
          current = Block{};
          if (is_heading) {
            current.kind = Block::Kind::heading;
            current.level = tag.name[1] - '0';
          } else {
            current.kind = Block::Kind::paragraph;
            current.label = tag.class_attr;
          }
        }
      }
      continue;
    }

    // Any other block-level tag implicitly closes an open p/h block.
    if (is_block_level(tag.name)) flush();
  }
  flush();
  return doc;
}

NoiseRuleSet NoiseRuleSet::from_json(const json& j) {
  NoiseRuleSet rules;
  for (auto it = j.begin(); it != j.end(); ++it) {
    std::vector<std::string> pats;
    for (const auto& p : it.value()) {
      std::string pat = p.get<std::string>();
      try {
        std::regex re(pat);
      } catch (const std::regex_error& e) {
        fail_config("noise rule '" + pat + "': " + e.what());
      }
      pats.push_back(std::move(pat));
    }
    rules.patterns[it.key()] = std::move(pats);
  }
  return rules;
}

json NoiseRuleSet::to_json() const {
  json j = json::object();
  for (const auto& [k, v] : patterns) j[k] = v;
  return j;
}

std::string NoiseRuleSet::apply(const std::string& text,
                                const std::string& category) const {
  std::vector<const std::vector<std::string>*> active;
  if (auto it = patterns.find(category); it != patterns.end()) {
    active.push_back(&it->second);
  }
  if (auto it = patterns.find("*"); it != patterns.end()) {
    active.push_back(&it->second);
  }
  if (active.empty()) return text;

  std::string current = text;
  for (int round = 0; round < 16; ++round) {
    std::string next = current;
    for (const auto* pats : active) {
      for (const auto& p : *pats) {
        next = std::regex_replace(next, std::regex(p), " ");
      }
    }
    if (next == current) break;
    current = std::move(next);
  }
  return current;
}

StructuredDocument clean_document(const StructuredDocument& doc,
                                  const tok::Normalizer& normalizer,
                                  const NoiseRuleSet& noise) {
  StructuredDocument out;
  out.id = doc.id;
  out.source_url = doc.source_url;
  out.category = doc.category;
  for (const auto& b : doc.blocks) {
    Block nb = b;
    nb.text = normalizer.normalize(noise.apply(b.text, doc.category));
    if (!nb.text.empty()) out.blocks.push_back(std::move(nb));
  }
  return out;
}

}  // namespace embedkit::corpus
