#pragma once

// Second, independent HTML structure extractor used as an oracle: builds an
// explicit DOM tree (stack parser with HTML5-style auto-close for p/h
// blocks), then walks it collecting h1..h6/p texts outside nav subtrees.

#include <cctype>
#include <memory>
#include <string>
#include <vector>

#include "embedkit/corpus/document.hpp"

namespace oracles {

struct DomNode {
  std::string tag;  // empty = text node
  std::string text;
  std::string class_attr;
  std::vector<std::unique_ptr<DomNode>> children;
};

namespace dom_detail {

inline bool block_level(const std::string& t) {
  static const char* kTags[] = {"p",  "h1",  "h2",  "h3",      "h4",      "h5",
                                "h6", "div", "ul",  "ol",      "li",      "table",
                                "tr", "td",  "nav", "section", "article", "header",
                                "footer", "blockquote", "aside"};
  for (const char* k : kTags) {
    if (t == k) return true;
  }
  return false;
}

inline bool is_ph(const std::string& t) {
  return t == "p" || (t.size() == 2 && t[0] == 'h' && t[1] >= '1' && t[1] <= '6');
}

inline void append_cp(std::string& out, unsigned long cp) {
  if (cp <= 0x7F) {
    out += char(cp);
  } else if (cp <= 0x7FF) {
    out += char(0xC0 | (cp >> 6));
    out += char(0x80 | (cp & 0x3F));
  } else if (cp <= 0xFFFF) {
    out += char(0xE0 | (cp >> 12));
    out += char(0x80 | ((cp >> 6) & 0x3F));
    out += char(0x80 | (cp & 0x3F));
  } else {
    out += char(0xF0 | (cp >> 18));
    out += char(0x80 | ((cp >> 12) & 0x3F));
    out += char(0x80 | ((cp >> 6) & 0x3F));
    out += char(0x80 | (cp & 0x3F));
  }
}

inline std::string decode_entities(const std::string& in) {
  std::string out;
  std::size_t i = 0;
  while (i < in.size()) {
    if (in[i] != '&') {
      out += in[i++];
      continue;
    }
    std::size_t semi = in.find(';', i + 1);
    if (semi == std::string::npos || semi - i > 10) {
      out += in[i++];
      continue;
    }
    std::string ent = in.substr(i + 1, semi - i - 1);
    if (ent == "amp") out += '&';
    else if (ent == "lt") out += '<';
    else if (ent == "gt") out += '>';
    else if (ent == "quot") out += '"';
    else if (ent == "apos") out += '\'';
    else if (ent == "nbsp") out += ' ';
    else if (!ent.empty() && ent[0] == '#') {
      unsigned long cp = 0;
      bool ok = ent.size() > 1;
      if (ent.size() > 2 && (ent[1] == 'x' || ent[1] == 'X')) {
        for (std::size_t k = 2; k < ent.size(); ++k) {
          if (!std::isxdigit((unsigned char)ent[k])) { ok = false; break; }
          cp = cp * 16 + (std::isdigit((unsigned char)ent[k])
                              ? ent[k] - '0'
                              : std::tolower(ent[k]) - 'a' + 10);
        }
      } else {
        for (std::size_t k = 1; k < ent.size(); ++k) {
          if (!std::isdigit((unsigned char)ent[k])) { ok = false; break; }
          cp = cp * 10 + (ent[k] - '0');
        }
      }
      if (ok && cp > 0 && cp <= 0x10FFFF) append_cp(out, cp);
      else { out += '&'; out += ent; out += ';'; }
    } else {
      out += '&';
      out += ent;
      out += ';';
    }
    i = semi + 1;
  }
  return out;
}

inline std::string squash(const std::string& in) {
  std::string out;
  bool pending = false;
  for (char c : in) {
    if (std::isspace((unsigned char)c)) {
      pending = !out.empty();
    } else {
      if (pending) out += ' ';
      pending = false;
      out += c;
    }
  }
  return out;
}

}  // namespace dom_detail

inline std::unique_ptr<DomNode> build_dom(const std::string& html) {
  using namespace dom_detail;
  auto root = std::make_unique<DomNode>();
  root->tag = "#root";
  std::vector<DomNode*> stack = {root.get()};

  std::size_t i = 0;
  const std::size_t n = html.size();
  auto add_text = [&](const std::string& t) {
    auto node = std::make_unique<DomNode>();
    node->text = t;
    stack.back()->children.push_back(std::move(node));
  };

  while (i < n) {
    if (html[i] != '<') {
      std::size_t start = i;
      while (i < n && html[i] != '<') ++i;
      add_text(decode_entities(html.substr(start, i - start)));
      continue;
    }
    if (html.compare(i, 4, "<!--") == 0) {
      std::size_t end = html.find("-->", i);
      i = end == std::string::npos ? n : end + 3;
      continue;
    }
    if (i + 1 < n && (html[i + 1] == '!' || html[i + 1] == '?')) {
      std::size_t end = html.find('>', i);
      i = end == std::string::npos ? n : end + 1;
      continue;
    }
    if (i + 1 >= n || (!std::isalpha((unsigned char)html[i + 1]) && html[i + 1] != '/')) {
      add_text("<");
      ++i;
      continue;
    }

    bool closing = html[i + 1] == '/';
    std::size_t j = i + (closing ? 2 : 1);
    std::string tag;
    while (j < n && std::isalnum((unsigned char)html[j])) {
      tag += char(std::tolower((unsigned char)html[j]));
      ++j;
    }
    std::size_t gt = html.find('>', j);
    std::string attrs = html.substr(j, (gt == std::string::npos ? n : gt) - j);
    bool self_closing = !attrs.empty() && attrs.back() == '/';
    i = gt == std::string::npos ? n : gt + 1;

    if (closing) {
      for (std::size_t s = stack.size(); s-- > 1;) {
        if (stack[s]->tag == tag) {
          stack.resize(s);
          break;
        }
      }
      continue;
    }

    if (tag == "script" || tag == "style") {
      if (!self_closing) {
        std::string close = "</" + tag;
        std::size_t end = i;
        while (end < n) {
          std::size_t cand = html.find('<', end);
          if (cand == std::string::npos) { end = n; break; }
          std::string got = html.substr(cand, close.size());
          for (auto& c : got) c = char(std::tolower((unsigned char)c));
          if (got == close) {
            std::size_t g2 = html.find('>', cand);
            end = g2 == std::string::npos ? n : g2 + 1;
            break;
          }
          end = cand + 1;
        }
        i = end;
      }
      continue;
    }
    if (tag == "br") {
      add_text(" ");
      continue;
    }

    if (block_level(tag) && is_ph(stack.back()->tag)) stack.pop_back();

    auto node = std::make_unique<DomNode>();
    node->tag = tag;
    auto cpos = attrs.find("class=");
    if (cpos != std::string::npos) {
      char q = attrs[cpos + 6];
      if (q == '"' || q == '\'') {
        auto endq = attrs.find(q, cpos + 7);
        if (endq != std::string::npos) {
          node->class_attr = attrs.substr(cpos + 7, endq - cpos - 7);
        }
      }
    }
    DomNode* raw = node.get();
    stack.back()->children.push_back(std::move(node));
    if (!self_closing) stack.push_back(raw);
  }
  return root;
}

inline void collect_text(const DomNode& node, std::string& out) {
  if (node.tag.empty()) {
    out += node.text;
    return;
  }
  for (const auto& c : node.children) collect_text(*c, out);
}

inline void walk_blocks(const DomNode& node,
                        std::vector<embedkit::corpus::Block>& out) {
  using embedkit::corpus::Block;
  using namespace dom_detail;
  if (node.tag == "nav") return;
  if (is_ph(node.tag)) {
    std::string text;
    collect_text(node, text);
    text = squash(text);
    if (!text.empty()) {
      Block b;
      if (node.tag == "p") {
        b.kind = Block::Kind::paragraph;
        b.label = node.class_attr;
      } else {
        b.kind = Block::Kind::heading;
        b.level = node.tag[1] - '0';
      }
      b.text = text;
      out.push_back(std::move(b));
    }
    return;
  }
  for (const auto& c : node.children) walk_blocks(*c, out);
}

inline std::vector<embedkit::corpus::Block> naive_parse_blocks(
    const std::string& html) {
  auto dom = build_dom(html);
  std::vector<embedkit::corpus::Block> out;
  walk_blocks(*dom, out);
  return out;
}

}  // namespace oracles
