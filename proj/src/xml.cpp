#include "factlink/xml.hpp"

#include <cctype>
#include <cstdint>

#include "factlink/errors.hpp"

namespace factlink {

namespace {

bool is_name_char(char c) {
  auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) || c == '_' || c == '-' || c == '.' || c == ':' || u >= 0x80;
}

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

class Parser {
 public:
  explicit Parser(std::string_view doc) : doc_(doc) {}

  XmlNode document() {
    skip_misc();
    if (at_end()) fail("no root element");
    if (doc_[pos_] != '<') fail("text before root element");
    XmlNode root = element();
    skip_misc();
    if (!at_end()) fail("content after root element");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, pos_); }
  bool at_end() const { return pos_ >= doc_.size(); }
  bool starts(std::string_view s) const { return doc_.substr(pos_, s.size()) == s; }

  void skip_ws() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(doc_[pos_]))) ++pos_;
  }

  void skip_past(std::string_view terminator, const char* what) {
    auto end = doc_.find(terminator, pos_);
    if (end == std::string_view::npos) fail(std::string("unterminated ") + what);
    pos_ = end + terminator.size();
  }

  // Prolog, comments, processing instructions and DOCTYPE outside the root.
  void skip_misc() {
    for (;;) {
      skip_ws();
      if (starts("\xEF\xBB\xBF")) pos_ += 3;
      else if (starts("<?")) skip_past("?>", "processing instruction");
      else if (starts("<!--")) skip_past("-->", "comment");
      else if (starts("<!DOCTYPE")) skip_past(">", "doctype");
      else return;
    }
  }

  std::string name() {
    std::size_t b = pos_;
    while (!at_end() && is_name_char(doc_[pos_])) ++pos_;
    if (b == pos_) fail("expected a name");
    return std::string(doc_.substr(b, pos_ - b));
  }

  XmlNode element() {
    ++pos_;  // '<'
    XmlNode node;
    node.name = name();
    for (;;) {
      skip_ws();
      if (at_end()) fail("unterminated start tag <" + node.name + ">");
      if (starts("/>")) {
        pos_ += 2;
        return node;
      }
      if (doc_[pos_] == '>') {
        ++pos_;
        break;
      }
      std::string key = name();
      skip_ws();
      if (at_end() || doc_[pos_] != '=') fail("expected '=' after attribute " + key);
      ++pos_;
      skip_ws();
      if (at_end() || (doc_[pos_] != '"' && doc_[pos_] != '\'')) fail("expected quoted attribute value");
      char q = doc_[pos_++];
      auto end = doc_.find(q, pos_);
      if (end == std::string_view::npos) fail("unterminated attribute value");
      node.attributes.emplace_back(std::move(key), decode_entities(doc_.substr(pos_, end - pos_)));
      pos_ = end + 1;
    }

    for (;;) {
      if (at_end()) fail("unexpected end of document inside <" + node.name + ">");
      if (starts("</")) {
        std::size_t tag_at = pos_;
        pos_ += 2;
        std::string closing = name();
        skip_ws();
        if (at_end() || doc_[pos_] != '>') fail("malformed end tag");
        if (closing != node.name) {
          pos_ = tag_at;
          fail("mismatched end tag </" + closing + "> for <" + node.name + ">");
        }
        ++pos_;
        return node;
      }
      if (starts("<![CDATA[")) {
        pos_ += 9;
        auto end = doc_.find("]]>", pos_);
        if (end == std::string_view::npos) fail("unterminated CDATA section");
        node.text.append(doc_.substr(pos_, end - pos_));
        pos_ = end + 3;
      } else if (starts("<!--")) {
        skip_past("-->", "comment");
      } else if (starts("<?")) {
        skip_past("?>", "processing instruction");
      } else if (doc_[pos_] == '<') {
        node.children.push_back(element());
      } else {
        auto end = doc_.find('<', pos_);
        if (end == std::string_view::npos) end = doc_.size();
        node.text += decode_entities(doc_.substr(pos_, end - pos_));
        pos_ = end;
      }
    }
  }

  std::string_view doc_;
  std::size_t pos_ = 0;
};

bool iequals_prefix(std::string_view s, std::size_t at, std::string_view prefix) {
  if (s.size() - at < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(s[at + i])) != prefix[i]) return false;
  return true;
}

}  // namespace

const XmlNode* XmlNode::child(std::string_view n) const {
  for (const auto& c : children)
    if (c.name == n) return &c;
  return nullptr;
}

std::vector<const XmlNode*> XmlNode::children_named(std::string_view n) const {
  std::vector<const XmlNode*> out;
  for (const auto& c : children)
    if (c.name == n) out.push_back(&c);
  return out;
}

std::string XmlNode::child_text(std::string_view n) const {
  const XmlNode* c = child(n);
  return c ? c->text : std::string();
}

const std::string* XmlNode::attribute(std::string_view n) const {
  for (const auto& [k, v] : attributes)
    if (k == n) return &v;
  return nullptr;
}

XmlNode parse_xml(std::string_view document) { return Parser(document).document(); }

std::string decode_entities(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '&') {
      out += text[i];
      continue;
    }
    auto semi = text.find(';', i);
    if (semi == std::string_view::npos || semi - i > 10) {
      out += '&';
      continue;
    }
    std::string_view ent = text.substr(i + 1, semi - i - 1);
    bool ok = true;
    if (ent == "amp") out += '&';
    else if (ent == "lt") out += '<';
    else if (ent == "gt") out += '>';
    else if (ent == "quot") out += '"';
    else if (ent == "apos") out += '\'';
    else if (ent == "nbsp") append_utf8(out, 0xA0);
    else if (ent.size() > 1 && ent[0] == '#') {
      std::uint32_t cp = 0;
      bool hex = ent[1] == 'x' || ent[1] == 'X';
      std::string_view digits = ent.substr(hex ? 2 : 1);
      if (digits.empty()) ok = false;
      for (char c : digits) {
        int d;
        if (std::isdigit(static_cast<unsigned char>(c))) d = c - '0';
        else if (hex && std::isxdigit(static_cast<unsigned char>(c))) d = std::tolower(c) - 'a' + 10;
        else { ok = false; break; }
        cp = cp * (hex ? 16 : 10) + static_cast<std::uint32_t>(d);
        if (cp > 0x10FFFF) { ok = false; break; }
      }
      if (ok) append_utf8(out, cp);
    } else {
      ok = false;
    }
    if (!ok) {
      out += '&';
      continue;
    }
    i = semi;
  }
  return out;
}

std::string strip_html(std::string_view html) {
  std::string raw;
  for (std::size_t i = 0; i < html.size();) {
    if (html[i] != '<') {
      raw += html[i++];
      continue;
    }
    if (html.substr(i, 4) == "<!--") {
      auto end = html.find("-->", i);
      i = end == std::string_view::npos ? html.size() : end + 3;
      continue;
    }
    bool script = iequals_prefix(html, i, "<script");
    bool style = iequals_prefix(html, i, "<style");
    auto close = html.find('>', i);
    if (close == std::string_view::npos) break;
    i = close + 1;
    if (script || style) {
      std::string_view end_tag = script ? "</script" : "</style";
      std::size_t j = i;
      while (j < html.size() && !iequals_prefix(html, j, end_tag)) ++j;
      auto after = html.find('>', j);
      i = after == std::string_view::npos ? html.size() : after + 1;
    }
    raw += ' ';
  }
  std::string decoded = decode_entities(raw);
  std::string out;
  bool space = false;
  for (std::size_t i = 0; i < decoded.size(); ++i) {
    unsigned char c = static_cast<unsigned char>(decoded[i]);
    // U+00A0 counts as whitespace.
    if (c == 0xC2 && i + 1 < decoded.size() && static_cast<unsigned char>(decoded[i + 1]) == 0xA0) {
      space = true;
      ++i;
      continue;
    }
    if (std::isspace(c)) {
      space = true;
      continue;
    }
    if (space && !out.empty()) out += ' ';
    space = false;
    out += static_cast<char>(c);
  }
  return out;
}

}  // namespace factlink
