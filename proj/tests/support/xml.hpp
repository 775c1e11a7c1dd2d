#pragma once

// Small non-validating XML reader for checking emitted documents. Rejects
// mismatched tags, unquoted attributes and unknown entities.

#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace xml {

struct Element {
  std::string name;
  std::map<std::string, std::string> attrs;
  std::vector<std::unique_ptr<Element>> children;
  std::string text;  // concatenated character data, CDATA included

  const std::string& attr(const std::string& k) const {
    auto it = attrs.find(k);
    if (it == attrs.end()) throw std::runtime_error("missing attribute " + k + " on <" + name + ">");
    return it->second;
  }
  bool has(const std::string& k) const { return attrs.count(k) > 0; }

  void collect(const std::string& n, std::vector<const Element*>& out) const {
    for (const auto& c : children) {
      if (c->name == n) out.push_back(c.get());
      c->collect(n, out);
    }
  }
  std::vector<const Element*> all(const std::string& n) const {
    std::vector<const Element*> out;
    collect(n, out);
    return out;
  }
  const Element* find_id(const std::string& id) const {
    for (const auto& c : children) {
      if (c->has("id") && c->attrs.at("id") == id) return c.get();
      if (const Element* e = c->find_id(id)) return e;
    }
    return nullptr;
  }
};

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  std::unique_ptr<Element> document() {
    skip_misc();
    if (s_.compare(p_, 2, "<?") == 0) {
      const auto e = s_.find("?>", p_);
      if (e == std::string::npos) fail("unterminated declaration");
      p_ = e + 2;
    }
    skip_misc();
    auto root = element();
    skip_misc();
    if (p_ != s_.size()) fail("content after root element");
    return root;
  }

 private:
  const std::string& s_;
  std::size_t p_ = 0;

  [[noreturn]] void fail(const std::string& m) { throw std::runtime_error("xml: " + m + " at " + std::to_string(p_)); }

  void skip_ws() {
    while (p_ < s_.size() && (s_[p_] == ' ' || s_[p_] == '\n' || s_[p_] == '\t' || s_[p_] == '\r')) ++p_;
  }
  void skip_misc() {
    for (;;) {
      skip_ws();
      if (s_.compare(p_, 4, "<!--") == 0) {
        const auto e = s_.find("-->", p_);
        if (e == std::string::npos) fail("unterminated comment");
        p_ = e + 3;
      } else {
        return;
      }
    }
  }
  static bool name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == ':' || c == '.';
  }
  std::string name() {
    const std::size_t b = p_;
    while (p_ < s_.size() && name_char(s_[p_])) ++p_;
    if (b == p_) fail("expected a name");
    return s_.substr(b, p_ - b);
  }
  static void put_utf8(std::string& out, std::uint32_t cp) {
    if (cp < 0x80) {
      out += static_cast<char>(cp);
    } else if (cp < 0x800) {
      out += static_cast<char>(0xc0 | cp >> 6);
      out += static_cast<char>(0x80 | (cp & 0x3f));
    } else if (cp < 0x10000) {
      out += static_cast<char>(0xe0 | cp >> 12);
      out += static_cast<char>(0x80 | (cp >> 6 & 0x3f));
      out += static_cast<char>(0x80 | (cp & 0x3f));
    } else {
      out += static_cast<char>(0xf0 | cp >> 18);
      out += static_cast<char>(0x80 | (cp >> 12 & 0x3f));
      out += static_cast<char>(0x80 | (cp >> 6 & 0x3f));
      out += static_cast<char>(0x80 | (cp & 0x3f));
    }
  }
  std::string decode(const std::string& raw) {
    std::string out;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] == '<') fail("'<' in character data");
      if (raw[i] != '&') {
        out += raw[i];
        continue;
      }
      const auto semi = raw.find(';', i);
      if (semi == std::string::npos) fail("unterminated entity");
      const std::string ent = raw.substr(i + 1, semi - i - 1);
      if (ent == "amp") out += '&';
      else if (ent == "lt") out += '<';
      else if (ent == "gt") out += '>';
      else if (ent == "quot") out += '"';
      else if (ent == "apos") out += '\'';
      else if (ent.size() > 2 && ent[0] == '#' && ent[1] == 'x') put_utf8(out, std::stoul(ent.substr(2), nullptr, 16));
      else if (ent.size() > 1 && ent[0] == '#') put_utf8(out, std::stoul(ent.substr(1)));
      else fail("unknown entity &" + ent + ";");
      i = semi;
    }
    return out;
  }

  std::unique_ptr<Element> element() {
    if (s_[p_] != '<') fail("expected '<'");
    ++p_;
    auto e = std::make_unique<Element>();
    e->name = name();
    for (;;) {
      skip_ws();
      if (s_.compare(p_, 2, "/>") == 0) {
        p_ += 2;
        return e;
      }
      if (s_[p_] == '>') {
        ++p_;
        break;
      }
      const std::string k = name();
      skip_ws();
      if (s_[p_] != '=') fail("expected '='");
      ++p_;
      skip_ws();
      const char q = s_[p_];
      if (q != '"' && q != '\'') fail("unquoted attribute");
      const auto end = s_.find(q, p_ + 1);
      if (end == std::string::npos) fail("unterminated attribute");
      if (e->attrs.count(k)) fail("duplicate attribute " + k);
      e->attrs[k] = decode(s_.substr(p_ + 1, end - p_ - 1));
      p_ = end + 1;
    }
    for (;;) {
      if (p_ >= s_.size()) fail("unterminated element <" + e->name + ">");
      if (s_.compare(p_, 9, "<![CDATA[") == 0) {
        const auto end = s_.find("]]>", p_);
        if (end == std::string::npos) fail("unterminated CDATA");
        e->text += s_.substr(p_ + 9, end - p_ - 9);
        p_ = end + 3;
      } else if (s_.compare(p_, 4, "<!--") == 0) {
        const auto end = s_.find("-->", p_);
        if (end == std::string::npos) fail("unterminated comment");
        p_ = end + 3;
      } else if (s_.compare(p_, 2, "</") == 0) {
        p_ += 2;
        if (name() != e->name) fail("mismatched close tag for <" + e->name + ">");
        skip_ws();
        if (s_[p_] != '>') fail("expected '>'");
        ++p_;
        return e;
      } else if (s_[p_] == '<') {
        e->children.push_back(element());
      } else {
        const auto next = s_.find('<', p_);
        e->text += decode(s_.substr(p_, next - p_));
        p_ = next;
      }
    }
  }
};

inline std::unique_ptr<Element> parse(const std::string& s) { return Parser(s).document(); }

}  // namespace xml
