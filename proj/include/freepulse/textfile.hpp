#pragma once

// Minimal sectioned key/value text format shared by device, problem and
// experiment files:
//
//   # comment
//   dt_ns = 2/9
//   [qubit.0]
//   freq_z = 5.3615
//   matrix = -1.8267 0.1814
//            0.1814 -0.2596      <- continuation line (no '=')
//
// Keys before the first section header live in the "" section.

#include <charconv>
#include <cstddef>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "freepulse/errors.hpp"

namespace freepulse::text {

struct Entry {
  std::string value;
  std::size_t line = 0;
};

struct Section {
  std::string name;
  std::size_t line = 0;
  std::map<std::string, Entry> entries;

  bool has(const std::string& key) const { return entries.count(key) != 0; }
};

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto pos = s.find(sep, start);
    const auto end = pos == std::string_view::npos ? s.size() : pos;
    out.push_back(trim(s.substr(start, end - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

class Document {
 public:
  static Document parse(std::string_view content, std::string source) {
    Document doc;
    doc.source_ = std::move(source);
    doc.sections_.push_back(Section{"", 0, {}});
    std::istringstream in{std::string(content)};
    std::string raw;
    std::size_t lineno = 0;
    Entry* last = nullptr;
    while (std::getline(in, raw)) {
      ++lineno;
      const auto hash = raw.find('#');
      const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']' || line.size() < 3) {
          throw ParseError(doc.source_, lineno, "malformed section header '" + line + "'");
        }
        const std::string name = trim(line.substr(1, line.size() - 2));
        if (doc.find(name) != nullptr) {
          throw ParseError(doc.source_, lineno, "duplicate section [" + name + "]");
        }
        doc.sections_.push_back(Section{name, lineno, {}});
        last = nullptr;
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        if (last == nullptr) {
          throw ParseError(doc.source_, lineno, "expected 'key = value', got '" + line + "'");
        }
        last->value += " " + line;
        continue;
      }
      const std::string key = trim(line.substr(0, eq));
      if (key.empty()) throw ParseError(doc.source_, lineno, "empty key");
      auto& section = doc.sections_.back();
      if (section.has(key)) {
        throw ParseError(doc.source_, lineno, "duplicate key '" + key + "'");
      }
      last = &section.entries[key];
      last->value = trim(line.substr(eq + 1));
      last->line = lineno;
    }
    return doc;
  }

  static Document load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, 0, "cannot open file");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path);
  }

  const std::string& source() const { return source_; }
  const std::vector<Section>& sections() const { return sections_; }
  const Section& root() const { return sections_.front(); }

  const Section* find(const std::string& name) const {
    for (const auto& s : sections_) {
      if (s.name == name) return &s;
    }
    return nullptr;
  }

  [[noreturn]] void fail(std::size_t line, const std::string& what) const {
    throw ParseError(source_, line, what);
  }

  double number(const Section& s, const std::string& key) const {
    const auto it = s.entries.find(key);
    if (it == s.entries.end()) {
      fail(s.line, "missing key '" + key + "'" + (s.name.empty() ? "" : " in [" + s.name + "]"));
    }
    return to_number(it->second.value, it->second.line);
  }

  std::optional<double> optional_number(const Section& s, const std::string& key) const {
    const auto it = s.entries.find(key);
    if (it == s.entries.end()) return std::nullopt;
    return to_number(it->second.value, it->second.line);
  }

  std::optional<std::string> optional_string(const Section& s, const std::string& key) const {
    const auto it = s.entries.find(key);
    if (it == s.entries.end()) return std::nullopt;
    return it->second.value;
  }

  std::vector<double> numbers(const Section& s, const std::string& key) const {
    const auto it = s.entries.find(key);
    if (it == s.entries.end()) fail(s.line, "missing key '" + key + "'");
    std::vector<double> out;
    std::istringstream in(it->second.value);
    std::string tok;
    while (in >> tok) {
      for (const auto& part : split(tok, ',')) {
        if (!part.empty()) out.push_back(to_number(part, it->second.line));
      }
    }
    return out;
  }

  /// Accepts decimals, "inf", and simple fractions such as "2/9".
  double to_number(const std::string& text, std::size_t line) const {
    const std::string t = trim(text);
    if (t == "inf" || t == "infinity") return std::numeric_limits<double>::infinity();
    const auto slash = t.find('/');
    if (slash != std::string::npos) {
      return to_number(t.substr(0, slash), line) / to_number(t.substr(slash + 1), line);
    }
    double v = 0.0;
    const auto* first = t.data();
    const auto* last = t.data() + t.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) fail(line, "not a number: '" + t + "'");
    return v;
  }

 private:
  std::string source_;
  std::vector<Section> sections_;
};

}  // namespace freepulse::text
