#pragma once

#include <algorithm>
#include <cctype>
#include <string>
#include <vector>

#include "symbolact/errors.hpp"

namespace symbolact {

inline std::string to_lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

inline std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_words(const std::string& s) {
  std::vector<std::string> words;
  std::string cur;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) words.push_back(std::move(cur)), cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

inline std::string join_words(const std::vector<std::string>& words,
                              size_t from = 0, const std::string& sep = " ") {
  std::string out;
  for (size_t i = from; i < words.size(); ++i) {
    if (i > from) out += sep;
    out += words[i];
  }
  return out;
}

inline bool is_trailing_punct(char c) {
  return c == '.' || c == ',' || c == ';' || c == ':' || c == '!' || c == '?';
}

inline bool is_article(const std::string& w) {
  return w == "a" || w == "an" || w == "the";
}

// Canonical form of a symbol text: lowercase, single-space separated, no
// trailing punctuation, no leading articles. Articles and punctuation are
// stripped repeatedly so the function is a fixpoint (idempotent). An empty
// result is an error: a symbol with no words cannot name anything.
inline std::string canonicalize_symbol_text(const std::string& raw) {
  std::vector<std::string> words = split_words(to_lower(raw));
  while (!words.empty()) {
    std::string& last = words.back();
    while (!last.empty() && is_trailing_punct(last.back())) last.pop_back();
    if (last.empty())
      words.pop_back();
    else
      break;
  }
  size_t start = 0;
  while (start < words.size() && is_article(words[start])) ++start;
  std::string out = join_words(words, start);
  if (out.empty())
    throw InputError("symbol text empty after canonicalization: \"" + raw + "\"");
  return out;
}

// "a"/"an" chooser for object emphasis ("there is an airplane").
inline std::string indefinite_article(const std::string& noun) {
  if (noun.empty()) return "a";
  char c = static_cast<char>(std::tolower(static_cast<unsigned char>(noun[0])));
  return (c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u') ? "an" : "a";
}

inline std::string capitalize_first(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

inline bool starts_with_ci(const std::string& s, const std::string& prefix) {
  if (s.size() < prefix.size()) return false;
  for (size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[i])) !=
        std::tolower(static_cast<unsigned char>(prefix[i])))
      return false;
  }
  return true;
}

inline std::string replace_all(std::string s, const std::string& from,
                               const std::string& to) {
  size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
  return s;
}

}  // namespace symbolact
