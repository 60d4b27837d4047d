#pragma once

#include <array>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "symbolact/text.hpp"

namespace symbolact {

// Small deterministic English helper used when symbol phrases are turned into
// declarative sentences for prompts ("hold a boarding pass" -> "The person is
// holding a boarding pass.") and back when oracle answers are minted into
// symbols ("walking towards the boarding gate" -> "walk towards ..."). It is
// a lookup table plus two spelling rules, not a parser; anything outside the
// table and rules passes through unchanged.
namespace morph {

inline const std::set<std::string>& verb_lexicon() {
  static const std::set<std::string> verbs = {
      "adjust", "attach", "board", "break",  "buy",     "carry",  "check",
      "climb",  "close",  "cut",   "drink",  "eat",     "fall",   "feed",
      "give",   "grab",   "grip",  "hand",   "hold",    "inspect", "lift",
      "load",   "look",   "move",  "open",   "operate", "pay",    "peel",
      "pick",   "place",  "point", "pull",   "push",    "reach",  "repair",
      "put",    "ride",   "scan",  "seat",   "sign",    "sit",    "smell",
      "squeeze", "stand", "step",  "stretch", "talk",   "touch",  "visit",
      "walk",   "wash",   "wave",  "wear",
  };
  return verbs;
}

// Verbs whose -ing form does not follow the doubling/-e rules below.
inline const std::unordered_map<std::string, std::string>& gerund_exceptions() {
  static const std::unordered_map<std::string, std::string> map = {
      {"open", "opening"},   {"visit", "visiting"}, {"listen", "listening"},
      {"offer", "offering"}, {"enter", "entering"}, {"gather", "gathering"},
      {"order", "ordering"}, {"travel", "traveling"}, {"happen", "happening"},
      {"repair", "repairing"}, {"operate", "operating"},
  };
  return map;
}

inline bool is_vowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}

// base verb -> -ing form. Exceptions table first, then drop-final-e, then
// consonant doubling for a final consonant-vowel-consonant cluster.
inline std::string gerund(const std::string& base) {
  auto it = gerund_exceptions().find(base);
  if (it != gerund_exceptions().end()) return it->second;
  size_t n = base.size();
  if (n >= 3 && base[n - 1] == 'e' && base[n - 2] != 'e')
    return base.substr(0, n - 1) + "ing";
  if (n >= 3 && !is_vowel(base[n - 1]) && base[n - 1] != 'w' &&
      base[n - 1] != 'x' && base[n - 1] != 'y' && is_vowel(base[n - 2]) &&
      !is_vowel(base[n - 3]))
    return base + std::string(1, base[n - 1]) + "ing";
  return base + "ing";
}

// -ing form -> base verb, preferring candidates the lexicon knows. Falls back
// to whichever candidate regenerates the input, and finally to the input
// itself so unknown words survive a round trip untouched.
inline std::string base_from_gerund(const std::string& word) {
  for (const auto& [base, ger] : gerund_exceptions())
    if (ger == word) return base;
  if (word.size() < 5 || word.substr(word.size() - 3) != "ing") return word;
  std::string stem = word.substr(0, word.size() - 3);
  std::vector<std::string> candidates;
  if (stem.size() >= 2 && stem[stem.size() - 1] == stem[stem.size() - 2] &&
      !is_vowel(stem[stem.size() - 1]))
    candidates.push_back(stem.substr(0, stem.size() - 1));
  candidates.push_back(stem);
  candidates.push_back(stem + "e");
  for (const auto& c : candidates)
    if (verb_lexicon().count(c) && gerund(c) == word) return c;
  for (const auto& c : candidates)
    if (gerund(c) == word) return c;
  return word;
}

inline bool is_base_verb(const std::string& w) { return verb_lexicon().count(w) > 0; }

inline bool is_known_gerund(const std::string& w) {
  std::string base = base_from_gerund(w);
  return base != w && gerund(base) == w;
}

struct BodyPart {
  const char* word;
  bool plural;
};

inline const std::vector<BodyPart>& body_parts() {
  static const std::vector<BodyPart> parts = {
      {"hand", false},  {"hands", true},  {"arm", false},      {"arms", true},
      {"hip", false},   {"hips", true},   {"leg", false},      {"legs", true},
      {"foot", false},  {"feet", true},   {"head", false},     {"back", false},
      {"knee", false},  {"knees", true},  {"shoulder", false}, {"shoulders", true},
  };
  return parts;
}

inline const BodyPart* find_body_part(const std::string& w) {
  for (const auto& p : body_parts())
    if (w == p.word) return &p;
  return nullptr;
}

inline bool contains_be_verb(const std::vector<std::string>& words) {
  for (const auto& w : words)
    if (w == "is" || w == "are") return true;
  return false;
}

}  // namespace morph

// Declarative sentence for a canonical symbol text, capitalized and with a
// terminal period. The cases, in order:
//   - already an explicit person clause        -> pass through
//   - body-part subject ("hip seated in ...")  -> "The person's hip is ..."
//   - base verb first ("hold a boarding pass") -> "The person is holding ..."
//   - contains is/are ("boarding pass is ...") -> "The boarding pass is ..."
//   - known gerund inside ("staff checking")   -> "The ... is checking ..."
//   - anything else                            -> "The <first word> is <rest>"
inline std::string sentence_for(const std::string& symbol_text) {
  std::string canon = canonicalize_symbol_text(symbol_text);
  std::vector<std::string> w = split_words(canon);
  if (canon.rfind("person", 0) == 0)
    return capitalize_first("the " + canon) + ".";
  const morph::BodyPart* part = morph::find_body_part(w[0]);
  if (part && morph::is_base_verb(w[0]) && w.size() > 1) {
    // "hand" is both a body part and a verb; read it as a body part only
    // when a verb-like word follows ("hand is raised", "hand holding a pen").
    const std::string& next = w[1];
    if (!(next == "is" || next == "are" || morph::is_base_verb(next) ||
          morph::is_known_gerund(next)))
      part = nullptr;
  }
  if (part) {
    std::string be = part->plural ? "are" : "is";
    std::string rest = join_words(w, 1);
    if (rest.empty()) return "The person's " + w[0] + " " + be + " visible.";
    std::vector<std::string> rw = split_words(rest);
    if (morph::is_base_verb(rw[0])) {
      rw[0] = morph::gerund(rw[0]);
      return "The person's " + w[0] + " " + be + " " + join_words(rw) + ".";
    }
    if (rw[0] == "is" || rw[0] == "are")
      return "The person's " + w[0] + " " + join_words(rw) + ".";
    return "The person's " + w[0] + " " + be + " " + rest + ".";
  }
  if (morph::is_base_verb(w[0])) {
    w[0] = morph::gerund(w[0]);
    return "The person is " + join_words(w) + ".";
  }
  if (morph::contains_be_verb(w)) return "The " + canon + ".";
  for (size_t i = 1; i < w.size(); ++i) {
    if (morph::is_known_gerund(w[i])) {
      std::vector<std::string> out(w.begin(), w.begin() + i);
      out.push_back("is");
      out.insert(out.end(), w.begin() + i, w.end());
      return "The " + join_words(out) + ".";
    }
  }
  if (w.size() == 1) return "The " + canon + " is visible.";
  std::vector<std::string> out;
  out.push_back(w[0]);
  out.push_back("is");
  if (morph::is_base_verb(w[1])) {
    out.push_back(morph::gerund(w[1]));
    out.insert(out.end(), w.begin() + 2, w.end());
  } else {
    out.insert(out.end(), w.begin() + 1, w.end());
  }
  return "The " + join_words(out) + ".";
}

// Normalizes an oracle phrase into symbol form: person/scaffold prefixes go,
// then canonicalization, then the leading gerund is rebased unless the phrase
// is already a clause with its own is/are.
inline std::string mint_symbol_text(const std::string& raw_phrase) {
  std::string t = trim(raw_phrase);
  while (!t.empty() && (t.front() == '[' || t.front() == '"')) t.erase(t.begin());
  while (!t.empty() && (t.back() == ']' || t.back() == '"')) t.pop_back();
  static const std::vector<std::string> prefixes = {
      "the person is", "the person's", "the person", "he is", "she is",
      "they are",      "someone is",   "his hands are", "hands are", "hands",
  };
  bool stripped = true;
  while (stripped) {
    stripped = false;
    std::string low = to_lower(trim(t));
    for (const auto& p : prefixes) {
      if (low.size() > p.size() && low.rfind(p, 0) == 0 && low[p.size()] == ' ') {
        t = trim(t).substr(p.size());
        stripped = true;
        break;
      }
    }
    t = trim(t);
  }
  std::string canon = canonicalize_symbol_text(t);
  std::vector<std::string> w = split_words(canon);
  if (morph::contains_be_verb(w)) return canon;
  if (morph::is_known_gerund(w[0])) {
    w[0] = morph::base_from_gerund(w[0]);
    return join_words(w);
  }
  return canon;
}

}  // namespace symbolact
