#pragma once

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "symbolact/errors.hpp"
#include "symbolact/morphology.hpp"
#include "symbolact/text.hpp"

namespace symbolact {

enum class PromptKind {
  kSymbolInit,
  kRuleExtension,
  kEntailmentCheck,
  kParaphrase,
  kYesNoStatement,
  kHierarchySummarize,
};

inline const char* kind_name(PromptKind kind) {
  switch (kind) {
    case PromptKind::kSymbolInit: return "symbol_init";
    case PromptKind::kRuleExtension: return "rule_extension";
    case PromptKind::kEntailmentCheck: return "entailment_check";
    case PromptKind::kParaphrase: return "paraphrase";
    case PromptKind::kYesNoStatement: return "yes_no_statement";
    case PromptKind::kHierarchySummarize: return "hierarchy_summarize";
  }
  throw Error("unreachable prompt kind");
}

inline PromptKind kind_from_name(const std::string& name) {
  for (PromptKind k : {PromptKind::kSymbolInit, PromptKind::kRuleExtension,
                       PromptKind::kEntailmentCheck, PromptKind::kParaphrase,
                       PromptKind::kYesNoStatement, PromptKind::kHierarchySummarize})
    if (name == kind_name(k)) return k;
  throw FormatError("unknown prompt kind \"" + name + "\"");
}

inline constexpr const char* kRolePreamble =
    "You are helping me understand human activities in a picture.";

// Templates ship as resource files under data/prompts/<version>/ and are
// mirrored here verbatim so the library stays a single include tree; a test
// holds the two in sync. Placeholders use {name} substitution.
inline constexpr const char* kPromptTemplateVersion = "v1";

namespace prompt_template {
inline constexpr const char* kSymbolInit =
    "In a picture, a person is {activity}. What are his hands doing? Answer with "
    "{count} concise, highly related phrases. The format is \"<hands> <verb> "
    "<object>\". Output Format: {slots}";
inline constexpr const char* kRuleExtension =
    "In a picture, {emphasis}IF [{premises}] AND [condition] THEN [The person is "
    "{activity}.]. [condition] is one concise phrase. The format is \"<The "
    "person's hands/arms/hip/legs/feet> <verb> <object>\". What is [condition]? "
    "Output Format: [condition] is: [xxx].";
inline constexpr const char* kEntailmentCheck =
    "In a picture, {emphasis}{premises} Estimate the probability that he is "
    "{activity} at the same time. Choose from: (a) 0.1, (b) 0.5, (c) 0.7, (d) "
    "0.9, (e) 0.95, (f) unknown. Output Format: a/b/c/d/e/f.";
inline constexpr const char* kParaphrase =
    "Paraphrase the sentence \"{statement}\" into {count} different sentences "
    "with the same meaning. Output Format: {slots}";
inline constexpr const char* kYesNoStatement = "{statement} Yes/No?";
inline constexpr const char* kHierarchySummarize =
    "Group the following phrases about what a person is doing into a few named "
    "categories. Phrases: {items} Answer with one category per line. Output "
    "Format: <category>: <phrase>; <phrase>; ...";
}  // namespace prompt_template

inline const char* template_for(PromptKind kind) {
  switch (kind) {
    case PromptKind::kSymbolInit: return prompt_template::kSymbolInit;
    case PromptKind::kRuleExtension: return prompt_template::kRuleExtension;
    case PromptKind::kEntailmentCheck: return prompt_template::kEntailmentCheck;
    case PromptKind::kParaphrase: return prompt_template::kParaphrase;
    case PromptKind::kYesNoStatement: return prompt_template::kYesNoStatement;
    case PromptKind::kHierarchySummarize: return prompt_template::kHierarchySummarize;
  }
  throw Error("unreachable prompt kind");
}

namespace detail {
inline std::string numbered_slots(int count) {
  std::string slots;
  for (int i = 1; i <= count; ++i) {
    if (i > 1) slots += " ";
    slots += std::to_string(i) + ". xxx";
  }
  return slots;
}

inline std::string object_emphasis(const std::optional<std::string>& object_hint) {
  if (!object_hint || trim(*object_hint).empty()) return "";
  std::string obj = trim(*object_hint);
  return "there is " + indefinite_article(obj) + " " + obj + ". ";
}

inline std::string join_sentences(const std::vector<std::string>& sentences) {
  std::string out;
  for (size_t i = 0; i < sentences.size(); ++i) {
    if (i > 0) out += " ";
    out += sentences[i];
  }
  return out;
}
}  // namespace detail

// The init template never mentions the object; the hint is accepted for
// interface symmetry with the other renderers.
inline std::string render_symbol_init(const std::string& activity,
                                      const std::optional<std::string>& /*object_hint*/,
                                      int count = 5) {
  if (trim(activity).empty()) throw InputError("activity must be non-empty");
  if (count < 1) throw InputError("symbol count must be positive");
  std::string s = template_for(PromptKind::kSymbolInit);
  s = replace_all(s, "{activity}", trim(activity));
  s = replace_all(s, "{count}", std::to_string(count));
  s = replace_all(s, "{slots}", detail::numbered_slots(count));
  return s;
}

// Premises arrive as full declarative sentences (see sentence_for) in trace
// order and are joined inside the IF bracket.
inline std::string render_rule_extension(const std::vector<std::string>& premise_sentences,
                                         const std::string& activity,
                                         const std::optional<std::string>& object_hint) {
  if (premise_sentences.empty()) throw InputError("rule extension needs at least one premise");
  std::string s = template_for(PromptKind::kRuleExtension);
  s = replace_all(s, "{emphasis}", detail::object_emphasis(object_hint));
  s = replace_all(s, "{premises}", detail::join_sentences(premise_sentences));
  s = replace_all(s, "{activity}", trim(activity));
  return s;
}

inline std::string render_entailment(const std::vector<std::string>& premise_sentences,
                                     const std::string& activity,
                                     const std::optional<std::string>& object_hint) {
  if (premise_sentences.empty()) throw InputError("entailment check needs at least one premise");
  std::string s = template_for(PromptKind::kEntailmentCheck);
  s = replace_all(s, "{emphasis}", detail::object_emphasis(object_hint));
  s = replace_all(s, "{premises}", detail::join_sentences(premise_sentences));
  s = replace_all(s, "{activity}", trim(activity));
  return s;
}

inline std::string render_paraphrase(const std::string& statement, int count = 5) {
  if (trim(statement).empty()) throw InputError("statement must be non-empty");
  std::string s = template_for(PromptKind::kParaphrase);
  s = replace_all(s, "{statement}", trim(statement));
  s = replace_all(s, "{count}", std::to_string(count));
  s = replace_all(s, "{slots}", detail::numbered_slots(count));
  return s;
}

inline std::string render_yes_no(const std::string& statement_sentence) {
  if (trim(statement_sentence).empty()) throw InputError("statement must be non-empty");
  std::string s = template_for(PromptKind::kYesNoStatement);
  return replace_all(s, "{statement}", trim(statement_sentence));
}

inline std::string render_hierarchy_summarize(const std::vector<std::string>& symbol_texts) {
  if (symbol_texts.empty()) throw InputError("hierarchy summarize needs symbols");
  std::string items;
  for (size_t i = 0; i < symbol_texts.size(); ++i) {
    if (i > 0) items += " ";
    items += std::to_string(i + 1) + ". " + symbol_texts[i] + ".";
  }
  std::string s = template_for(PromptKind::kHierarchySummarize);
  return replace_all(s, "{items}", items);
}

// ---- Response parsing -------------------------------------------------

namespace detail {
// Splits "1. foo 2. bar" (newlines or spaces between items) into items.
inline std::vector<std::string> numbered_items(const std::string& raw) {
  std::vector<std::string> items;
  size_t n = raw.size();
  std::vector<std::pair<size_t, size_t>> markers;  // (marker begin, content begin)
  for (size_t i = 0; i < n; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(raw[i]))) continue;
    if (i > 0 && !std::isspace(static_cast<unsigned char>(raw[i - 1]))) continue;
    size_t j = i;
    while (j < n && std::isdigit(static_cast<unsigned char>(raw[j]))) ++j;
    if (j < n && (raw[j] == '.' || raw[j] == ')')) {
      size_t k = j + 1;
      while (k < n && (raw[k] == ' ' || raw[k] == '\t')) ++k;
      markers.emplace_back(i, k);
      i = j;
    }
  }
  for (size_t m = 0; m < markers.size(); ++m) {
    size_t begin = markers[m].second;
    size_t end = (m + 1 < markers.size()) ? markers[m + 1].first : n;
    std::string item = trim(raw.substr(begin, end - begin));
    while (!item.empty() && is_trailing_punct(item.back())) item.pop_back();
    item = trim(item);
    if (!item.empty()) items.push_back(std::move(item));
  }
  return items;
}
}  // namespace detail

// Numbered phrases with the "Hands"-style scaffolding removed; the count must
// match what the prompt asked for.
inline std::vector<std::string> parse_symbol_init(const std::string& raw, int expected) {
  std::vector<std::string> items = detail::numbered_items(raw);
  if (static_cast<int>(items.size()) != expected)
    throw ParseError("expected " + std::to_string(expected) + " numbered phrases, got " +
                         std::to_string(items.size()),
                     raw);
  for (auto& item : items) {
    if (starts_with_ci(item, "hands are ")) item = trim(item.substr(10));
    else if (starts_with_ci(item, "hands ")) item = trim(item.substr(6));
    else if (starts_with_ci(item, "his hands are ")) item = trim(item.substr(14));
    if (item.empty()) throw ParseError("empty phrase after removing scaffolding", raw);
  }
  return items;
}

inline std::vector<std::string> parse_paraphrase(const std::string& raw, int expected) {
  std::vector<std::string> items = detail::numbered_items(raw);
  if (static_cast<int>(items.size()) != expected)
    throw ParseError("expected " + std::to_string(expected) + " paraphrases, got " +
                         std::to_string(items.size()),
                     raw);
  return items;
}

// Extracts xxx from "[condition] is: [xxx]", tolerant of missing brackets and
// a trailing period.
inline std::string parse_condition(const std::string& raw) {
  std::string low = to_lower(raw);
  size_t pos = low.find("condition] is:");
  if (pos == std::string::npos) throw ParseError("no \"[condition] is:\" marker", raw);
  std::string tail = trim(raw.substr(pos + std::string("condition] is:").size()));
  while (!tail.empty() && (tail.front() == '[' || tail.front() == '"')) tail.erase(tail.begin());
  while (!tail.empty() &&
         (tail.back() == ']' || tail.back() == '"' || is_trailing_punct(tail.back())))
    tail.pop_back();
  tail = trim(tail);
  if (tail.empty()) throw ParseError("empty condition phrase", raw);
  return tail;
}

// First standalone choice letter wins; anything else is an error, never a
// silent default.
inline char parse_entailment_letter(const std::string& raw) {
  std::string token;
  auto consider = [&](const std::string& t) -> std::optional<char> {
    if (t.size() == 1 && t[0] >= 'a' && t[0] <= 'f') return t[0];
    return std::nullopt;
  };
  for (size_t i = 0; i <= raw.size(); ++i) {
    bool boundary = i == raw.size() || !std::isalnum(static_cast<unsigned char>(raw[i]));
    if (!boundary) {
      token.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(raw[i]))));
      continue;
    }
    if (!token.empty()) {
      if (auto c = consider(token)) return *c;
      token.clear();
    }
  }
  throw ParseError("no choice letter a-f in response", raw);
}

inline bool parse_yes_no(const std::string& raw) {
  std::string token;
  for (size_t i = 0; i <= raw.size(); ++i) {
    bool boundary = i == raw.size() || !std::isalpha(static_cast<unsigned char>(raw[i]));
    if (!boundary) {
      token.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(raw[i]))));
      continue;
    }
    if (token == "yes") return true;
    if (token == "no") return false;
    token.clear();
  }
  throw ParseError("no yes/no in response", raw);
}

struct HierarchyGroup {
  std::string father;
  std::vector<std::string> sons;
};

// Lines of "<category>: <phrase>; <phrase>; ...".
inline std::vector<HierarchyGroup> parse_hierarchy(const std::string& raw) {
  std::vector<HierarchyGroup> groups;
  std::string line;
  std::istringstream in(raw);
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    size_t colon = line.find(':');
    if (colon == std::string::npos) continue;
    HierarchyGroup g;
    g.father = trim(line.substr(0, colon));
    std::string rest = line.substr(colon + 1);
    size_t start = 0;
    while (start <= rest.size()) {
      size_t semi = rest.find(';', start);
      std::string son = trim(semi == std::string::npos ? rest.substr(start)
                                                       : rest.substr(start, semi - start));
      while (!son.empty() && is_trailing_punct(son.back())) son.pop_back();
      if (!son.empty()) g.sons.push_back(trim(son));
      if (semi == std::string::npos) break;
      start = semi + 1;
    }
    if (!g.father.empty() && !g.sons.empty()) groups.push_back(std::move(g));
  }
  if (groups.empty()) throw ParseError("no category lines in response", raw);
  return groups;
}

}  // namespace symbolact
