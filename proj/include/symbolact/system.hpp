#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "symbolact/errors.hpp"
#include "symbolact/text.hpp"

namespace symbolact {

using SymbolId = int;
using RuleId = int;

struct Symbol {
  SymbolId id = 0;
  std::string text;      // canonical form; unique within a system
  std::string raw_text;  // first spelling seen, kept for display
  bool is_conclusion = false;
};

struct RuleProvenance {
  std::optional<double> entailment_score;
  int round = 0;
  std::vector<SymbolId> trace;  // premise ids in generation order
  bool unknown_flagged = false; // an "unknown" entailment sample contributed
};

struct Rule {
  RuleId id = 0;
  std::vector<SymbolId> premises;  // sorted by id, no duplicates
  SymbolId conclusion = 0;
  std::optional<double> entailment_score;
  int round = 0;
  std::vector<SymbolId> trace;
  bool unknown_flagged = false;       // not serialized
  std::vector<double> merged_scores;  // losing scores folded in by merge; not serialized
};

// Directed hypergraph over symbols: each rule is a many-premise, one-head
// edge meaning "premises jointly entail the conclusion". Symbol identity is
// the canonical text; ids are a per-system monotone counter.
class SymbolicSystem {
 public:
  SymbolId upsert_symbol(const std::string& raw_text, bool is_conclusion = false) {
    require_mutable();
    std::string canon = canonicalize_symbol_text(raw_text);
    auto it = by_text_.find(canon);
    if (it != by_text_.end()) {
      if (is_conclusion) symbols_.at(it->second).is_conclusion = true;
      return it->second;
    }
    SymbolId id = next_symbol_id_++;
    symbols_.emplace(id, Symbol{id, canon, trim(raw_text), is_conclusion});
    by_text_.emplace(std::move(canon), id);
    return id;
  }

  const Symbol* find_symbol(SymbolId id) const {
    auto it = symbols_.find(id);
    return it == symbols_.end() ? nullptr : &it->second;
  }

  const Symbol* find_text(const std::string& text) const {
    auto it = by_text_.find(canonicalize_symbol_text(text));
    return it == by_text_.end() ? nullptr : &symbols_.at(it->second);
  }

  // Throws DuplicateRuleError when the same premise set already entails the
  // same conclusion; the error carries the existing rule id.
  RuleId add_rule(const std::vector<SymbolId>& premises, SymbolId conclusion,
                  const RuleProvenance& prov = {}) {
    auto [id, inserted] = add_rule_or_existing(premises, conclusion, prov);
    if (!inserted)
      throw DuplicateRuleError("duplicate rule: premises already entail conclusion (rule " +
                                   std::to_string(id) + ")",
                               id);
    return id;
  }

  RuleId add_rule(const std::vector<std::string>& premise_texts,
                  const std::string& conclusion_text, const RuleProvenance& prov = {}) {
    return add_rule(upsert_all(premise_texts), upsert_symbol(conclusion_text, true), prov);
  }

  // Dedup-tolerant variant used by the instantiation loop: returns
  // {existing_or_new_id, inserted}.
  std::pair<RuleId, bool> add_rule_or_existing(std::vector<SymbolId> premises,
                                               SymbolId conclusion,
                                               const RuleProvenance& prov = {}) {
    require_mutable();
    if (premises.empty()) throw InputError("rule must have at least one premise");
    std::sort(premises.begin(), premises.end());
    premises.erase(std::unique(premises.begin(), premises.end()), premises.end());
    for (SymbolId p : premises) {
      if (!symbols_.count(p))
        throw InputError("rule references unknown premise id " + std::to_string(p));
      if (p == conclusion)
        throw InputError("conclusion appears among its own premises (id " +
                         std::to_string(p) + ")");
    }
    if (!symbols_.count(conclusion))
      throw InputError("rule references unknown conclusion id " + std::to_string(conclusion));
    symbols_.at(conclusion).is_conclusion = true;
    RuleKey key{premises, conclusion};
    auto it = rule_index_.find(key);
    if (it != rule_index_.end()) return {it->second, false};
    RuleId id = next_rule_id_++;
    Rule r;
    r.id = id;
    r.premises = premises;
    r.conclusion = conclusion;
    r.entailment_score = prov.entailment_score;
    r.round = prov.round;
    r.trace = prov.trace;
    r.unknown_flagged = prov.unknown_flagged;
    rules_.emplace(id, std::move(r));
    rule_index_.emplace(std::move(key), id);
    return {id, true};
  }

  std::pair<RuleId, bool> add_rule_or_existing(const std::vector<std::string>& premise_texts,
                                               const std::string& conclusion_text,
                                               const RuleProvenance& prov = {}) {
    return add_rule_or_existing(upsert_all(premise_texts),
                                upsert_symbol(conclusion_text, true), prov);
  }

  Rule* find_rule(RuleId id) {
    auto it = rules_.find(id);
    return it == rules_.end() ? nullptr : &it->second;
  }
  const Rule* find_rule(RuleId id) const {
    auto it = rules_.find(id);
    return it == rules_.end() ? nullptr : &it->second;
  }

  // Removes symbols that appear in no rule and are not conclusions of record.
  // Returns the canonical texts removed; used by the instantiation loop to
  // drop queue-seeded symbols that never earned a rule.
  std::vector<std::string> prune_unreferenced(const std::set<SymbolId>& keep = {}) {
    require_mutable();
    std::set<SymbolId> referenced(keep);
    for (const auto& [id, r] : rules_) {
      referenced.insert(r.conclusion);
      referenced.insert(r.premises.begin(), r.premises.end());
    }
    std::vector<std::string> removed;
    for (auto it = symbols_.begin(); it != symbols_.end();) {
      if (!referenced.count(it->first) && !it->second.is_conclusion) {
        removed.push_back(it->second.text);
        by_text_.erase(it->second.text);
        it = symbols_.erase(it);
      } else {
        ++it;
      }
    }
    return removed;
  }

  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }

  const std::map<SymbolId, Symbol>& symbols() const { return symbols_; }
  const std::map<RuleId, Rule>& rules() const { return rules_; }

  std::vector<const Symbol*> conclusions() const {
    std::vector<const Symbol*> out;
    for (const auto& [id, s] : symbols_)
      if (s.is_conclusion) out.push_back(&s);
    return out;
  }

  std::vector<const Rule*> rules_for(SymbolId conclusion) const {
    std::vector<const Rule*> out;
    for (const auto& [id, r] : rules_)
      if (r.conclusion == conclusion) out.push_back(&r);
    return out;
  }

  // Internal loaders for deserialization and decomposition: insert fully
  // formed records keeping their ids. Collisions are errors.
  void raw_insert(const Symbol& s) {
    require_mutable();
    if (symbols_.count(s.id))
      throw FormatError("duplicate symbol id " + std::to_string(s.id));
    if (by_text_.count(s.text))
      throw FormatError("duplicate symbol text \"" + s.text + "\"");
    symbols_.emplace(s.id, s);
    by_text_.emplace(s.text, s.id);
    next_symbol_id_ = std::max(next_symbol_id_, s.id + 1);
  }

  void raw_insert(const Rule& r) {
    require_mutable();
    if (rules_.count(r.id))
      throw FormatError("duplicate rule id " + std::to_string(r.id));
    rules_.emplace(r.id, r);
    RuleKey key{r.premises, r.conclusion};
    rule_index_.emplace(std::move(key), r.id);
    next_rule_id_ = std::max(next_rule_id_, r.id + 1);
  }

 private:
  using RuleKey = std::pair<std::vector<SymbolId>, SymbolId>;

  std::vector<SymbolId> upsert_all(const std::vector<std::string>& texts) {
    std::vector<SymbolId> ids;
    ids.reserve(texts.size());
    for (const auto& t : texts) ids.push_back(upsert_symbol(t));
    return ids;
  }

  void require_mutable() const {
    if (frozen_) throw Error("system is frozen; construction is over");
  }

  std::map<SymbolId, Symbol> symbols_;
  std::map<RuleId, Rule> rules_;
  std::unordered_map<std::string, SymbolId> by_text_;
  std::map<RuleKey, RuleId> rule_index_;
  SymbolId next_symbol_id_ = 1;
  RuleId next_rule_id_ = 1;
  bool frozen_ = false;
};

// One conclusion's slice of a system: the conclusion, the rules that entail
// it, and exactly the symbols those rules touch. Ids are inherited.
struct SubSystem {
  SymbolicSystem system;
  SymbolId conclusion_id = 0;

  const Symbol& conclusion() const {
    const Symbol* s = system.find_symbol(conclusion_id);
    if (!s) throw Error("subsystem lost its conclusion symbol");
    return *s;
  }
};

inline SubSystem decompose(const SymbolicSystem& system, const std::string& conclusion_text) {
  const Symbol* c = system.find_text(conclusion_text);
  if (!c) throw InputError("unknown conclusion \"" + conclusion_text + "\"");
  SubSystem sub;
  sub.conclusion_id = c->id;
  sub.system.raw_insert(*c);
  std::set<SymbolId> have{c->id};
  for (const Rule* r : system.rules_for(c->id)) {
    for (SymbolId p : r->premises) {
      if (have.insert(p).second) sub.system.raw_insert(*system.find_symbol(p));
    }
    sub.system.raw_insert(*r);
  }
  return sub;
}

// Union of subsystems into a fresh system. Symbols unite on canonical text
// (ids remapped); rules on (premise text set, conclusion text). When two
// copies of a rule disagree on entailment score the larger score wins and the
// loser is kept in merged_scores.
inline SymbolicSystem merge_subsystems(const std::vector<SubSystem>& parts) {
  SymbolicSystem merged;
  for (const SubSystem& part : parts) {
    std::map<SymbolId, SymbolId> remap;
    for (const auto& [old_id, s] : part.system.symbols())
      remap[old_id] = merged.upsert_symbol(s.raw_text, s.is_conclusion);
    for (const auto& [old_id, r] : part.system.rules()) {
      std::vector<SymbolId> premises;
      premises.reserve(r.premises.size());
      for (SymbolId p : r.premises) premises.push_back(remap.at(p));
      RuleProvenance prov;
      prov.entailment_score = r.entailment_score;
      prov.round = r.round;
      for (SymbolId t : r.trace) prov.trace.push_back(remap.at(t));
      prov.unknown_flagged = r.unknown_flagged;
      auto [id, inserted] = merged.add_rule_or_existing(premises, remap.at(r.conclusion), prov);
      if (!inserted) {
        Rule* kept = merged.find_rule(id);
        double incoming = r.entailment_score.value_or(-1.0);
        double existing = kept->entailment_score.value_or(-1.0);
        if (incoming > existing) {
          kept->merged_scores.push_back(existing);
          kept->entailment_score = r.entailment_score;
          kept->round = r.round;
          kept->trace = prov.trace;
          kept->unknown_flagged = r.unknown_flagged;
        } else {
          kept->merged_scores.push_back(incoming);
        }
      }
    }
  }
  return merged;
}

struct ValidationFinding {
  std::string kind;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationFinding> findings;
  bool ok() const { return findings.empty(); }
};

inline ValidationReport validate(const SymbolicSystem& system) {
  ValidationReport report;
  auto flag = [&](const std::string& kind, const std::string& msg) {
    report.findings.push_back({kind, msg});
  };
  std::map<std::string, int> text_counts;
  for (const auto& [id, s] : system.symbols()) {
    ++text_counts[s.text];
    if (s.text.empty()) flag("empty-text", "symbol " + std::to_string(id) + " has empty text");
    if (s.id != id) flag("id-mismatch", "symbol keyed " + std::to_string(id) +
                                            " carries id " + std::to_string(s.id));
  }
  for (const auto& [text, n] : text_counts)
    if (n > 1) flag("duplicate-text", "canonical text \"" + text + "\" appears " +
                                          std::to_string(n) + " times");
  std::set<std::pair<std::vector<SymbolId>, SymbolId>> seen;
  for (const auto& [id, r] : system.rules()) {
    if (r.premises.empty())
      flag("empty-premises", "rule " + std::to_string(id) + " has no premises");
    if (!std::is_sorted(r.premises.begin(), r.premises.end()))
      flag("unsorted-premises", "rule " + std::to_string(id) + " premises not sorted by id");
    for (SymbolId p : r.premises) {
      if (!system.find_symbol(p))
        flag("dangling-premise", "rule " + std::to_string(id) +
                                     " references missing symbol id " + std::to_string(p));
      if (p == r.conclusion)
        flag("self-premise", "rule " + std::to_string(id) + " lists its conclusion id " +
                                 std::to_string(p) + " as a premise");
    }
    if (!system.find_symbol(r.conclusion))
      flag("dangling-conclusion", "rule " + std::to_string(id) +
                                      " references missing conclusion id " +
                                      std::to_string(r.conclusion));
    if (!seen.insert({r.premises, r.conclusion}).second)
      flag("duplicate-rule", "rule " + std::to_string(id) +
                                 " repeats an earlier premise set and conclusion");
  }
  return report;
}

namespace detail {
inline double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;  // identical-empty
  std::vector<std::string> inter;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(inter));
  size_t uni = a.size() + b.size() - inter.size();
  return static_cast<double>(inter.size()) / static_cast<double>(uni);
}

// [-1, 1] agreement score from two Jaccard overlaps: each is rescaled from
// [0,1] onto [-1,1] and the two are averaged. -1 needs both sets disjoint.
inline double jaccard_agreement(double j_symbols, double j_rules) {
  return ((2.0 * j_symbols - 1.0) + (2.0 * j_rules - 1.0)) / 2.0;
}

inline std::string rule_identity(const SymbolicSystem& sys, const Rule& r) {
  std::set<std::string> premise_texts;
  for (SymbolId p : r.premises) premise_texts.insert(sys.find_symbol(p)->text);
  std::string key;
  for (const auto& t : premise_texts) key += t + "|";
  key += "=>" + sys.find_symbol(r.conclusion)->text;
  return key;
}
}  // namespace detail

// Structural agreement between two subsystems for the same conclusion, in
// [-1, 1]: Jaccard over canonical symbol texts (conclusion included) and over
// rule identities, each rescaled to [-1, 1], averaged. 1 means identical
// graphs; -1 is the disjoint floor of the measure.
inline double graph_similarity(const SubSystem& a, const SubSystem& b) {
  if (a.conclusion().text != b.conclusion().text)
    throw InputError("graph_similarity compares subsystems of one conclusion; got \"" +
                     a.conclusion().text + "\" vs \"" + b.conclusion().text + "\"");
  std::set<std::string> sym_a, sym_b, rule_a, rule_b;
  for (const auto& [id, s] : a.system.symbols()) sym_a.insert(s.text);
  for (const auto& [id, s] : b.system.symbols()) sym_b.insert(s.text);
  for (const auto& [id, r] : a.system.rules())
    rule_a.insert(detail::rule_identity(a.system, r));
  for (const auto& [id, r] : b.system.rules())
    rule_b.insert(detail::rule_identity(b.system, r));
  return detail::jaccard_agreement(detail::jaccard(sym_a, sym_b),
                                   detail::jaccard(rule_a, rule_b));
}

}  // namespace symbolact
