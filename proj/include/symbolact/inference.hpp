#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "symbolact/errors.hpp"
#include "symbolact/system.hpp"
#include "symbolact/system_io.hpp"

namespace symbolact {

struct RuleEval {
  RuleId rule_id = -1;
  std::optional<double> min_value;       // unset when the rule was excluded
  std::optional<SymbolId> argmin_premise;
  bool excluded = false;
};

struct ConclusionScore {
  SymbolId conclusion_id = -1;
  double p_c = 0.0;
  std::optional<RuleId> winning_rule;
  std::vector<RuleEval> trace;
};

// Fuzzy evaluation: each rule scores the minimum of its premise
// probabilities, the conclusion takes the maximum over rules. Ties go to the
// lowest rule id so the explanation is deterministic.
inline ConclusionScore evaluate_conclusion(const SubSystem& sub,
                                           const std::map<SymbolId, double>& probabilities,
                                           const std::set<SymbolId>& excluded_symbols = {}) {
  ConclusionScore out;
  out.conclusion_id = sub.conclusion_id;
  for (const auto& [rid, rule] : sub.system.rules()) {
    RuleEval eval;
    eval.rule_id = rid;
    eval.excluded = false;
    for (SymbolId p : rule.premises) {
      if (excluded_symbols.count(p)) {
        eval.excluded = true;
        eval.min_value.reset();
        eval.argmin_premise.reset();
        break;
      }
      auto it = probabilities.find(p);
      if (it == probabilities.end())
        throw CoverageError("no probability for symbol " + std::to_string(p) + " (rule " +
                            std::to_string(rid) + ")");
      if (!eval.min_value || it->second < *eval.min_value) {
        eval.min_value = it->second;
        eval.argmin_premise = p;
      }
    }
    if (!eval.excluded && eval.min_value && *eval.min_value > out.p_c) {
      out.p_c = *eval.min_value;
      out.winning_rule = rid;
    }
    // A rule that evaluates to exactly the running max loses to the earlier
    // rule; a rule evaluating to 0 still needs to be able to win when it is
    // the only one, so seed the max from the first retained rule.
    if (!eval.excluded && !out.winning_rule) {
      out.p_c = *eval.min_value;
      out.winning_rule = rid;
    }
    out.trace.push_back(std::move(eval));
  }
  if (!out.winning_rule) out.p_c = 0.0;  // no rules, or every rule excluded
  return out;
}

struct ActivityScoreOptions {
  std::optional<std::string> known_object;  // conditional tasks: contradictions score 0
  bool allow_missing_premise = false;       // treat uncovered premises as rule exclusions
};

inline std::string conclusion_text_for(const std::string& activity) {
  return canonicalize_symbol_text("The person is " + trim(activity) + ".");
}

// Scores each activity against one image's symbol probabilities (canonical
// text → value). The system is decomposed per activity so unrelated rules
// cannot interfere.
inline std::map<std::string, double> evaluate_activity_set(
    const SymbolicSystem& system, const std::map<std::string, double>& symbol_probs,
    const std::vector<ActivitySpec>& activities, const ActivityScoreOptions& opts = {},
    std::map<std::string, ConclusionScore>* explanations = nullptr) {
  std::map<std::string, double> out;
  for (const auto& spec : activities) {
    std::string key = trim(spec.activity);
    if (opts.known_object && spec.object &&
        canonicalize_symbol_text(*spec.object) != canonicalize_symbol_text(*opts.known_object)) {
      out[key] = 0.0;
      if (explanations) (*explanations)[key] = ConclusionScore{};
      continue;
    }
    std::string conclusion = conclusion_text_for(spec.activity);
    if (!system.find_text(conclusion))
      throw InputError("activity '" + spec.activity + "' has no conclusion symbol '" +
                       conclusion + "' in the system");
    SubSystem sub = decompose(system, conclusion);
    std::map<SymbolId, double> probs;
    std::set<SymbolId> excluded;
    for (const auto& [id, s] : sub.system.symbols()) {
      if (id == sub.conclusion_id) continue;
      auto it = symbol_probs.find(s.text);
      if (it != symbol_probs.end()) {
        probs.emplace(id, it->second);
      } else if (opts.allow_missing_premise) {
        excluded.insert(id);
      }
      // else: leave it uncovered so evaluation reports the gap precisely
    }
    ConclusionScore score = evaluate_conclusion(sub, probs, excluded);
    out[key] = score.p_c;
    if (explanations) (*explanations)[key] = std::move(score);
  }
  return out;
}

enum class FusionPolicy { kMaxNorm, kFixed };

struct FusionConfig {
  FusionPolicy policy = FusionPolicy::kMaxNorm;
  double alpha1 = 1.0;
  double alpha2 = 1.0;
};

inline FusionPolicy fusion_policy_from_name(const std::string& name) {
  if (name == "maxnorm") return FusionPolicy::kMaxNorm;
  if (name == "fixed") return FusionPolicy::kFixed;
  throw InputError("unknown fusion policy: " + name);
}

// Weighted blend of the two score vectors. The default policy rescales each
// vector by its own maximum so neither side dominates on units alone.
inline std::map<std::string, double> fuse_predictions(const std::map<std::string, double>& sys1,
                                                      const std::map<std::string, double>& sys2,
                                                      const FusionConfig& config = {}) {
  if (sys1.size() != sys2.size())
    throw InputError("fusion inputs must share their activity set");
  for (const auto& [k, v] : sys1)
    if (!sys2.count(k)) throw InputError("fusion inputs disagree on activity '" + k + "'");

  double a1 = config.alpha1;
  double a2 = config.alpha2;
  if (config.policy == FusionPolicy::kMaxNorm) {
    double m1 = 0.0, m2 = 0.0;
    for (const auto& [k, v] : sys1) m1 = std::max(m1, v);
    for (const auto& [k, v] : sys2) m2 = std::max(m2, v);
    a1 = m1 > 0.0 ? 1.0 / m1 : 0.0;
    a2 = m2 > 0.0 ? 1.0 / m2 : 0.0;
  } else {
    if (a1 < 0.0 || a2 < 0.0 || (a1 == 0.0 && a2 == 0.0))
      throw InputError("fixed fusion weights must be non-negative and not both zero");
  }
  std::map<std::string, double> out;
  for (const auto& [k, v] : sys1) out[k] = a1 * v + a2 * sys2.at(k);
  return out;
}

// Prediction file: image → activity → score.
using PredictionFile = std::map<std::string, std::map<std::string, double>>;

inline PredictionFile parse_predictions(const nlohmann::json& j,
                                        const std::string& origin = "predictions") {
  if (!j.is_object()) throw FormatError(origin + ": predictions must map images to activities");
  PredictionFile out;
  for (auto img = j.begin(); img != j.end(); ++img) {
    if (!img.value().is_object())
      throw FormatError(origin + ": image '" + img.key() + "' must map activities to scores");
    for (auto rec = img.value().begin(); rec != img.value().end(); ++rec) {
      if (!rec.value().is_number())
        throw FormatError(origin + ": score for '" + rec.key() + "' must be a number");
      out[img.key()][rec.key()] = rec.value().get<double>();
    }
  }
  return out;
}

inline PredictionFile read_prediction_file(const std::string& path) {
  return parse_predictions(parse_json(read_file(path), path), path);
}

inline ordered_json serialize_predictions(const PredictionFile& predictions) {
  ordered_json j = ordered_json::object();
  for (const auto& [image, scores] : predictions) {
    ordered_json per_image = ordered_json::object();
    for (const auto& [activity, value] : scores) per_image[activity] = value;
    j[image] = std::move(per_image);
  }
  return j;
}

inline PredictionFile fuse_prediction_files(const PredictionFile& sys1, const PredictionFile& sys2,
                                            const FusionConfig& config = {}) {
  if (sys1.size() != sys2.size())
    throw InputError("fusion inputs must cover the same images");
  PredictionFile out;
  for (const auto& [image, scores] : sys1) {
    auto it = sys2.find(image);
    if (it == sys2.end()) throw InputError("fusion inputs disagree on image '" + image + "'");
    out[image] = fuse_predictions(scores, it->second, config);
  }
  return out;
}

inline ordered_json explanation_to_json(const ConclusionScore& score,
                                        const SymbolicSystem& system) {
  ordered_json j;
  j["p"] = score.p_c;
  if (score.winning_rule)
    j["winning_rule"] = *score.winning_rule;
  else
    j["winning_rule"] = nullptr;
  j["rules"] = ordered_json::array();
  for (const auto& eval : score.trace) {
    ordered_json r;
    r["rule"] = eval.rule_id;
    r["excluded"] = eval.excluded;
    if (eval.min_value) r["min"] = *eval.min_value;
    if (eval.argmin_premise) {
      const Symbol* s = system.find_symbol(*eval.argmin_premise);
      r["argmin"] = s ? s->text : std::to_string(*eval.argmin_premise);
    }
    j["rules"].push_back(std::move(r));
  }
  return j;
}

}  // namespace symbolact
