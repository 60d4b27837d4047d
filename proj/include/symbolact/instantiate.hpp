#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "symbolact/errors.hpp"
#include "symbolact/morphology.hpp"
#include "symbolact/oracle.hpp"
#include "symbolact/prompts.hpp"
#include "symbolact/system.hpp"
#include "symbolact/system_io.hpp"

namespace symbolact {

struct LoopConfig {
  double entailment_threshold = 0.9;  // mean at or above accepts the rule
  int entailment_samples = 5;
  int init_symbol_count = 5;
  int max_extension_symbols = 15;  // queue symbols consumed before the loop stops
  int max_premises = 6;
  int branch_factor = 2;  // candidate rules grown per queue symbol
  int drop_patience = 2;  // consecutive strict score drops before giving up
  double temperature = 1.0;
  std::string model = "gpt-4";
};

inline LoopConfig loop_config_from_json(const nlohmann::json& j) {
  LoopConfig cfg;
  static const char* known[] = {"entailment_threshold", "entailment_samples",
                                "init_symbol_count",    "max_extension_symbols",
                                "max_premises",         "branch_factor",
                                "drop_patience",        "temperature",
                                "model"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find_if(std::begin(known), std::end(known),
                     [&](const char* k) { return it.key() == k; }) == std::end(known))
      throw FormatError("unknown loop config key: " + it.key());
  }
  cfg.entailment_threshold = j.value("entailment_threshold", cfg.entailment_threshold);
  cfg.entailment_samples = j.value("entailment_samples", cfg.entailment_samples);
  cfg.init_symbol_count = j.value("init_symbol_count", cfg.init_symbol_count);
  cfg.max_extension_symbols = j.value("max_extension_symbols", cfg.max_extension_symbols);
  cfg.max_premises = j.value("max_premises", cfg.max_premises);
  cfg.branch_factor = j.value("branch_factor", cfg.branch_factor);
  cfg.drop_patience = j.value("drop_patience", cfg.drop_patience);
  cfg.temperature = j.value("temperature", cfg.temperature);
  cfg.model = j.value("model", cfg.model);
  if (cfg.entailment_threshold < 0.0 || cfg.entailment_threshold > 1.0)
    throw FormatError("entailment_threshold must lie in [0, 1]");
  if (cfg.entailment_samples < 1 || cfg.init_symbol_count < 1 || cfg.max_premises < 1 ||
      cfg.branch_factor < 1 || cfg.drop_patience < 1 || cfg.max_extension_symbols < 0)
    throw FormatError("loop config counts must be positive");
  return cfg;
}

inline LoopConfig load_loop_config(const std::string& path) {
  return loop_config_from_json(parse_json(read_file(path), path));
}

inline double entailment_letter_value(char letter) {
  switch (letter) {
    case 'a': return 0.1;
    case 'b': return 0.5;
    case 'c': return 0.7;
    case 'd': return 0.9;
    case 'e': return 0.95;
    case 'f': return 0.5;  // "unknown"; callers flag it
  }
  throw InputError(std::string("no probability for letter '") + letter + "'");
}

// Spend is tracked live per bucket; when a candidate dies its entailment and
// extension draws are reclassified as early-stop overhead, so the first three
// buckets always describe only what the surviving rules cost.
struct CostLedger {
  long init = 0;
  long entailment = 0;
  long extension = 0;
  long early_stop = 0;
  std::vector<int> accepted_premise_counts;
  std::vector<int> overhead_premise_counts;

  long total() const { return init + entailment + extension + early_stop; }

  void absorb(const CostLedger& o) {
    init += o.init;
    entailment += o.entailment;
    extension += o.extension;
    early_stop += o.early_stop;
    accepted_premise_counts.insert(accepted_premise_counts.end(),
                                   o.accepted_premise_counts.begin(),
                                   o.accepted_premise_counts.end());
    overhead_premise_counts.insert(overhead_premise_counts.end(),
                                   o.overhead_premise_counts.begin(),
                                   o.overhead_premise_counts.end());
  }
};

// Ideal cost of one instantiation: a single seeding query plus the entailment
// checks that scored each surviving rule at every size it passed through.
inline long predicted_query_count(const LoopConfig& cfg, const std::vector<int>& premise_counts) {
  long sum = 0;
  for (int c : premise_counts) sum += c;
  return 1 + static_cast<long>(cfg.entailment_samples) * sum;
}

inline long predicted_query_count(const SymbolicSystem& system, const LoopConfig& cfg) {
  long sum = 0;
  for (const auto& [id, r] : system.rules()) sum += static_cast<long>(r.premises.size());
  return static_cast<long>(system.conclusions().size()) +
         static_cast<long>(cfg.entailment_samples) * sum;
}

enum class GateAction { kAccept, kExtend, kAbandonDrop, kAbandonCap };

// Decision after each entailment check, in priority order: a passing mean
// accepts immediately; a long enough run of strictly falling means abandons;
// a full premise list abandons; otherwise extend and try again.
inline GateAction gate_decision(const std::vector<double>& scores, int premise_count,
                                const LoopConfig& cfg) {
  if (scores.empty()) throw InputError("gate decision needs at least one score");
  if (scores.back() >= cfg.entailment_threshold) return GateAction::kAccept;
  int run = 0;
  for (size_t i = scores.size(); i >= 2 && scores[i - 2] > scores[i - 1]; --i) ++run;
  if (run >= cfg.drop_patience) return GateAction::kAbandonDrop;
  if (premise_count >= cfg.max_premises) return GateAction::kAbandonCap;
  return GateAction::kExtend;
}

enum class CandidateStatus {
  kAccepted,
  kDuplicate,            // passed the gate but matched an existing rule
  kAbandonedDrop,
  kAbandonedCap,
  kAbandonedDegenerate,  // extension kept echoing known premises
};

inline const char* status_name(CandidateStatus s) {
  switch (s) {
    case CandidateStatus::kAccepted: return "accepted";
    case CandidateStatus::kDuplicate: return "duplicate";
    case CandidateStatus::kAbandonedDrop: return "abandoned_drop";
    case CandidateStatus::kAbandonedCap: return "abandoned_cap";
    case CandidateStatus::kAbandonedDegenerate: return "abandoned_degenerate";
  }
  return "unknown";
}

struct CandidateReport {
  CandidateStatus status = CandidateStatus::kAbandonedDegenerate;
  std::vector<std::string> premise_texts;  // generation order
  std::vector<double> scores;              // gate trajectory
  long entailment_queries = 0;
  long extension_queries = 0;
  std::optional<RuleId> rule_id;
};

struct RoundStat {
  int round = 0;
  int symbols_minted = 0;
  int rules_added = 0;
};

struct SubsystemStats {
  std::string activity;
  CostLedger ledger;
  std::vector<CandidateReport> candidates;
  std::vector<RoundStat> rounds;
  std::vector<std::string> skipped_queue_symbols;  // popped after the budget ran out
  std::vector<std::string> orphaned_symbols;       // seeded or minted but never used
  int processed_symbols = 0;
};

// Seeding draw: one prompt asking for init_symbol_count phrases. Returns
// minted canonical texts with duplicates removed, first spelling wins.
inline std::vector<std::string> initialize_symbols(OracleBackend& backend, const LoopConfig& cfg,
                                                   const ActivitySpec& spec, CostLedger& ledger) {
  std::string prompt = render_symbol_init(spec.activity, spec.object, cfg.init_symbol_count);
  int retries_left = 3;
  int sample = 0;
  for (;;) {
    OracleRequest req{PromptKind::kSymbolInit, prompt, sample, cfg.temperature, cfg.model};
    ++ledger.init;
    try {
      std::vector<std::string> phrases =
          parse_symbol_init(backend.complete(req), cfg.init_symbol_count);
      std::vector<std::string> minted;
      for (const auto& phrase : phrases) {
        std::string text = mint_symbol_text(phrase);
        if (std::find(minted.begin(), minted.end(), text) == minted.end())
          minted.push_back(std::move(text));
      }
      return minted;
    } catch (const ParseError&) {
      if (retries_left == 0) throw;
      --retries_left;
      ++sample;
    }
  }
}

struct EntailmentOutcome {
  double mean = 0.0;
  bool unknown_flagged = false;
  int draws = 0;
};

// Scores one premise set: entailment_samples independent draws of a letter
// grade, averaged. Unparseable draws are retried from a small budget of extra
// sample slots; "unknown" answers count as 0.5 and set the flag.
inline EntailmentOutcome score_entailment(OracleBackend& backend, const LoopConfig& cfg,
                                          const std::vector<std::string>& premise_sentences,
                                          const ActivitySpec& spec) {
  std::string prompt = render_entailment(premise_sentences, spec.activity, spec.object);
  EntailmentOutcome out;
  int retries_left = 3;
  int next_retry_sample = cfg.entailment_samples;
  double sum = 0.0;
  for (int i = 0; i < cfg.entailment_samples; ++i) {
    int sample = i;
    for (;;) {
      OracleRequest req{PromptKind::kEntailmentCheck, prompt, sample, cfg.temperature, cfg.model};
      ++out.draws;
      try {
        char letter = parse_entailment_letter(backend.complete(req));
        if (letter == 'f') out.unknown_flagged = true;
        sum += entailment_letter_value(letter);
        break;
      } catch (const ParseError&) {
        if (retries_left == 0) throw;
        --retries_left;
        sample = next_retry_sample++;
      }
    }
  }
  out.mean = sum / cfg.entailment_samples;
  return out;
}

namespace detail {

// Extension draws for one candidate share a per-branch block of sample
// indices so repeated prompts stay distinguishable in caches; `attempt`
// advances across the whole branch, covering retries and echo resamples.
constexpr int kAttemptStride = 8;

inline std::optional<std::string> extend_rule(OracleBackend& backend, const LoopConfig& cfg,
                                              const std::vector<std::string>& premise_sentences,
                                              const std::vector<std::string>& premise_texts,
                                              const std::string& conclusion_text,
                                              const ActivitySpec& spec, int branch, int& attempt,
                                              long& draws) {
  std::string prompt = render_rule_extension(premise_sentences, spec.activity, spec.object);
  int echoes = 0;
  while (attempt < kAttemptStride) {
    OracleRequest req{PromptKind::kRuleExtension, prompt, branch * kAttemptStride + attempt,
                      cfg.temperature, cfg.model};
    ++attempt;
    ++draws;
    std::string minted;
    try {
      minted = mint_symbol_text(parse_condition(backend.complete(req)));
    } catch (const ParseError&) {
      continue;
    } catch (const InputError&) {
      continue;  // condition canonicalized to nothing
    }
    bool echo = minted == conclusion_text ||
                std::find(premise_texts.begin(), premise_texts.end(), minted) !=
                    premise_texts.end();
    if (!echo) return minted;
    if (++echoes >= 2) return std::nullopt;  // the model keeps repeating itself
  }
  return std::nullopt;
}

class SubsystemBuilder {
 public:
  SubsystemBuilder(OracleBackend& backend, const LoopConfig& cfg, ActivitySpec spec)
      : backend_(backend), cfg_(cfg), spec_(std::move(spec)) {}

  SubSystem run(SubsystemStats& stats) {
    stats = SubsystemStats{};
    stats.activity = spec_.activity;
    conclusion_ = system_.upsert_symbol("The person is " + trim(spec_.activity) + ".", true);
    conclusion_text_ = system_.find_symbol(conclusion_)->text;

    for (const auto& text : initialize_symbols(backend_, cfg_, spec_, stats.ledger)) {
      if (system_.find_text(text)) continue;
      SymbolId id = system_.upsert_symbol(text);
      symbol_round_[id] = 1;
      queue_.push_back(id);
    }

    int used = 0;
    while (!queue_.empty()) {
      SymbolId sid = queue_.front();
      queue_.pop_front();
      if (used >= cfg_.max_extension_symbols) {
        stats.skipped_queue_symbols.push_back(system_.find_symbol(sid)->text);
        continue;
      }
      ++used;
      for (int branch = 0; branch < cfg_.branch_factor; ++branch)
        run_candidate(sid, branch, used, stats);
    }
    stats.processed_symbols = used;

    stats.orphaned_symbols = system_.prune_unreferenced();
    collect_rounds(stats);
    return SubSystem{std::move(system_), conclusion_};
  }

 private:
  void run_candidate(SymbolId root, int branch, int used, SubsystemStats& stats) {
    CandidateReport report;
    const Symbol* root_sym = system_.find_symbol(root);
    report.premise_texts = {root_sym->text};
    std::vector<std::string> sentences = {sentence_for(root_sym->text)};
    std::vector<SymbolId> premise_ids = {root};
    std::vector<SymbolId> minted_new;
    bool unknown = false;
    int attempt = 0;
    int parent_round = symbol_round_.at(root);

    for (;;) {
      EntailmentOutcome check = score_entailment(backend_, cfg_, sentences, spec_);
      stats.ledger.entailment += check.draws;
      report.entailment_queries += check.draws;
      report.scores.push_back(check.mean);
      unknown = unknown || check.unknown_flagged;

      GateAction action =
          gate_decision(report.scores, static_cast<int>(premise_ids.size()), cfg_);
      if (action == GateAction::kAccept) {
        resolve_accept(report, premise_ids, minted_new, unknown, parent_round, used, stats);
        break;
      }
      if (action == GateAction::kAbandonDrop) {
        resolve_overhead(report, CandidateStatus::kAbandonedDrop, stats);
        break;
      }
      if (action == GateAction::kAbandonCap) {
        resolve_overhead(report, CandidateStatus::kAbandonedCap, stats);
        break;
      }

      long draws = 0;
      auto minted = extend_rule(backend_, cfg_, sentences, report.premise_texts,
                                conclusion_text_, spec_, branch, attempt, draws);
      report.extension_queries += draws;
      stats.ledger.extension += draws;
      if (!minted) {
        resolve_overhead(report, CandidateStatus::kAbandonedDegenerate, stats);
        break;
      }

      bool existed = system_.find_text(*minted) != nullptr;
      SymbolId sid = system_.upsert_symbol(*minted);
      if (!existed) {
        symbol_round_[sid] = parent_round + 1;
        minted_new.push_back(sid);
      }
      premise_ids.push_back(sid);
      report.premise_texts.push_back(system_.find_symbol(sid)->text);
      sentences.push_back(sentence_for(system_.find_symbol(sid)->text));
    }
    stats.candidates.push_back(std::move(report));
  }

  void resolve_accept(CandidateReport& report, const std::vector<SymbolId>& premise_ids,
                      const std::vector<SymbolId>& minted_new, bool unknown, int parent_round,
                      int used, SubsystemStats& stats) {
    RuleProvenance prov;
    prov.entailment_score = report.scores.back();
    prov.round = parent_round + 1;
    prov.trace = premise_ids;
    prov.unknown_flagged = unknown;
    auto [rid, inserted] = system_.add_rule_or_existing(premise_ids, conclusion_, prov);
    if (!inserted) {
      // Same premise set rediscovered; keep the stronger score on the rule
      // of record and treat this candidate's spend as overhead.
      Rule* kept = system_.find_rule(rid);
      double incoming = report.scores.back();
      double existing = kept->entailment_score.value_or(incoming);
      if (incoming > existing) {
        kept->merged_scores.push_back(existing);
        kept->entailment_score = incoming;
        kept->trace = prov.trace;
        kept->unknown_flagged = unknown;
      } else {
        kept->merged_scores.push_back(incoming);
      }
      report.rule_id = rid;
      resolve_overhead(report, CandidateStatus::kDuplicate, stats);
      return;
    }
    report.status = CandidateStatus::kAccepted;
    report.rule_id = rid;
    rules_by_round_[prov.round] += 1;
    stats.ledger.accepted_premise_counts.push_back(static_cast<int>(premise_ids.size()));
    for (SymbolId sid : minted_new) {
      if (used >= cfg_.max_extension_symbols)
        stats.skipped_queue_symbols.push_back(system_.find_symbol(sid)->text);
      else
        queue_.push_back(sid);
    }
  }

  void resolve_overhead(CandidateReport& report, CandidateStatus status, SubsystemStats& stats) {
    report.status = status;
    stats.ledger.entailment -= report.entailment_queries;
    stats.ledger.extension -= report.extension_queries;
    stats.ledger.early_stop += report.entailment_queries + report.extension_queries;
    stats.ledger.overhead_premise_counts.push_back(
        static_cast<int>(report.premise_texts.size()));
  }

  void collect_rounds(SubsystemStats& stats) {
    std::map<int, RoundStat> by_round;
    for (const auto& [id, s] : system_.symbols()) {
      if (id == conclusion_) continue;
      auto it = symbol_round_.find(id);
      if (it == symbol_round_.end()) continue;
      auto& slot = by_round[it->second];
      slot.round = it->second;
      slot.symbols_minted += 1;
    }
    for (const auto& [round, count] : rules_by_round_) {
      auto& slot = by_round[round];
      slot.round = round;
      slot.rules_added = count;
    }
    for (auto& [round, stat] : by_round) stats.rounds.push_back(stat);
  }

  OracleBackend& backend_;
  LoopConfig cfg_;
  ActivitySpec spec_;
  SymbolicSystem system_;
  SymbolId conclusion_ = -1;
  std::string conclusion_text_;
  std::deque<SymbolId> queue_;
  std::map<SymbolId, int> symbol_round_;
  std::map<int, int> rules_by_round_;
};

}  // namespace detail

inline SubSystem instantiate_subsystem(OracleBackend& backend, const LoopConfig& cfg,
                                       const ActivitySpec& spec, SubsystemStats& stats) {
  return detail::SubsystemBuilder(backend, cfg, spec).run(stats);
}

struct InstantiationFailure {
  std::string activity;
  std::string error;
};

struct InstantiationResult {
  SymbolicSystem system;
  std::vector<SubsystemStats> stats;  // one per activity that completed
  std::vector<InstantiationFailure> failures;

  CostLedger total_ledger() const {
    CostLedger total;
    for (const auto& s : stats) total.absorb(s.ledger);
    return total;
  }
};

// Activities are instantiated independently and merged at the end; a failure
// is recorded and skipped rather than aborting the batch.
inline InstantiationResult instantiate_system(OracleBackend& backend, const LoopConfig& cfg,
                                              const std::vector<ActivitySpec>& specs) {
  InstantiationResult result;
  std::vector<SubSystem> parts;
  for (const auto& spec : specs) {
    SubsystemStats stats;
    try {
      parts.push_back(instantiate_subsystem(backend, cfg, spec, stats));
    } catch (const std::exception& e) {
      result.failures.push_back({spec.activity, e.what()});
      continue;
    }
    result.stats.push_back(std::move(stats));
  }
  result.system = merge_subsystems(parts);
  return result;
}

inline ordered_json candidate_to_json(const CandidateReport& c) {
  ordered_json j;
  j["status"] = status_name(c.status);
  j["premises"] = c.premise_texts;
  j["scores"] = c.scores;
  j["entailment_queries"] = c.entailment_queries;
  j["extension_queries"] = c.extension_queries;
  if (c.rule_id) j["rule"] = *c.rule_id;
  return j;
}

inline ordered_json ledger_to_json(const CostLedger& ledger, const LoopConfig& cfg) {
  ordered_json j;
  j["init"] = ledger.init;
  j["entailment"] = ledger.entailment;
  j["extension"] = ledger.extension;
  j["early_stop"] = ledger.early_stop;
  j["total"] = ledger.total();
  j["predicted"] = predicted_query_count(cfg, ledger.accepted_premise_counts);
  j["excess"] = ledger.total() - predicted_query_count(cfg, ledger.accepted_premise_counts);
  j["accepted_premise_counts"] = ledger.accepted_premise_counts;
  j["overhead_premise_counts"] = ledger.overhead_premise_counts;
  return j;
}

inline ordered_json instantiation_report(const InstantiationResult& result,
                                         const LoopConfig& cfg,
                                         std::optional<std::uint64_t> backend_calls = {}) {
  ordered_json report;
  report["activities"] = ordered_json::array();
  for (const auto& s : result.stats) {
    ordered_json a;
    a["activity"] = s.activity;
    a["ledger"] = ledger_to_json(s.ledger, cfg);
    a["rounds"] = ordered_json::array();
    for (const auto& r : s.rounds)
      a["rounds"].push_back({{"round", r.round},
                             {"symbols_minted", r.symbols_minted},
                             {"rules_added", r.rules_added}});
    a["processed_symbols"] = s.processed_symbols;
    a["skipped_queue_symbols"] = s.skipped_queue_symbols;
    a["orphaned_symbols"] = s.orphaned_symbols;
    a["candidates"] = ordered_json::array();
    for (const auto& c : s.candidates) a["candidates"].push_back(candidate_to_json(c));
    report["activities"].push_back(std::move(a));
  }
  CostLedger total = result.total_ledger();
  ordered_json overall;
  overall["ledger"] = ledger_to_json(total, cfg);
  // The batch prediction charges one seeding query per instantiated activity.
  long predicted = predicted_query_count(cfg, total.accepted_premise_counts) - 1 +
                   static_cast<long>(result.stats.size());
  overall["predicted"] = predicted;
  overall["excess"] = total.total() - predicted;
  if (backend_calls) overall["backend_calls"] = *backend_calls;
  report["overall"] = std::move(overall);
  report["failures"] = ordered_json::array();
  for (const auto& f : result.failures)
    report["failures"].push_back({{"activity", f.activity}, {"error", f.error}});
  return report;
}

inline void write_instantiation_report(const std::string& path,
                                       const InstantiationResult& result, const LoopConfig& cfg,
                                       std::optional<std::uint64_t> backend_calls = {}) {
  write_file(path, instantiation_report(result, cfg, backend_calls).dump(2) + "\n");
}

}  // namespace symbolact
