#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "symbolact/errors.hpp"
#include "symbolact/grounding.hpp"
#include "symbolact/inference.hpp"
#include "symbolact/metrics.hpp"
#include "symbolact/system.hpp"
#include "symbolact/system_io.hpp"

namespace symbolact {

struct DatasetRecord {
  std::string image_id;
  std::set<std::string> gt_activities;  // canonical
  std::set<std::string> gt_symbols;     // canonical
  std::optional<std::map<std::string, ScoreEntry>> score_table;
};

using Dataset = std::vector<DatasetRecord>;

inline Dataset parse_dataset(const nlohmann::json& j, const std::string& origin = "dataset") {
  if (!j.is_array()) throw FormatError(origin + ": dataset must be a JSON list of records");
  Dataset out;
  std::set<std::string> seen_images;
  for (const auto& rec : j) {
    DatasetRecord r;
    r.image_id = rec.at("image_id").get<std::string>();
    if (r.image_id.empty()) throw FormatError(origin + ": image_id must be non-empty");
    if (!seen_images.insert(r.image_id).second)
      throw FormatError(origin + ": duplicate image_id '" + r.image_id + "'");
    for (const auto& a : rec.at("gt_activities"))
      r.gt_activities.insert(canonicalize_symbol_text(a.get<std::string>()));
    for (const auto& s : rec.at("gt_symbols"))
      r.gt_symbols.insert(canonicalize_symbol_text(s.get<std::string>()));
    if (rec.contains("score_table") && !rec.at("score_table").is_null()) {
      std::map<std::string, ScoreEntry> table;
      for (auto it = rec.at("score_table").begin(); it != rec.at("score_table").end(); ++it)
        table[canonicalize_symbol_text(it.key())] =
            parse_score_entry(it.value(), origin + ": image '" + r.image_id + "', symbol '" +
                                              it.key() + "'");
      r.score_table = std::move(table);
    }
    out.push_back(std::move(r));
  }
  return out;
}

inline Dataset read_dataset_file(const std::string& path) {
  return parse_dataset(parse_json(read_file(path), path), path);
}

inline ordered_json serialize_dataset(const Dataset& dataset) {
  ordered_json j = ordered_json::array();
  for (const auto& r : dataset) {
    ordered_json rec;
    rec["image_id"] = r.image_id;
    rec["gt_activities"] = r.gt_activities;
    rec["gt_symbols"] = r.gt_symbols;
    if (r.score_table) {
      ordered_json table = ordered_json::object();
      for (const auto& [text, entry] : *r.score_table) table[text] = score_entry_to_json(entry);
      rec["score_table"] = std::move(table);
    } else {
      rec["score_table"] = nullptr;
    }
    j.push_back(std::move(rec));
  }
  return j;
}

namespace detail {

// Premise vocabulary of one activity's subsystem; empty when the activity
// has no conclusion in the system.
inline std::set<std::string> subsystem_vocabulary(const SymbolicSystem& system,
                                                  const std::string& activity) {
  std::string conclusion = conclusion_text_for(activity);
  if (!system.find_text(conclusion)) return {};
  SubSystem sub = decompose(system, conclusion);
  std::set<std::string> vocab;
  for (const auto& [id, s] : sub.system.symbols())
    if (id != sub.conclusion_id) vocab.insert(s.text);
  return vocab;
}

inline std::set<std::string> intersect(const std::set<std::string>& a,
                                       const std::set<std::string>& b) {
  std::set<std::string> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::inserter(out, out.begin()));
  return out;
}

}  // namespace detail

struct CoverageItem {
  std::string image_id;
  std::string activity;
  int happening = 0;  // gt symbols that fall inside the activity's vocabulary
};

struct CoverageReport {
  std::vector<CoverageItem> items;
  double mean = 0.0;
};

inline CoverageReport coverage_stats(const Dataset& dataset, const SymbolicSystem& system) {
  CoverageReport report;
  std::map<std::string, std::set<std::string>> vocab_cache;
  long sum = 0;
  for (const auto& rec : dataset) {
    for (const auto& activity : rec.gt_activities) {
      auto it = vocab_cache.find(activity);
      if (it == vocab_cache.end())
        it = vocab_cache.emplace(activity, detail::subsystem_vocabulary(system, activity)).first;
      int count = static_cast<int>(detail::intersect(rec.gt_symbols, it->second).size());
      report.items.push_back({rec.image_id, activity, count});
      sum += count;
    }
  }
  if (!report.items.empty())
    report.mean = static_cast<double>(sum) / static_cast<double>(report.items.size());
  return report;
}

struct ConfusionPair {
  std::string image_a, activity_a;
  std::string image_b, activity_b;
};

struct ConfusionReport {
  long pairs = 0;
  long denominator = 0;  // C(items, 2)
  std::vector<ConfusionPair> examples;
};

// Two (image, activity) items confuse each other when their happening-symbol
// sets — each restricted to its own activity's vocabulary — are identical
// while the activities differ.
inline ConfusionReport confusion_pairs(const Dataset& dataset, const SymbolicSystem& system) {
  struct Item {
    const DatasetRecord* record;
    std::string activity;
    std::set<std::string> happening;
  };
  std::vector<Item> items;
  std::map<std::string, std::set<std::string>> vocab_cache;
  for (const auto& rec : dataset) {
    for (const auto& activity : rec.gt_activities) {
      auto it = vocab_cache.find(activity);
      if (it == vocab_cache.end())
        it = vocab_cache.emplace(activity, detail::subsystem_vocabulary(system, activity)).first;
      items.push_back({&rec, activity, detail::intersect(rec.gt_symbols, it->second)});
    }
  }
  ConfusionReport report;
  long n = static_cast<long>(items.size());
  report.denominator = n * (n - 1) / 2;
  for (size_t i = 0; i < items.size(); ++i) {
    for (size_t k = i + 1; k < items.size(); ++k) {
      if (items[i].activity == items[k].activity) continue;
      if (items[i].happening != items[k].happening) continue;
      ++report.pairs;
      report.examples.push_back({items[i].record->image_id, items[i].activity,
                                 items[k].record->image_id, items[k].activity});
    }
  }
  return report;
}

namespace detail {

// Like evaluate_activity_set, but an activity absent from the system scores
// 0 instead of erroring: grid cells measure that very incompleteness.
inline std::map<std::string, double> score_activities_tolerant(
    const SymbolicSystem& system, const std::map<std::string, double>& symbol_probs,
    const std::set<std::string>& activities) {
  std::map<std::string, double> out;
  for (const auto& activity : activities) {
    std::string conclusion = conclusion_text_for(activity);
    if (!system.find_text(conclusion)) {
      out[activity] = 0.0;
      continue;
    }
    SubSystem sub = decompose(system, conclusion);
    std::map<SymbolId, double> probs;
    for (const auto& [id, s] : sub.system.symbols()) {
      if (id == sub.conclusion_id) continue;
      auto it = symbol_probs.find(s.text);
      if (it != symbol_probs.end()) probs.emplace(id, it->second);
    }
    out[activity] = evaluate_conclusion(sub, probs).p_c;
  }
  return out;
}

}  // namespace detail

// The idealized symbolic system of the bottleneck analysis: one rule per
// positive (image, activity) pair, premised on the image's full ground-truth
// symbol set. Built fresh so only coverage-completing rules exist.
inline SymbolicSystem coverage_completed_system(const Dataset& dataset) {
  SymbolicSystem completed;
  for (const auto& rec : dataset) {
    if (rec.gt_symbols.empty()) continue;
    for (const auto& activity : rec.gt_activities) {
      SymbolId conclusion =
          completed.upsert_symbol("The person is " + activity + ".", true);
      std::vector<SymbolId> premises;
      for (const auto& text : rec.gt_symbols) premises.push_back(completed.upsert_symbol(text));
      completed.add_rule_or_existing(premises, conclusion, {});
    }
  }
  return completed;
}

struct BottleneckGrid {
  // mAP × 100 per cell; axes are (symbol prediction, symbolic system).
  double both_perfect = 0.0;
  double perfect_symbols_only = 0.0;  // perfect symbols, system as given
  double perfect_system_only = 0.0;   // scored symbols, completed system
  double both_imperfect = 0.0;
};

namespace detail {

inline std::map<std::string, double> symbol_probs_for(const DatasetRecord& rec,
                                                      const SymbolicSystem& system,
                                                      bool perfect_symbols) {
  std::map<std::string, double> probs;
  if (perfect_symbols) {
    for (const auto& [id, s] : system.symbols())
      if (!s.is_conclusion) probs[s.text] = rec.gt_symbols.count(s.text) ? 1.0 : 0.0;
  } else {
    if (!rec.score_table)
      throw CoverageError("image '" + rec.image_id +
                          "' has no score_table but scored symbols were requested");
    for (const auto& [text, entry] : *rec.score_table)
      probs[text] = resolve_score_entry(entry);
  }
  return probs;
}

inline double grid_cell(const Dataset& dataset, const SymbolicSystem& system,
                        const std::set<std::string>& activities, bool perfect_symbols) {
  std::map<std::string, ClassRanking> classes;
  for (const auto& rec : dataset) {
    std::map<std::string, double> probs = symbol_probs_for(rec, system, perfect_symbols);
    std::map<std::string, double> scores;
    try {
      scores = score_activities_tolerant(system, probs, activities);
    } catch (const CoverageError& e) {
      throw CoverageError("image '" + rec.image_id + "': " + e.what());
    }
    for (const auto& activity : activities) {
      classes[activity].scores.push_back(scores.at(activity));
      classes[activity].labels.push_back(rec.gt_activities.count(activity) ? 1 : 0);
    }
  }
  return mean_average_precision(classes).map * 100.0;
}

}  // namespace detail

inline BottleneckGrid bottleneck_grid(const Dataset& dataset, const SymbolicSystem& system) {
  std::set<std::string> activities;
  for (const auto& rec : dataset)
    activities.insert(rec.gt_activities.begin(), rec.gt_activities.end());
  if (activities.empty()) throw InputError("bottleneck grid needs at least one activity");

  SymbolicSystem completed = coverage_completed_system(dataset);
  BottleneckGrid grid;
  grid.both_perfect = detail::grid_cell(dataset, completed, activities, true);
  grid.perfect_symbols_only = detail::grid_cell(dataset, system, activities, true);
  grid.perfect_system_only = detail::grid_cell(dataset, completed, activities, false);
  grid.both_imperfect = detail::grid_cell(dataset, system, activities, false);
  return grid;
}

struct OperationCountReport {
  long naive = 0;   // per-activity premise counts, no sharing
  long reuse = 0;   // distinct premise texts across all activities
  std::optional<double> hierarchical_mean;  // realized calls per image, with a tree
  std::vector<std::pair<std::string, long>> hierarchical_per_image;
};

// Counts scoring work for grounding every given activity. The hierarchical
// variant actually runs the pruned pass against each record's score table.
inline OperationCountReport operation_count(const SymbolicSystem& system,
                                            const std::vector<std::string>& activities,
                                            const std::optional<SymbolTree>& tree = {},
                                            const Dataset* dataset = nullptr) {
  OperationCountReport report;
  std::vector<SubSystem> subs;
  std::set<std::string> distinct;
  for (const auto& activity : activities) {
    std::string conclusion = conclusion_text_for(activity);
    if (!system.find_text(conclusion))
      throw InputError("activity '" + activity + "' has no conclusion in the system");
    subs.push_back(decompose(system, conclusion));
    for (const auto& [id, s] : subs.back().system.symbols()) {
      if (id == subs.back().conclusion_id) continue;
      ++report.naive;
      distinct.insert(s.text);
    }
  }
  report.reuse = static_cast<long>(distinct.size());

  if (tree && dataset) {
    long sum = 0;
    for (const auto& rec : *dataset) {
      if (!rec.score_table) continue;
      ordered_json one;  // single-image table for the backend
      ordered_json entries = ordered_json::object();
      for (const auto& [text, entry] : *rec.score_table) entries[text] = score_entry_to_json(entry);
      one[rec.image_id] = std::move(entries);
      TableBackend backend = TableBackend::from_json(one, "score_table");
      GroundingSession session(rec.image_id, backend);
      PruningResult pruned = ground_pool_with_pruning(session, subs, *tree);
      report.hierarchical_per_image.emplace_back(rec.image_id,
                                                 static_cast<long>(pruned.realized_calls));
      sum += static_cast<long>(pruned.realized_calls);
    }
    if (!report.hierarchical_per_image.empty())
      report.hierarchical_mean =
          static_cast<double>(sum) / static_cast<double>(report.hierarchical_per_image.size());
  }
  return report;
}

// --- report serialization and rendering ---

inline ordered_json coverage_to_json(const CoverageReport& report) {
  ordered_json j;
  j["mean_happening"] = report.mean;
  j["items"] = ordered_json::array();
  for (const auto& item : report.items)
    j["items"].push_back({{"image", item.image_id},
                          {"activity", item.activity},
                          {"happening", item.happening}});
  return j;
}

inline ordered_json confusion_to_json(const ConfusionReport& report) {
  ordered_json j;
  j["pairs"] = report.pairs;
  j["denominator"] = report.denominator;
  j["examples"] = ordered_json::array();
  for (const auto& p : report.examples)
    j["examples"].push_back({{"image_a", p.image_a},
                             {"activity_a", p.activity_a},
                             {"image_b", p.image_b},
                             {"activity_b", p.activity_b}});
  return j;
}

inline ordered_json grid_to_json(const BottleneckGrid& grid) {
  ordered_json j;
  j["both_perfect"] = grid.both_perfect;
  j["perfect_symbols_only"] = grid.perfect_symbols_only;
  j["perfect_system_only"] = grid.perfect_system_only;
  j["both_imperfect"] = grid.both_imperfect;
  return j;
}

inline ordered_json cost_to_json(const OperationCountReport& report) {
  ordered_json j;
  j["naive"] = report.naive;
  j["reuse"] = report.reuse;
  if (report.hierarchical_mean) {
    j["hierarchical_mean"] = *report.hierarchical_mean;
    j["hierarchical_per_image"] = ordered_json::array();
    for (const auto& [image, calls] : report.hierarchical_per_image)
      j["hierarchical_per_image"].push_back({{"image", image}, {"calls", calls}});
  }
  return j;
}

namespace detail {
inline std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}
}  // namespace detail

inline std::string render_coverage(const CoverageReport& report) {
  std::string out = "coverage: mean happening symbols per (image, activity) pair = " +
                    detail::fixed2(report.mean) + " over " +
                    std::to_string(report.items.size()) + " pairs\n";
  for (const auto& item : report.items)
    out += "  " + item.image_id + " / " + item.activity + ": " +
           std::to_string(item.happening) + "\n";
  return out;
}

inline std::string render_confusion(const ConfusionReport& report) {
  std::string out = "confusion: " + std::to_string(report.pairs) + " of " +
                    std::to_string(report.denominator) + " item pairs\n";
  for (const auto& p : report.examples)
    out += "  " + p.image_a + "/" + p.activity_a + "  ~  " + p.image_b + "/" + p.activity_b +
           "\n";
  return out;
}

inline std::string render_grid(const BottleneckGrid& grid) {
  std::string out;
  out += "bottleneck grid (mAP x 100)\n";
  out += "                      system: completed   system: as given\n";
  out += "  symbols: ground truth   " + detail::fixed2(grid.both_perfect) + "            " +
         detail::fixed2(grid.perfect_symbols_only) + "\n";
  out += "  symbols: scored         " + detail::fixed2(grid.perfect_system_only) +
         "             " + detail::fixed2(grid.both_imperfect) + "\n";
  return out;
}

inline std::string render_cost(const OperationCountReport& report) {
  std::string out = "scoring operations: naive " + std::to_string(report.naive) + ", reuse " +
                    std::to_string(report.reuse);
  if (report.hierarchical_mean)
    out += ", hierarchical " + detail::fixed2(*report.hierarchical_mean) + " per image";
  out += "\n";
  return out;
}

}  // namespace symbolact
