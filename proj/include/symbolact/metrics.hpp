#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "symbolact/errors.hpp"

namespace symbolact {

struct ClassRanking {
  std::vector<double> scores;
  std::vector<int> labels;  // 0/1
};

// Non-interpolated AP: mean of precision-at-k over the positive ranks, with
// score ties resolved by original order (stable sort). No positives → unset.
inline std::optional<double> average_precision(const std::vector<double>& scores,
                                               const std::vector<int>& labels) {
  if (scores.size() != labels.size())
    throw InputError("scores and labels must have equal length");
  for (int l : labels)
    if (l != 0 && l != 1) throw InputError("labels must be 0 or 1");

  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return scores[a] > scores[b]; });

  double sum = 0.0;
  int positives = 0;
  for (size_t rank = 0; rank < order.size(); ++rank) {
    if (labels[order[rank]] == 1) {
      ++positives;
      sum += static_cast<double>(positives) / static_cast<double>(rank + 1);
    }
  }
  if (positives == 0) return std::nullopt;
  return sum / positives;
}

struct MetricReport {
  std::map<std::string, double> per_class_ap;
  double map = 0.0;
  std::vector<std::string> skipped_classes;  // no positive example; excluded from the mean
  int classes_scored = 0;
};

inline MetricReport mean_average_precision(const std::map<std::string, ClassRanking>& classes) {
  MetricReport report;
  double sum = 0.0;
  for (const auto& [name, ranking] : classes) {
    auto ap = average_precision(ranking.scores, ranking.labels);
    if (!ap) {
      report.skipped_classes.push_back(name);
      continue;
    }
    report.per_class_ap[name] = *ap;
    sum += *ap;
    ++report.classes_scored;
  }
  if (report.classes_scored > 0) report.map = sum / report.classes_scored;
  return report;
}

inline double top1_accuracy(const std::map<std::string, std::string>& predictions,
                            const std::map<std::string, std::string>& truth) {
  if (predictions.size() != truth.size())
    throw InputError("predictions and truth must cover the same questions");
  if (truth.empty()) throw InputError("top-1 accuracy needs at least one question");
  int correct = 0;
  for (const auto& [question, answer] : truth) {
    auto it = predictions.find(question);
    if (it == predictions.end())
      throw InputError("no prediction for question '" + question + "'");
    if (it->second == answer) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(truth.size());
}

// Picks the top-scoring activity per image; score ties break toward the
// lexicographically smallest activity for determinism.
inline std::map<std::string, std::string> argmax_choices(
    const std::map<std::string, std::map<std::string, double>>& predictions) {
  std::map<std::string, std::string> out;
  for (const auto& [image, scores] : predictions) {
    if (scores.empty()) throw InputError("image '" + image + "' has no scored activities");
    auto best = scores.begin();
    for (auto it = std::next(scores.begin()); it != scores.end(); ++it)
      if (it->second > best->second) best = it;
    out[image] = best->first;
  }
  return out;
}

}  // namespace symbolact
