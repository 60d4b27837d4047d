#include "symbolact/metrics.hpp"

#include <gtest/gtest.h>

#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

using namespace symbolact;

namespace {

// Brute-force AP straight from the definition: rank by descending score with
// earlier items winning ties, then average precision over the positive ranks.
std::optional<double> ap_reference(const std::vector<double>& scores,
                                   const std::vector<int>& labels) {
  std::vector<std::pair<double, size_t>> ranked;
  for (size_t i = 0; i < scores.size(); ++i) ranked.push_back({scores[i], i});
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  int hits = 0;
  double sum = 0.0;
  for (size_t k = 0; k < ranked.size(); ++k) {
    if (labels[ranked[k].second] == 1) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(k + 1);
    }
  }
  if (hits == 0) return std::nullopt;
  return sum / hits;
}

}  // namespace

TEST(AveragePrecision, HandExamples) {
  EXPECT_EQ(*average_precision({0.9, 0.1}, {1, 0}), 1.0);
  EXPECT_EQ(*average_precision({0.9, 0.1}, {0, 1}), 0.5);
  EXPECT_EQ(*average_precision({0.9, 0.8, 0.7, 0.6}, {1, 1, 0, 0}), 1.0);
  EXPECT_DOUBLE_EQ(*average_precision({0.9, 0.8, 0.7}, {0, 1, 1}),
                   (1.0 / 2.0 + 2.0 / 3.0) / 2.0);
}

TEST(AveragePrecision, TiesKeepTheOriginalOrder) {
  EXPECT_DOUBLE_EQ(*average_precision({0.5, 0.5, 0.5}, {0, 1, 1}),
                   (1.0 / 2.0 + 2.0 / 3.0) / 2.0);
  EXPECT_EQ(*average_precision({0.5, 0.5, 0.5}, {1, 1, 0}), 1.0);
  // A tied score never leapfrogs an earlier item, even a negative one.
  EXPECT_EQ(*average_precision({0.7, 0.7}, {0, 1}), 0.5);
}

TEST(AveragePrecision, NoPositivesMeansNoScore) {
  EXPECT_FALSE(average_precision({0.9, 0.1}, {0, 0}).has_value());
  EXPECT_FALSE(average_precision({}, {}).has_value());
}

TEST(AveragePrecision, RejectsMalformedInput) {
  EXPECT_THROW(average_precision({0.9}, {1, 0}), InputError);
  EXPECT_THROW(average_precision({0.9, 0.1}, {1, 2}), InputError);
  EXPECT_THROW(average_precision({0.9, 0.1}, {-1, 0}), InputError);
}

TEST(AveragePrecision, MatchesBruteForceExhaustivelyOnShortInstances) {
  struct Sweep {
    std::vector<double> alphabet;
    int max_n;
  };
  // Every (score, label) instance over these alphabets, at every length:
  // three tie levels up to n = 5, two tie levels all the way to n = 8.
  const Sweep sweeps[] = {{{0.25, 0.5, 0.75}, 5}, {{0.3, 0.7}, 8}};
  long checked = 0;
  for (const Sweep& sweep : sweeps) {
    int base = static_cast<int>(sweep.alphabet.size());
    for (int n = 1; n <= sweep.max_n; ++n) {
      std::vector<int> digit(n, 0);
      while (true) {
        std::vector<double> scores(n);
        for (int i = 0; i < n; ++i) scores[i] = sweep.alphabet[digit[i]];
        for (unsigned mask = 0; mask < (1u << n); ++mask) {
          std::vector<int> labels(n);
          for (int i = 0; i < n; ++i) labels[i] = (mask >> i) & 1;
          auto expected = ap_reference(scores, labels);
          auto got = average_precision(scores, labels);
          ASSERT_EQ(got.has_value(), expected.has_value());
          if (expected) ASSERT_EQ(*got, *expected);
          ++checked;
        }
        int pos = 0;
        while (pos < n && ++digit[pos] == base) digit[pos++] = 0;
        if (pos == n) break;
      }
    }
  }
  EXPECT_EQ(checked, 9330 + 87380);  // sum of (levels*2)^n over both sweeps
}

TEST(AveragePrecision, MatchesBruteForceOnRandomTieHeavyInstances) {
  std::mt19937 rng(160462);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::bernoulli_distribution positive(0.4);
  for (int iter = 0; iter < 10000; ++iter) {
    int n = 1 + static_cast<int>(rng() % 12);
    // Scores drawn from a 4-value pool so ties are the norm, not the
    // exception.
    double pool[4] = {unit(rng), unit(rng), unit(rng), unit(rng)};
    std::vector<double> scores;
    std::vector<int> labels;
    for (int i = 0; i < n; ++i) {
      scores.push_back(pool[rng() % 4]);
      labels.push_back(positive(rng) ? 1 : 0);
    }
    auto expected = ap_reference(scores, labels);
    auto got = average_precision(scores, labels);
    ASSERT_EQ(got.has_value(), expected.has_value()) << "iteration " << iter;
    if (expected) ASSERT_EQ(*got, *expected) << "iteration " << iter;
  }
}

TEST(MeanAP, SkipsClassesWithoutPositives) {
  std::map<std::string, ClassRanking> classes;
  classes["boarding an airplane"] = {{0.9, 0.1}, {1, 0}};
  classes["riding a bus"] = {{0.9, 0.8, 0.7}, {0, 1, 1}};
  classes["sailing a boat"] = {{0.4, 0.6}, {0, 0}};
  MetricReport report = mean_average_precision(classes);
  EXPECT_EQ(report.classes_scored, 2);
  EXPECT_EQ(report.skipped_classes, std::vector<std::string>{"sailing a boat"});
  ASSERT_EQ(report.per_class_ap.size(), 2u);
  EXPECT_EQ(report.per_class_ap.at("boarding an airplane"), 1.0);
  double bus = (1.0 / 2.0 + 2.0 / 3.0) / 2.0;
  EXPECT_DOUBLE_EQ(report.per_class_ap.at("riding a bus"), bus);
  EXPECT_DOUBLE_EQ(report.map, (1.0 + bus) / 2.0);

  MetricReport empty = mean_average_precision({});
  EXPECT_EQ(empty.map, 0.0);
  EXPECT_EQ(empty.classes_scored, 0);
}

TEST(TopOne, ArgmaxBreaksTiesTowardTheSmallestName) {
  std::map<std::string, std::map<std::string, double>> predictions{
      {"img1", {{"riding a bus", 0.7}, {"boarding an airplane", 0.7}}},
      {"img2", {{"riding a bus", 0.2}, {"boarding an airplane", 0.9}}},
  };
  auto choices = argmax_choices(predictions);
  EXPECT_EQ(choices.at("img1"), "boarding an airplane");
  EXPECT_EQ(choices.at("img2"), "boarding an airplane");

  predictions["img3"] = {};
  EXPECT_THROW(argmax_choices(predictions), InputError);
}

TEST(TopOne, AccuracyCountsExactMatches) {
  std::map<std::string, std::string> truth{
      {"img1", "boarding an airplane"}, {"img2", "riding a bus"}, {"img3", "sailing a boat"}};
  std::map<std::string, std::string> predictions{
      {"img1", "boarding an airplane"}, {"img2", "boarding an airplane"},
      {"img3", "sailing a boat"}};
  EXPECT_DOUBLE_EQ(top1_accuracy(predictions, truth), 2.0 / 3.0);

  std::map<std::string, std::string> incomplete{{"img1", "boarding an airplane"}};
  EXPECT_THROW(top1_accuracy(incomplete, truth), InputError);
  std::map<std::string, std::string> renamed{
      {"img1", "x"}, {"img2", "x"}, {"img9", "x"}};
  EXPECT_THROW(top1_accuracy(renamed, truth), InputError);
  EXPECT_THROW(top1_accuracy({}, {}), InputError);
}
