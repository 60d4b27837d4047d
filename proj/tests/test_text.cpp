#include "symbolact/text.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace symbolact;

TEST(Canonicalize, StripsCaseSpacingArticlesAndPunct) {
  EXPECT_EQ(canonicalize_symbol_text("Hold a boarding pass."), "hold a boarding pass");
  EXPECT_EQ(canonicalize_symbol_text("  The   Person is   WALKING!  "), "person is walking");
  EXPECT_EQ(canonicalize_symbol_text("a an the hold"), "hold");
  EXPECT_EQ(canonicalize_symbol_text("grip a luggage handle"), "grip a luggage handle");
  EXPECT_EQ(canonicalize_symbol_text("adjust seatbelt..."), "adjust seatbelt");
  EXPECT_EQ(canonicalize_symbol_text("wave, goodbye,"), "wave, goodbye");
}

TEST(Canonicalize, InnerArticlesSurvive) {
  EXPECT_EQ(canonicalize_symbol_text("The person holds the handle"), "person holds the handle");
}

TEST(Canonicalize, TrailingPunctOnlyWordsDrop) {
  EXPECT_EQ(canonicalize_symbol_text("hold . ?!"), "hold");
}

TEST(Canonicalize, EmptyIsAnError) {
  EXPECT_THROW(canonicalize_symbol_text(""), InputError);
  EXPECT_THROW(canonicalize_symbol_text("  . "), InputError);
  EXPECT_THROW(canonicalize_symbol_text("the a an"), InputError);
}

TEST(Canonicalize, Idempotent) {
  std::mt19937 rng(7);
  const std::string corpus[] = {
      "Hold a boarding pass.",  "THE Person   is walking",  "an apple, on a table!",
      "hip seated in a boat",   "place luggage; quickly:",  "a",
      "the overhead bin",       "wave goodbye to loved ones??",
  };
  for (const auto& raw : corpus) {
    std::string once;
    try {
      once = canonicalize_symbol_text(raw);
    } catch (const InputError&) {
      continue;
    }
    EXPECT_EQ(canonicalize_symbol_text(once), once) << raw;
  }
  // Random word soup: canonicalization must be a fixpoint on its own output.
  const char* words[] = {"the", "a",    "an",   "Hold", "PASS", "walk.",
                         "to",  "gate", "bin,", "arm",  "luggage"};
  std::uniform_int_distribution<size_t> pick(0, std::size(words) - 1);
  std::uniform_int_distribution<int> len(1, 6);
  for (int i = 0; i < 500; ++i) {
    std::string raw;
    int n = len(rng);
    for (int k = 0; k < n; ++k) raw += std::string(words[pick(rng)]) + " ";
    try {
      std::string once = canonicalize_symbol_text(raw);
      EXPECT_EQ(canonicalize_symbol_text(once), once) << raw;
    } catch (const InputError&) {
      // all-article / all-punct soups legitimately fail
    }
  }
}

TEST(TextHelpers, Basics) {
  EXPECT_EQ(to_lower("AbC"), "abc");
  EXPECT_EQ(trim("  x \n"), "x");
  EXPECT_EQ(trim("   "), "");
  EXPECT_EQ(indefinite_article("airplane"), "an");
  EXPECT_EQ(indefinite_article("bicycle"), "a");
  EXPECT_EQ(indefinite_article("orange"), "an");
  EXPECT_EQ(capitalize_first("hold it"), "Hold it");
  EXPECT_TRUE(starts_with_ci("Hands holding", "hands "));
  EXPECT_FALSE(starts_with_ci("hand", "hands"));
  EXPECT_EQ(replace_all("a-b-a", "a", "xy"), "xy-b-xy");
  EXPECT_EQ(join_words({"a", "b", "c"}, 1), "b c");
}

TEST(TextHelpers, SplitWords) {
  std::vector<std::string> w = split_words("  hold\t a\npass ");
  ASSERT_EQ(w.size(), 3u);
  EXPECT_EQ(w[0], "hold");
  EXPECT_EQ(w[2], "pass");
  EXPECT_TRUE(split_words("   ").empty());
}
