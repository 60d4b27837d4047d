#include "symbolact/morphology.hpp"

#include <gtest/gtest.h>

using namespace symbolact;

TEST(Gerund, SpellingRules) {
  EXPECT_EQ(morph::gerund("hold"), "holding");
  EXPECT_EQ(morph::gerund("place"), "placing");   // drop final e
  EXPECT_EQ(morph::gerund("grip"), "gripping");   // consonant doubling
  EXPECT_EQ(morph::gerund("scan"), "scanning");
  EXPECT_EQ(morph::gerund("sit"), "sitting");
  EXPECT_EQ(morph::gerund("wave"), "waving");
  EXPECT_EQ(morph::gerund("carry"), "carrying");  // y is never doubled
  EXPECT_EQ(morph::gerund("draw"), "drawing");    // w is never doubled
  EXPECT_EQ(morph::gerund("fix"), "fixing");      // x is never doubled
  EXPECT_EQ(morph::gerund("load"), "loading");    // vowel pair blocks doubling
  EXPECT_EQ(morph::gerund("open"), "opening");    // exception table
  EXPECT_EQ(morph::gerund("repair"), "repairing");
  EXPECT_EQ(morph::gerund("operate"), "operating");
  EXPECT_EQ(morph::gerund("see"), "seeing");      // final -ee keeps its e
}

TEST(Gerund, RoundTripOverLexicon) {
  for (const auto& base : morph::verb_lexicon())
    EXPECT_EQ(morph::base_from_gerund(morph::gerund(base)), base) << base;
}

TEST(Gerund, BaseFromGerundFallbacks) {
  EXPECT_EQ(morph::base_from_gerund("holding"), "hold");
  EXPECT_EQ(morph::base_from_gerund("placing"), "place");
  EXPECT_EQ(morph::base_from_gerund("gripping"), "grip");
  EXPECT_EQ(morph::base_from_gerund("opening"), "open");
  // Unknown words survive untouched; short or non-ing words pass through.
  EXPECT_EQ(morph::base_from_gerund("ring"), "ring");
  EXPECT_EQ(morph::base_from_gerund("pass"), "pass");
  // Unknown -ing words rebase through the spelling rules alone.
  EXPECT_EQ(morph::base_from_gerund("jumping"), "jump");
}

TEST(Gerund, KnownGerundDetection) {
  EXPECT_TRUE(morph::is_known_gerund("holding"));
  EXPECT_TRUE(morph::is_known_gerund("checking"));
  EXPECT_FALSE(morph::is_known_gerund("ring"));
  EXPECT_FALSE(morph::is_known_gerund("pass"));
}

TEST(SentenceFor, PersonClausePassesThrough) {
  EXPECT_EQ(sentence_for("The person is holding a boarding pass."),
            "The person is holding a boarding pass.");
  EXPECT_EQ(sentence_for("person is boarding an airplane"),
            "The person is boarding an airplane.");
}

TEST(SentenceFor, BodyPartSubjects) {
  EXPECT_EQ(sentence_for("hip seated in a boat"), "The person's hip is seated in a boat.");
  EXPECT_EQ(sentence_for("hands grip the wheel"), "The person's hands are gripping the wheel.");
  EXPECT_EQ(sentence_for("arm is raised"), "The person's arm is raised.");
  EXPECT_EQ(sentence_for("feet"), "The person's feet are visible.");
}

TEST(SentenceFor, BaseVerbLead) {
  EXPECT_EQ(sentence_for("hold a boarding pass"), "The person is holding a boarding pass.");
  EXPECT_EQ(sentence_for("walk towards the boarding gate"),
            "The person is walking towards the boarding gate.");
  EXPECT_EQ(sentence_for("grip a luggage handle"), "The person is gripping a luggage handle.");
}

TEST(SentenceFor, ExistingClauseAndGerundInsertion) {
  EXPECT_EQ(sentence_for("luggage is visible beside him"), "The luggage is visible beside him.");
  EXPECT_EQ(sentence_for("airline staff checking documents"),
            "The airline staff is checking documents.");
}

TEST(SentenceFor, Fallbacks) {
  EXPECT_EQ(sentence_for("umbrella"), "The umbrella is visible.");
  EXPECT_EQ(sentence_for("kettle boiling water"), "The kettle is boiling water.");
  // Second word a known base verb: gerundize it.
  EXPECT_EQ(sentence_for("staff check tickets"), "The staff is checking tickets.");
}

TEST(MintSymbolText, StripsScaffoldingAndRebasesGerunds) {
  EXPECT_EQ(mint_symbol_text("The person is walking towards the boarding gate"),
            "walk towards the boarding gate");
  EXPECT_EQ(mint_symbol_text("[The person is holding a boarding pass]"),
            "hold a boarding pass");
  EXPECT_EQ(mint_symbol_text("Hands gripping a luggage handle."), "grip a luggage handle");
  EXPECT_EQ(mint_symbol_text("\"placing luggage in overhead compartment\""),
            "place luggage in overhead compartment");
  // A clause with its own is/are keeps its shape.
  EXPECT_EQ(mint_symbol_text("The luggage is visible beside him"),
            "luggage is visible beside him");
  EXPECT_EQ(mint_symbol_text("adjust seatbelt"), "adjust seatbelt");
}

TEST(MintSymbolText, RoundTripsThroughSentenceFor) {
  const char* symbols[] = {
      "hold a boarding pass",
      "walk towards the boarding gate",
      "place luggage in overhead compartment",
      "adjust seatbelt",
      "wave goodbye to loved ones",
      "grip a luggage handle",
      "check in at the gate counter",
      "load a carry-on bag into the bin",
      "hand an id card to the agent",
      "scan the boarding pass at the reader",
  };
  for (const auto* s : symbols) EXPECT_EQ(mint_symbol_text(sentence_for(s)), s) << s;
}
