#pragma once

// A conversation whose entailment means sit at 0.5 forever while every
// extension echoes the root symbol back: the loop must finish with zero
// rules and every seeded symbol pruned as an orphan.

#include <string>
#include <vector>

#include "symbolact/instantiate.hpp"
#include "symbolact/oracle.hpp"

namespace flatline {

using namespace symbolact;

inline ActivitySpec spec() { return {"waiting in line", std::nullopt}; }

inline const std::vector<std::string>& symbol_texts() {
  static const std::vector<std::string> texts = {
      "hold a phone", "carry a bag", "hold a ticket", "touch a railing", "hold a coffee cup",
  };
  return texts;
}

inline ScriptedBackend backend() {
  ActivitySpec act = spec();
  ScriptedBackend b;
  b.add(PromptKind::kSymbolInit, render_symbol_init(act.activity, act.object, 5), 0,
        "1. holding a phone. 2. carrying a bag. 3. holding a ticket. 4. touching a railing. "
        "5. holding a coffee cup.");
  for (const std::string& text : symbol_texts()) {
    std::string sentence = sentence_for(text);
    std::string check = render_entailment({sentence}, act.activity, act.object);
    for (int s = 0; s < 5; ++s) b.add(PromptKind::kEntailmentCheck, check, s, "(b) 0.5");
    std::string extend = render_rule_extension({sentence}, act.activity, act.object);
    std::string echo = "[condition] is: [" + sentence + "]";
    for (int s : {0, 1, detail::kAttemptStride, detail::kAttemptStride + 1})
      b.add(PromptKind::kRuleExtension, extend, s, echo);
  }
  return b;
}

// 1 seeding query, then 5 symbols x 2 branches x (5 draws + 2 echoes).
constexpr long kTotalQueries = 71;

}  // namespace flatline
