#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "symbolact/errors.hpp"
#include "symbolact/morphology.hpp"
#include "symbolact/oracle.hpp"
#include "symbolact/prompts.hpp"
#include "symbolact/system.hpp"
#include "symbolact/system_io.hpp"

namespace symbolact {

struct ScorePair {
  double yes = 0.0;
  double no = 0.0;
};

// Two-way softmax over raw yes/no scores, max-shifted for stability.
inline double normalize_yes_no(ScorePair pair) {
  if (!std::isfinite(pair.yes) || !std::isfinite(pair.no))
    throw InputError("yes/no scores must be finite");
  double m = std::max(pair.yes, pair.no);
  double ey = std::exp(pair.yes - m);
  double en = std::exp(pair.no - m);
  return ey / (ey + en);
}

// Declarative sentence plus the yes/no question mark-up the scorer answers.
inline std::string statement_of(const std::string& symbol_text) {
  return render_yes_no(sentence_for(canonicalize_symbol_text(symbol_text)));
}

enum class ProbabilitySource { kSingle, kVariantMean };

struct SymbolProbability {
  SymbolId id = -1;
  std::string text;
  double value = 0.0;
  ProbabilitySource source = ProbabilitySource::kSingle;
  bool uncertain = false;
  bool dropped = false;  // uncertain under a drop policy
  bool pruned = false;   // assigned the tree threshold without a backend call
  std::optional<double> variant_std;
};

struct VariantSet {
  SymbolId symbol_id = -1;
  std::vector<std::string> statements;
  std::vector<double> probabilities;
};

inline double mean_of(const std::vector<double>& values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

inline double population_std(const std::vector<double>& values) {
  double m = mean_of(values);
  double acc = 0.0;
  for (double v : values) acc += (v - m) * (v - m);
  return std::sqrt(acc / static_cast<double>(values.size()));
}

// Variance-over-paraphrases filter: the symbol keeps the variant mean and is
// flagged uncertain when the population std reaches the threshold.
inline SymbolProbability check_symbol(const VariantSet& variants, double std_threshold = 0.05) {
  if (variants.probabilities.size() < 2)
    throw InputError("checker needs at least two variant probabilities");
  if (variants.statements.size() != variants.probabilities.size())
    throw InputError("variant statements and probabilities must align");
  SymbolProbability p;
  p.id = variants.symbol_id;
  p.value = mean_of(variants.probabilities);
  p.source = ProbabilitySource::kVariantMean;
  p.variant_std = population_std(variants.probabilities);
  p.uncertain = *p.variant_std >= std_threshold;
  return p;
}

// Deterministic paraphrases: the base sentence plus prefixed restatements.
inline std::vector<std::string> paraphrase_variants(const std::string& base_sentence, int k = 5) {
  static const char* kPrefixes[] = {"In the picture, ",      "It appears that ",
                                    "The image shows that ", "In this scene, ",
                                    "From what is visible, ", "Judging by the scene, "};
  constexpr int kMax = 1 + static_cast<int>(std::size(kPrefixes));
  if (k < 2 || k > kMax)
    throw InputError("variant count must lie in [2, " + std::to_string(kMax) + "]");
  std::string body = trim(base_sentence);
  if (body.empty()) throw InputError("paraphrase base must be non-empty");
  std::vector<std::string> out = {body};
  std::string lowered = body;
  lowered[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(lowered[0])));
  for (int i = 1; i < k; ++i) out.push_back(kPrefixes[i - 1] + lowered);
  return out;
}

enum class UncertainPolicy { kNeutral, kDropPremise, kDropRule };

inline const char* policy_name(UncertainPolicy p) {
  switch (p) {
    case UncertainPolicy::kNeutral: return "neutral";
    case UncertainPolicy::kDropPremise: return "drop-premise";
    case UncertainPolicy::kDropRule: return "drop-rule";
  }
  return "unknown";
}

inline UncertainPolicy policy_from_name(const std::string& name) {
  if (name == "neutral") return UncertainPolicy::kNeutral;
  if (name == "drop-premise") return UncertainPolicy::kDropPremise;
  if (name == "drop-rule") return UncertainPolicy::kDropRule;
  throw InputError("unknown uncertain-symbol policy: " + name);
}

// Scores one statement about one image. `key` is the cache/table identity:
// the canonical symbol text for base statements, the full variant sentence
// for paraphrases, the father text for tree nodes.
class ScoringBackend {
 public:
  ScoringBackend() = default;
  ScoringBackend(ScoringBackend&& other) noexcept
      : calls_(other.calls_.load(std::memory_order_relaxed)) {}
  ScoringBackend& operator=(ScoringBackend&& other) noexcept {
    calls_.store(other.calls_.load(std::memory_order_relaxed), std::memory_order_relaxed);
    return *this;
  }
  virtual ~ScoringBackend() = default;

  double score(const std::string& image, const std::string& key, const std::string& statement) {
    calls_.fetch_add(1, std::memory_order_relaxed);
    return do_score(image, key, statement);
  }

  std::uint64_t calls() const { return calls_.load(std::memory_order_relaxed); }

 private:
  virtual double do_score(const std::string& image, const std::string& key,
                          const std::string& statement) = 0;
  std::atomic<std::uint64_t> calls_{0};
};

// One scored statement: either a raw yes/no pair (normalized through the
// softmax on use) or a direct probability.
struct ScoreEntry {
  bool direct = false;
  double p = 0.0;
  ScorePair pair;
};

inline ScoreEntry parse_score_entry(const nlohmann::json& v, const std::string& origin) {
  ScoreEntry e;
  if (v.is_object() && v.contains("p")) {
    e.direct = true;
    e.p = v.at("p").get<double>();
    if (!(e.p > 0.0 && e.p < 1.0))
      throw FormatError(origin + ": direct probability must lie strictly in (0, 1)");
  } else if (v.is_object() && v.contains("yes") && v.contains("no")) {
    e.pair = ScorePair{v.at("yes").get<double>(), v.at("no").get<double>()};
    if (!std::isfinite(e.pair.yes) || !std::isfinite(e.pair.no))
      throw FormatError(origin + ": yes/no scores must be finite");
  } else {
    throw FormatError(origin + ": score record needs either {\"yes\",\"no\"} or {\"p\"}");
  }
  return e;
}

inline ordered_json score_entry_to_json(const ScoreEntry& e) {
  if (e.direct) return ordered_json{{"p", e.p}};
  return ordered_json{{"yes", e.pair.yes}, {"no", e.pair.no}};
}

inline double resolve_score_entry(const ScoreEntry& e) {
  return e.direct ? e.p : normalize_yes_no(e.pair);
}

// Frozen probability table keyed by image and statement identity.
class TableBackend : public ScoringBackend {
 public:
  using Entry = ScoreEntry;

  static TableBackend from_json(const nlohmann::json& j, const std::string& origin = "table") {
    if (!j.is_object()) throw FormatError(origin + ": table must be an object of images");
    TableBackend backend;
    for (auto img = j.begin(); img != j.end(); ++img) {
      if (!img.value().is_object())
        throw FormatError(origin + ": image '" + img.key() + "' must map keys to records");
      for (auto rec = img.value().begin(); rec != img.value().end(); ++rec)
        backend.table_[img.key()][rec.key()] =
            parse_score_entry(rec.value(), origin + ": image '" + img.key() + "', key '" +
                                               rec.key() + "'");
    }
    return backend;
  }

  static TableBackend from_file(const std::string& path) {
    return from_json(parse_json(read_file(path), path), path);
  }

  void set(const std::string& image, const std::string& key, ScorePair pair) {
    table_[image][key] = Entry{false, 0.0, pair};
  }

  void set_direct(const std::string& image, const std::string& key, double p) {
    if (!(p > 0.0 && p < 1.0))
      throw InputError("direct probability must lie strictly in (0, 1)");
    table_[image][key] = Entry{true, p, {}};
  }

  bool covers(const std::string& image, const std::string& key) const {
    auto it = table_.find(image);
    return it != table_.end() && it->second.count(key) > 0;
  }

  std::vector<std::string> images() const {
    std::vector<std::string> out;
    out.reserve(table_.size());
    for (const auto& [image, scores] : table_) out.push_back(image);
    return out;
  }

 private:
  double do_score(const std::string& image, const std::string& key,
                  const std::string& /*statement*/) override {
    auto img = table_.find(image);
    if (img == table_.end()) throw CoverageError("no scores recorded for image '" + image + "'");
    auto rec = img->second.find(key);
    if (rec == img->second.end())
      throw CoverageError("image '" + image + "' has no score for '" + key + "'");
    return resolve_score_entry(rec->second);
  }

  std::map<std::string, std::map<std::string, Entry>> table_;
};

// Statement scorer riding on the language oracle: asks the yes/no question
// with the image named in the prompt and maps the categorical answer to a
// saturated score pair.
class OracleStatementBackend : public ScoringBackend {
 public:
  explicit OracleStatementBackend(OracleBackend& oracle, double temperature = 0.0,
                                  std::string model = "gpt-4")
      : oracle_(oracle), temperature_(temperature), model_(std::move(model)) {}

 private:
  double do_score(const std::string& image, const std::string& /*key*/,
                  const std::string& statement) override {
    std::string prompt = "Image: " + image + ". " + render_yes_no(statement);
    OracleRequest req{PromptKind::kYesNoStatement, prompt, 0, temperature_, model_};
    bool yes = parse_yes_no(oracle_.complete(req));
    return normalize_yes_no(yes ? ScorePair{1.0, 0.0} : ScorePair{0.0, 1.0});
  }

  OracleBackend& oracle_;
  double temperature_;
  std::string model_;
};

struct GroundingOptions {
  bool checker = false;
  int variant_count = 5;
  double std_threshold = 0.05;
  UncertainPolicy policy = UncertainPolicy::kNeutral;
};

// One image's grounding pass. The cache holds pre-policy scores keyed by
// canonical text, so a symbol shared across activities costs one evaluation.
class GroundingSession {
 public:
  GroundingSession(std::string image, ScoringBackend& backend, GroundingOptions opts = {})
      : image_(std::move(image)), backend_(backend), opts_(opts) {}

  const std::string& image() const { return image_; }
  const GroundingOptions& options() const { return opts_; }
  ScoringBackend& backend() { return backend_; }

  SymbolProbability score_symbol(SymbolId id, const std::string& text) {
    auto it = cache_.find(text);
    if (it != cache_.end()) {
      SymbolProbability p = it->second;
      p.id = id;
      return p;
    }
    SymbolProbability p;
    std::string sentence = sentence_for(text);
    if (!opts_.checker) {
      p.id = id;
      p.text = text;
      p.value = backend_.score(image_, text, sentence);
      p.source = ProbabilitySource::kSingle;
    } else {
      VariantSet v;
      v.symbol_id = id;
      v.statements = paraphrase_variants(sentence, opts_.variant_count);
      for (size_t i = 0; i < v.statements.size(); ++i) {
        const std::string& key = i == 0 ? text : v.statements[i];
        v.probabilities.push_back(backend_.score(image_, key, v.statements[i]));
      }
      p = check_symbol(v, opts_.std_threshold);
      p.id = id;
      p.text = text;
    }
    cache_.emplace(text, p);
    return p;
  }

  // Tree pruning assigns the threshold without consulting the backend; an
  // already-scored symbol keeps its real value.
  void assign_pruned(const std::string& text, double theta) {
    if (cache_.count(text)) return;
    SymbolProbability p;
    p.text = text;
    p.value = theta;
    p.pruned = true;
    cache_.emplace(text, p);
  }

  size_t cached() const { return cache_.size(); }

 private:
  std::string image_;
  ScoringBackend& backend_;
  GroundingOptions opts_;
  std::map<std::string, SymbolProbability> cache_;
};

struct GroundingResult {
  std::map<SymbolId, SymbolProbability> probabilities;
  std::vector<SymbolId> dropped;  // drop-rule casualties, for rule exclusion
};

inline GroundingResult ground_symbols(GroundingSession& session, const SubSystem& sub) {
  GroundingResult out;
  for (const auto& [id, s] : sub.system.symbols()) {
    if (id == sub.conclusion_id) continue;
    SymbolProbability p = session.score_symbol(id, s.text);
    if (p.uncertain) {
      switch (session.options().policy) {
        case UncertainPolicy::kNeutral:
          p.value = 0.5;
          break;
        case UncertainPolicy::kDropPremise:
          p.value = 1.0;  // identity of min: the premise stops constraining
          p.dropped = true;
          break;
        case UncertainPolicy::kDropRule:
          p.dropped = true;
          out.dropped.push_back(id);
          break;
      }
    }
    out.probabilities.emplace(id, std::move(p));
  }
  return out;
}

struct SymbolTree {
  struct Father {
    std::string text;
    std::vector<std::string> sons;
  };
  double theta = 0.1;
  std::vector<Father> fathers;
};

inline SymbolTree parse_tree(const nlohmann::json& j, const std::string& origin = "tree") {
  SymbolTree tree;
  if (!j.is_object() || !j.contains("theta") || !j.contains("fathers"))
    throw FormatError(origin + ": tree file needs {\"theta\", \"fathers\"}");
  tree.theta = j.at("theta").get<double>();
  if (!(tree.theta > 0.0 && tree.theta < 1.0))
    throw FormatError(origin + ": theta must lie strictly in (0, 1)");
  std::set<std::string> seen_sons;
  for (const auto& f : j.at("fathers")) {
    SymbolTree::Father father;
    father.text = canonicalize_symbol_text(f.at("text").get<std::string>());
    for (const auto& s : f.at("sons")) {
      std::string son = canonicalize_symbol_text(s.get<std::string>());
      if (!seen_sons.insert(son).second)
        throw FormatError(origin + ": son '" + son + "' appears under two fathers");
      father.sons.push_back(std::move(son));
    }
    tree.fathers.push_back(std::move(father));
  }
  return tree;
}

inline SymbolTree read_tree_file(const std::string& path) {
  return parse_tree(parse_json(read_file(path), path), path);
}

inline ordered_json serialize_tree(const SymbolTree& tree) {
  ordered_json j;
  j["theta"] = tree.theta;
  j["fathers"] = ordered_json::array();
  for (const auto& f : tree.fathers)
    j["fathers"].push_back({{"text", f.text}, {"sons", f.sons}});
  return j;
}

struct PruningResult {
  GroundingResult grounding;
  std::uint64_t realized_calls = 0;
  std::vector<std::string> pruned_fathers;
};

// Hierarchical pass: fathers are scored first and a father falling below
// theta stamps every son with exactly theta, saving their backend calls.
inline PruningResult ground_with_pruning(GroundingSession& session, const SubSystem& sub,
                                         const SymbolTree& tree) {
  for (const auto& f : tree.fathers)
    for (const auto& son : f.sons)
      if (!sub.system.find_text(son))
        throw InputError("tree leaf '" + son + "' is not a symbol of the subsystem");

  PruningResult out;
  std::uint64_t before = session.backend().calls();
  for (const auto& f : tree.fathers) {
    SymbolProbability fp = session.score_symbol(-1, f.text);
    if (fp.value < tree.theta) {
      for (const auto& son : f.sons) session.assign_pruned(son, tree.theta);
      out.pruned_fathers.push_back(f.text);
    }
  }
  out.grounding = ground_symbols(session, sub);
  out.realized_calls = session.backend().calls() - before;
  return out;
}

// Pool variant: one tree spanning the union vocabulary of several
// subsystems, grounded through a shared session so cross-activity reuse and
// pruning combine. Realized calls cover the whole pass, fathers included.
inline PruningResult ground_pool_with_pruning(GroundingSession& session,
                                              const std::vector<SubSystem>& subs,
                                              const SymbolTree& tree) {
  for (const auto& f : tree.fathers)
    for (const auto& son : f.sons) {
      bool found = false;
      for (const auto& sub : subs)
        if (sub.system.find_text(son)) {
          found = true;
          break;
        }
      if (!found) throw InputError("tree leaf '" + son + "' is not a symbol of any subsystem");
    }

  PruningResult out;
  std::uint64_t before = session.backend().calls();
  for (const auto& f : tree.fathers) {
    SymbolProbability fp = session.score_symbol(-1, f.text);
    if (fp.value < tree.theta) {
      for (const auto& son : f.sons) session.assign_pruned(son, tree.theta);
      out.pruned_fathers.push_back(f.text);
    }
  }
  for (const auto& sub : subs) {
    GroundingResult part = ground_symbols(session, sub);
    for (auto& [id, p] : part.probabilities) out.grounding.probabilities[id] = std::move(p);
    out.grounding.dropped.insert(out.grounding.dropped.end(), part.dropped.begin(),
                                 part.dropped.end());
  }
  std::sort(out.grounding.dropped.begin(), out.grounding.dropped.end());
  out.grounding.dropped.erase(
      std::unique(out.grounding.dropped.begin(), out.grounding.dropped.end()),
      out.grounding.dropped.end());
  out.realized_calls = session.backend().calls() - before;
  return out;
}

// Grounding file: image → canonical text → probability. Symbols dropped by
// the drop-rule policy are omitted entirely.
inline ordered_json grounding_to_json(const std::string& image, const GroundingResult& result,
                                      UncertainPolicy policy) {
  ordered_json per_image = ordered_json::object();
  for (const auto& [id, p] : result.probabilities) {
    if (policy == UncertainPolicy::kDropRule && p.dropped) continue;
    per_image[p.text] = p.value;
  }
  ordered_json j;
  j[image] = std::move(per_image);
  return j;
}

using GroundingFile = std::map<std::string, std::map<std::string, double>>;

inline GroundingFile parse_grounding(const nlohmann::json& j,
                                     const std::string& origin = "grounding") {
  if (!j.is_object()) throw FormatError(origin + ": grounding must map images to symbol scores");
  GroundingFile out;
  for (auto img = j.begin(); img != j.end(); ++img) {
    if (!img.value().is_object())
      throw FormatError(origin + ": image '" + img.key() + "' must map texts to numbers");
    for (auto rec = img.value().begin(); rec != img.value().end(); ++rec) {
      if (!rec.value().is_number())
        throw FormatError(origin + ": score for '" + rec.key() + "' must be a number");
      out[img.key()][rec.key()] = rec.value().get<double>();
    }
  }
  return out;
}

inline GroundingFile read_grounding_file(const std::string& path) {
  return parse_grounding(parse_json(read_file(path), path), path);
}

inline ordered_json serialize_grounding(const GroundingFile& grounding) {
  ordered_json j = ordered_json::object();
  for (const auto& [image, scores] : grounding) {
    ordered_json per_image = ordered_json::object();
    for (const auto& [text, value] : scores) per_image[text] = value;
    j[image] = std::move(per_image);
  }
  return j;
}

}  // namespace symbolact
