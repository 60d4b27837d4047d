// symbolact: build, ground, and evaluate activity-reasoning rule systems
// from the command line. Every subcommand is a thin shell over the library;
// all real behavior lives in the headers where the tests can reach it.

#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "symbolact/analysis.hpp"
#include "symbolact/grounding.hpp"
#include "symbolact/inference.hpp"
#include "symbolact/instantiate.hpp"
#include "symbolact/metrics.hpp"
#include "symbolact/oracle.hpp"
#include "symbolact/system_io.hpp"

namespace {

using namespace symbolact;

// Conclusion texts carry the "person is <activity>" frame (canonicalization
// already dropped the article); peel it back off so reports can talk about
// the activity itself.
std::string activity_from_conclusion(const std::string& conclusion_text) {
  for (const std::string prefix : {"person is ", "the person is "})
    if (conclusion_text.rfind(prefix, 0) == 0) return conclusion_text.substr(prefix.size());
  return conclusion_text;
}

std::vector<std::string> system_activities(const SymbolicSystem& system) {
  std::vector<std::string> out;
  for (const Symbol* c : system.conclusions()) out.push_back(activity_from_conclusion(c->text));
  return out;
}

struct InstantiateArgs {
  std::string activities_path;
  std::string backend = "scripted";
  std::string config_path;
  std::string out_path;
  std::string ledger_path;
  std::string record_path;
  std::string table_path;
  std::string url;
};

int run_instantiate(const InstantiateArgs& args) {
  LoopConfig cfg;
  if (!args.config_path.empty()) cfg = load_loop_config(args.config_path);
  std::vector<ActivitySpec> specs = read_activities_file(args.activities_path);

  std::unique_ptr<OracleBackend> inner;
  if (args.backend == "scripted") {
    if (args.table_path.empty())
      throw InputError("--backend scripted needs --table <responses.jsonl>");
    inner = std::make_unique<ScriptedBackend>(ScriptedBackend::from_file(args.table_path));
  } else if (args.backend == "replay") {
    if (args.record_path.empty())
      throw InputError("--backend replay needs --record <cache.jsonl> to replay from");
    inner = std::make_unique<ReplayBackend>(ReplayBackend::from_file(args.record_path));
  } else if (args.backend == "http") {
    HttpBackendConfig http;
    http.url = args.url;
    inner = std::make_unique<HttpBackend>(http);
  } else {
    throw InputError("unknown backend '" + args.backend + "'");
  }

  ReplayCache cache;
  std::unique_ptr<OracleBackend> recorder;
  OracleBackend* backend = inner.get();
  if (!args.record_path.empty() && args.backend != "replay") {
    cache = ReplayCache::load(args.record_path, /*must_exist=*/false);
    cache.attach_file(args.record_path);
    recorder = std::make_unique<RecordingBackend>(*inner, cache);
    backend = recorder.get();
  }

  InstantiationResult result = instantiate_system(*backend, cfg, specs);
  write_system_file(args.out_path, result.system);
  if (!args.ledger_path.empty())
    write_instantiation_report(args.ledger_path, result, cfg, backend->calls());

  CostLedger total = result.total_ledger();
  std::cout << "instantiated " << result.stats.size() << "/" << specs.size() << " activities: "
            << result.system.symbols().size() << " symbols, " << result.system.rules().size()
            << " rules, " << total.total() << " oracle queries\n";
  for (const auto& f : result.failures)
    std::cerr << "failed: " << f.activity << ": " << f.error << "\n";
  return result.stats.empty() && !specs.empty() ? 1 : 0;
}

struct GroundArgs {
  std::string system_path;
  std::string images_path;
  std::string tree_path = "none";
  std::string checker = "off";
  std::string policy = "neutral";
  std::string out_path;
};

int run_ground(const GroundArgs& args) {
  SymbolicSystem system = read_system_file(args.system_path);
  TableBackend backend = TableBackend::from_file(args.images_path);

  std::vector<SubSystem> subs;
  for (const Symbol* c : system.conclusions()) subs.push_back(decompose(system, c->text));
  if (subs.empty()) throw InputError("system has no conclusions to ground");

  std::optional<SymbolTree> tree;
  if (args.tree_path != "none") tree = read_tree_file(args.tree_path);

  GroundingOptions opts;
  opts.checker = args.checker == "on";
  opts.policy = policy_from_name(args.policy);

  ordered_json out = ordered_json::object();
  for (const auto& image : backend.images()) {
    GroundingSession session(image, backend, opts);
    GroundingResult result;
    if (tree) {
      result = ground_pool_with_pruning(session, subs, *tree).grounding;
    } else {
      for (const auto& sub : subs) {
        GroundingResult part = ground_symbols(session, sub);
        for (auto& [id, p] : part.probabilities) result.probabilities[id] = std::move(p);
        result.dropped.insert(result.dropped.end(), part.dropped.begin(), part.dropped.end());
      }
    }
    out[image] = grounding_to_json(image, result, opts.policy)[image];
  }
  write_file(args.out_path, out.dump(2) + "\n");
  std::cout << "grounded " << backend.images().size() << " images over " << subs.size()
            << " activities\n";
  return 0;
}

struct InferArgs {
  std::string system_path;
  std::string grounding_path;
  std::string activities_path;
  std::string out_path;
  std::string explain_path;
  bool missing_premise = false;
};

int run_infer(const InferArgs& args) {
  SymbolicSystem system = read_system_file(args.system_path);
  GroundingFile grounding = read_grounding_file(args.grounding_path);
  std::vector<ActivitySpec> activities = read_activities_file(args.activities_path);

  ActivityScoreOptions opts;
  opts.allow_missing_premise = args.missing_premise;

  PredictionFile predictions;
  ordered_json explanations = ordered_json::object();
  for (const auto& [image, symbol_probs] : grounding) {
    std::map<std::string, ConclusionScore> why;
    predictions[image] = evaluate_activity_set(system, symbol_probs, activities, opts,
                                               args.explain_path.empty() ? nullptr : &why);
    if (!args.explain_path.empty()) {
      ordered_json per_image = ordered_json::object();
      for (const auto& spec : activities) {
        std::string conclusion = conclusion_text_for(spec.activity);
        if (!system.find_text(conclusion)) continue;
        SubSystem sub = decompose(system, conclusion);
        per_image[trim(spec.activity)] = explanation_to_json(why.at(trim(spec.activity)), sub.system);
      }
      explanations[image] = std::move(per_image);
    }
  }
  write_file(args.out_path, serialize_predictions(predictions).dump(2) + "\n");
  if (!args.explain_path.empty()) write_file(args.explain_path, explanations.dump(2) + "\n");
  std::cout << "scored " << predictions.size() << " images x " << activities.size()
            << " activities\n";
  return 0;
}

struct FuseArgs {
  std::string sys1_path;
  std::string sys2_path;
  std::string policy = "maxnorm";
  double alpha1 = 1.0;
  double alpha2 = 1.0;
  std::string out_path;
};

int run_fuse(const FuseArgs& args) {
  PredictionFile sys1 = read_prediction_file(args.sys1_path);
  PredictionFile sys2 = read_prediction_file(args.sys2_path);
  FusionConfig cfg;
  cfg.policy = fusion_policy_from_name(args.policy);
  cfg.alpha1 = args.alpha1;
  cfg.alpha2 = args.alpha2;
  PredictionFile fused = fuse_prediction_files(sys1, sys2, cfg);
  write_file(args.out_path, serialize_predictions(fused).dump(2) + "\n");
  std::cout << "fused " << fused.size() << " images\n";
  return 0;
}

struct EvalArgs {
  std::string pred_path;
  std::string dataset_path;
  std::string metric = "map";
  std::string out_path;
};

int run_eval(const EvalArgs& args) {
  PredictionFile predictions = read_prediction_file(args.pred_path);
  Dataset dataset = read_dataset_file(args.dataset_path);

  if (args.metric == "map") {
    std::set<std::string> universe;
    for (const auto& rec : dataset)
      for (const auto& a : rec.gt_activities) universe.insert(a);
    std::map<std::string, ClassRanking> classes;
    for (const auto& rec : dataset) {
      auto img = predictions.find(rec.image_id);
      if (img == predictions.end())
        throw CoverageError("no predictions for image '" + rec.image_id + "'");
      for (const auto& activity : universe) {
        auto score = img->second.find(activity);
        if (score == img->second.end())
          throw CoverageError("image '" + rec.image_id + "' has no score for activity '" +
                              activity + "'");
        classes[activity].scores.push_back(score->second);
        classes[activity].labels.push_back(rec.gt_activities.count(activity) ? 1 : 0);
      }
    }
    MetricReport report = mean_average_precision(classes);
    ordered_json j;
    j["metric"] = "map";
    j["map"] = report.map;
    j["classes_scored"] = report.classes_scored;
    j["per_class_ap"] = ordered_json::object();
    for (const auto& [name, ap] : report.per_class_ap) j["per_class_ap"][name] = ap;
    j["skipped_classes"] = report.skipped_classes;
    if (!args.out_path.empty()) write_file(args.out_path, j.dump(2) + "\n");
    std::cout << "mAP " << report.map << " over " << report.classes_scored << " classes";
    if (!report.skipped_classes.empty())
      std::cout << " (" << report.skipped_classes.size() << " skipped, no positives)";
    std::cout << "\n";
    return 0;
  }

  if (args.metric == "top1") {
    std::map<std::string, std::string> truth;
    for (const auto& rec : dataset) {
      if (rec.gt_activities.size() != 1)
        throw InputError("top1 needs exactly one ground-truth activity per image; '" +
                         rec.image_id + "' has " + std::to_string(rec.gt_activities.size()));
      truth[rec.image_id] = *rec.gt_activities.begin();
    }
    double acc = top1_accuracy(argmax_choices(predictions), truth);
    if (!args.out_path.empty()) {
      ordered_json j;
      j["metric"] = "top1";
      j["accuracy"] = acc;
      write_file(args.out_path, j.dump(2) + "\n");
    }
    std::cout << "top-1 accuracy " << acc << " over " << truth.size() << " images\n";
    return 0;
  }

  throw InputError("unknown metric '" + args.metric + "'");
}

struct AnalyzeArgs {
  std::string dataset_path;
  std::string system_path;
  std::string report = "coverage";
  std::string tree_path;
  std::string out_path;
};

int run_analyze(const AnalyzeArgs& args) {
  Dataset dataset = read_dataset_file(args.dataset_path);
  SymbolicSystem system = read_system_file(args.system_path);

  ordered_json j;
  std::string table;
  if (args.report == "coverage") {
    CoverageReport report = coverage_stats(dataset, system);
    j = coverage_to_json(report);
    table = render_coverage(report);
  } else if (args.report == "confusion") {
    ConfusionReport report = confusion_pairs(dataset, system);
    j = confusion_to_json(report);
    table = render_confusion(report);
  } else if (args.report == "bottleneck") {
    BottleneckGrid grid = bottleneck_grid(dataset, system);
    j = grid_to_json(grid);
    table = render_grid(grid);
  } else if (args.report == "cost") {
    std::optional<SymbolTree> tree;
    if (!args.tree_path.empty() && args.tree_path != "none")
      tree = read_tree_file(args.tree_path);
    OperationCountReport report =
        operation_count(system, system_activities(system), tree, &dataset);
    j = cost_to_json(report);
    table = render_cost(report);
  } else {
    throw InputError("unknown report '" + args.report + "'");
  }
  if (!args.out_path.empty()) write_file(args.out_path, j.dump(2) + "\n");
  std::cout << table;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"neuro-symbolic activity reasoning over LLM-built rule systems"};
  app.require_subcommand(1);

  InstantiateArgs inst;
  CLI::App* c_inst = app.add_subcommand("instantiate", "build a symbolic system from activities");
  c_inst->add_option("--activities", inst.activities_path, "JSON list of {activity, object}")
      ->required();
  c_inst->add_option("--backend", inst.backend, "http, scripted, or replay")->required();
  c_inst->add_option("--config", inst.config_path, "loop configuration JSON");
  c_inst->add_option("--out", inst.out_path, "system file to write")->required();
  c_inst->add_option("--ledger", inst.ledger_path, "query-cost report to write");
  c_inst->add_option("--record", inst.record_path, "replay cache to record into / replay from");
  c_inst->add_option("--table", inst.table_path, "scripted response table (JSONL)");
  c_inst->add_option("--url", inst.url, "http endpoint (or SYMBOLACT_ORACLE_URL)");

  GroundArgs ground;
  CLI::App* c_ground = app.add_subcommand("ground", "score symbols against image yes/no tables");
  c_ground->add_option("--system", ground.system_path, "system file")->required();
  c_ground->add_option("--images", ground.images_path, "probability-table file")->required();
  c_ground->add_option("--tree", ground.tree_path, "symbol tree file, or 'none'");
  c_ground->add_option("--checker", ground.checker, "paraphrase checker: on or off")
      ->check(CLI::IsMember({"on", "off"}));
  c_ground->add_option("--policy", ground.policy, "neutral, drop-premise, or drop-rule");
  c_ground->add_option("--out", ground.out_path, "grounding file to write")->required();

  InferArgs infer;
  CLI::App* c_infer = app.add_subcommand("infer", "fuzzy rule inference over grounded symbols");
  c_infer->add_option("--system", infer.system_path, "system file")->required();
  c_infer->add_option("--grounding", infer.grounding_path, "grounding file")->required();
  c_infer->add_option("--activities", infer.activities_path, "JSON list of {activity, object}")
      ->required();
  c_infer->add_option("--out", infer.out_path, "prediction file to write")->required();
  c_infer->add_option("--explain", infer.explain_path, "per-rule explanation file to write");
  c_infer->add_flag("--missing-premise", infer.missing_premise,
                    "treat premises absent from the grounding as excluded rules");

  FuseArgs fuse;
  CLI::App* c_fuse = app.add_subcommand("fuse", "combine two prediction files");
  c_fuse->add_option("--sys1", fuse.sys1_path, "first prediction file")->required();
  c_fuse->add_option("--sys2", fuse.sys2_path, "second prediction file")->required();
  c_fuse->add_option("--policy", fuse.policy, "maxnorm or fixed");
  c_fuse->add_option("--alpha1", fuse.alpha1, "fixed-policy weight for sys1");
  c_fuse->add_option("--alpha2", fuse.alpha2, "fixed-policy weight for sys2");
  c_fuse->add_option("--out", fuse.out_path, "fused prediction file to write")->required();

  EvalArgs eval;
  CLI::App* c_eval = app.add_subcommand("eval", "score predictions against a dataset");
  c_eval->add_option("--pred", eval.pred_path, "prediction file")->required();
  c_eval->add_option("--dataset", eval.dataset_path, "dataset file")->required();
  c_eval->add_option("--metric", eval.metric, "map or top1");
  c_eval->add_option("--out", eval.out_path, "metric report JSON to write");

  AnalyzeArgs analyze;
  CLI::App* c_analyze = app.add_subcommand("analyze", "dataset/system quality reports");
  c_analyze->add_option("--dataset", analyze.dataset_path, "dataset file")->required();
  c_analyze->add_option("--system", analyze.system_path, "system file")->required();
  c_analyze->add_option("--report", analyze.report, "coverage, confusion, bottleneck, or cost");
  c_analyze->add_option("--tree", analyze.tree_path, "symbol tree for the cost report");
  c_analyze->add_option("--out", analyze.out_path, "report JSON to write");

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_inst->parsed()) return run_instantiate(inst);
    if (c_ground->parsed()) return run_ground(ground);
    if (c_infer->parsed()) return run_infer(infer);
    if (c_fuse->parsed()) return run_fuse(fuse);
    if (c_eval->parsed()) return run_eval(eval);
    if (c_analyze->parsed()) return run_analyze(analyze);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
