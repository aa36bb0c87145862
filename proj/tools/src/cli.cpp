#include "shred_cli/cli.hpp"

#include <ostream>

#include <CLI11.hpp>

#include "shred/sweep.hpp"
#include "shred_cli/commands.hpp"

namespace shred::cli {
namespace {

struct PipelineFlags {
  PipelineConfig config;
  std::vector<std::string> ops;
  std::vector<std::string> records;
  std::vector<std::string> replays;
  std::vector<std::string> stage_off;
};

void add_pipeline_flags(CLI::App* cmd, PipelineFlags& f) {
  cmd->add_option("--op", f.ops,
                  "Operator per stage: [split|fix|merge=]oracle|heuristic|replay:PATH|record:PATH")
      ->allow_extra_args(false);
  cmd->add_option("--record", f.records, "Record a stage's responses: STAGE:PATH")
      ->allow_extra_args(false);
  cmd->add_option("--replay", f.replays, "Replay a stage from a score file: STAGE:PATH")
      ->allow_extra_args(false);
  cmd->add_option("--threshold", f.config.merge_threshold, "Merge threshold")
      ->capture_default_str();
  cmd->add_option("--fps-k", f.config.fps_k, "FPS centroid count")->capture_default_str();
  cmd->add_option("--seed", f.config.seed, "Random seed")->capture_default_str();
  cmd->add_option("--adjacency-eps", f.config.adjacency_threshold,
                  "Region adjacency distance (normalized units)")
      ->capture_default_str();
  cmd->add_option("--fix-radius", f.config.fix_radius, "Fix neighborhood extension")
      ->capture_default_str();
  cmd->add_option("--merge-radius", f.config.merge_outside_radius,
                  "Merge context extension")
      ->capture_default_str();
  cmd->add_option("--stage-off", f.stage_off, "Disable a stage (split, fix, merge)")
      ->allow_extra_args(false)
      ->check(CLI::IsMember({"split", "fix", "merge"}));
}

OpPlan finish_pipeline_flags(PipelineFlags& f) {
  OpPlan plan;
  for (const auto& op : f.ops) plan.apply_op(op);
  for (const auto& r : f.replays) plan.apply_replay(r);
  for (const auto& r : f.records) plan.apply_record(r);
  for (const auto& s : f.stage_off) {
    if (s == "split") f.config.enable_split = false;
    if (s == "fix") f.config.enable_fix = false;
    if (s == "merge") f.config.enable_merge = false;
  }
  return plan;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Region decomposition of labeled point clouds by split, fix and merge",
               "shred"};
  app.require_subcommand(1);

  std::string out_dir = ".";
  std::vector<std::string> shapes;

  PipelineFlags decompose_flags;
  auto* decompose = app.add_subcommand("decompose", "Decompose shapes into regions");
  add_pipeline_flags(decompose, decompose_flags);
  decompose->add_option("--out", out_dir, "Output directory")->capture_default_str();
  decompose->add_option("shapes", shapes, "SHRD1 shape files")->required();

  PipelineFlags sweep_flags;
  std::string grid = "0.01:0.99:0.01";
  auto* sweep = app.add_subcommand("sweep", "Region count and purity across merge thresholds");
  add_pipeline_flags(sweep, sweep_flags);
  sweep->add_option("--grid", grid, "Thresholds as start:stop:step")->capture_default_str();
  sweep->add_option("--out", out_dir, "Output directory")->capture_default_str();
  sweep->add_option("shapes", shapes, "SHRD1 shape files with ground truth")->required();

  EvalOptions eval_options;
  std::vector<std::string> preds;
  auto* eval = app.add_subcommand("eval", "Score decompositions against ground truth");
  eval->add_option("--pred", preds, "Decomposition JSON files or directories")
      ->required()
      ->allow_extra_args(false);
  eval->add_option("--out", out_dir, "Output directory")->capture_default_str();
  eval->add_option("shapes", shapes, "SHRD1 shape files with ground truth")->required();

  GendataOptions gen;
  std::string kind;
  auto* gendata = app.add_subcommand("gendata", "Write synthetic training examples");
  gendata->add_option("--kind", kind, "split, fix or merge")
      ->required()
      ->check(CLI::IsMember({"split", "fix", "merge"}));
  gendata->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
  gendata->add_option("--fps-k", gen.fps_k, "FPS regions per shape (split)")
      ->capture_default_str();
  gendata->add_option("--fix-attempts", gen.fix_attempts, "Fix examples tried per shape")
      ->capture_default_str();
  gendata->add_option("--merge-passes", gen.merge_passes, "Merge generation passes per shape")
      ->capture_default_str();
  gendata->add_option("--shard-size", gen.shard_size, "Examples per shard")
      ->capture_default_str();
  gendata->add_option("--out", out_dir, "Output directory")->capture_default_str();
  gendata->add_option("shapes", shapes, "SHRD1 shape files with ground truth")->required();

  FixtureOptions fixtures;
  auto* make_fixtures =
      app.add_subcommand("make-fixtures", "Write procedural labeled box assemblies");
  make_fixtures->add_option("--count", fixtures.count, "Number of shapes")
      ->capture_default_str();
  make_fixtures->add_option("--seed", fixtures.seed, "First seed")->capture_default_str();
  make_fixtures->add_option("--out", out_dir, "Output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  auto paths = [](const std::vector<std::string>& v) {
    return std::vector<std::filesystem::path>(v.begin(), v.end());
  };
  try {
    if (*decompose) {
      DecomposeOptions o;
      o.plan = finish_pipeline_flags(decompose_flags);
      o.config = decompose_flags.config;
      o.shapes = paths(shapes);
      o.out_dir = out_dir;
      return cmd_decompose(o, out, err);
    }
    if (*sweep) {
      SweepOptions o;
      o.plan = finish_pipeline_flags(sweep_flags);
      o.config = sweep_flags.config;
      o.shapes = paths(shapes);
      o.out_dir = out_dir;
      try {
        o.grid = parse_threshold_grid(grid);
      } catch (const Error& e) {
        throw ConfigError(e.what());
      }
      return cmd_sweep(o, out, err);
    }
    if (*eval) {
      eval_options.shapes = paths(shapes);
      eval_options.predictions = paths(preds);
      eval_options.out_dir = out_dir;
      return cmd_eval(eval_options, out, err);
    }
    if (*gendata) {
      gen.kind = parse_operator_kind(kind);
      gen.shapes = paths(shapes);
      gen.out_dir = out_dir;
      return cmd_gendata(gen, out, err);
    }
    if (*make_fixtures) {
      fixtures.out_dir = out_dir;
      return cmd_make_fixtures(fixtures, out, err);
    }
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitPartial;
  }
  return kExitConfig;
}

}  // namespace shred::cli
