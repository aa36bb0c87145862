#include "shred_cli/commands.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "shred/example_io.hpp"
#include "shred/fixtures.hpp"
#include "shred/metrics.hpp"
#include "shred/pipeline_io.hpp"
#include "shred/shape_io.hpp"
#include "shred/sweep.hpp"

namespace shred::cli {
namespace {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

// Shape ids are file stems; they name the outputs so they must be unique.
std::vector<std::string> check_shape_inputs(const std::vector<fs::path>& shapes) {
  if (shapes.empty()) throw ConfigError("no input shapes given");
  std::vector<std::string> ids;
  std::set<std::string> seen;
  for (const auto& p : shapes) {
    if (!fs::is_regular_file(p)) throw ConfigError("input not found: " + p.string());
    const auto id = p.stem().string();
    if (!seen.insert(id).second) throw ConfigError("duplicate shape id '" + id + "'");
    ids.push_back(id);
  }
  return ids;
}

void check_config(const PipelineConfig& config) {
  try {
    config.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

void prepare_out_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw ConfigError("cannot create output directory " + dir.string());
  }
}

std::unique_ptr<ReplaySources> load_replay(const OpPlan& plan) {
  plan.validate();
  try {
    return std::make_unique<ReplaySources>(plan);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

std::string operators_line(const OpPlan& plan) {
  return "split=" + plan.describe(OperatorKind::kSplit) +
         " fix=" + plan.describe(OperatorKind::kFix) +
         " merge=" + plan.describe(OperatorKind::kMerge);
}

int report_failures(const std::vector<std::string>& ids,
                    const std::vector<std::optional<std::string>>& errors,
                    std::ostream& err) {
  std::size_t failed = 0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (errors[i]) {
      err << ids[i] << ": error: " << *errors[i] << "\n";
      ++failed;
    }
  }
  if (failed) err << failed << " of " << ids.size() << " shapes failed\n";
  return failed ? kExitPartial : kExitOk;
}

std::string fmt(double v, int precision) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(precision) << v;
  return s.str();
}

// Shortest text that reads back to the same double.
std::string csv_number(double v) {
  std::array<char, 32> buf;
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

}  // namespace

std::size_t worker_count(std::size_t jobs) {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SHRED_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && cap >= 1) n = std::min(n, static_cast<std::size_t>(cap));
  }
  return std::max<std::size_t>(1, std::min(n, jobs));
}

void parallel_for(std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  const auto workers = worker_count(jobs);
  if (workers <= 1) {
    for (std::size_t i = 0; i < jobs; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (auto i = next++; i < jobs; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

std::uint64_t shape_seed(std::uint64_t seed, const std::string& shape_id) {
  auto rng = stage_rng(seed, shape_id);
  return rng();
}

int cmd_decompose(const DecomposeOptions& o, std::ostream& out, std::ostream& err) {
  check_config(o.config);
  const auto ids = check_shape_inputs(o.shapes);
  const auto replay = load_replay(o.plan);
  prepare_out_dir(o.out_dir);

  std::vector<ShapeLogs> logs(ids.size());
  std::vector<std::optional<std::string>> errors(ids.size());
  std::vector<std::string> summary(ids.size());
  parallel_for(ids.size(), [&](std::size_t i) {
    try {
      const Shape shape = load_shape(o.shapes[i]);
      const auto ops = build_operators(o.plan, *replay, shape, &logs[i]);
      const auto result = run_pipeline(shape, ops, o.config);
      write_text(o.out_dir / (ids[i] + ".json"),
                 decomposition_to_json(result.decomposition, result.trace, o.config));
      std::ostringstream line;
      line << ids[i] << ": " << result.decomposition.region_count() << " regions";
      if (const auto& last = result.trace.stages.back(); last.purity) {
        line << ", purity " << fmt(*last.purity, 4);
      }
      for (const auto& w : result.trace.warnings) line << "\n  warning: " << w;
      summary[i] = line.str();
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  save_recordings(o.plan, logs);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!errors[i]) out << summary[i] << "\n";
  }
  return report_failures(ids, errors, err);
}

int cmd_sweep(const SweepOptions& o, std::ostream& out, std::ostream& err) {
  check_config(o.config);
  if (o.grid.empty()) throw ConfigError("empty threshold grid");
  const auto ids = check_shape_inputs(o.shapes);
  const auto replay = load_replay(o.plan);

  // Purity needs ground truth; refuse before writing anything.
  std::vector<std::optional<Shape>> shapes(ids.size());
  std::vector<std::optional<std::string>> errors(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    try {
      shapes[i].emplace(load_shape(o.shapes[i]));
    } catch (const std::exception& e) {
      errors[i] = e.what();
      continue;
    }
    if (!shapes[i]->has_gt()) {
      throw ConfigError("shape '" + ids[i] + "' has no ground truth; sweep reports purity");
    }
  }
  prepare_out_dir(o.out_dir);

  std::ostringstream header;
  header << "# shred sweep format_version=" << kOutputFormatVersion << "\n"
         << "# config=" << config_to_json(o.config) << "\n"
         << "# operators " << operators_line(o.plan) << "\n";

  std::vector<ShapeLogs> logs(ids.size());
  std::vector<std::vector<SweepRow>> rows(ids.size());
  parallel_for(ids.size(), [&](std::size_t i) {
    if (!shapes[i]) return;
    try {
      const auto ops = build_operators(o.plan, *replay, *shapes[i], &logs[i]);
      // One merge operator serves every threshold so replay streams stay linear.
      rows[i] = sweep_thresholds(*shapes[i], ops, [&] { return ops.merge; }, o.config, o.grid);
      std::ostringstream csv;
      csv << header.str() << "# shape=" << ids[i] << "\nthreshold,regions,purity\n";
      for (const auto& r : rows[i]) {
        csv << csv_number(r.threshold) << ',' << r.regions << ',' << csv_number(r.purity) << "\n";
      }
      write_text(o.out_dir / (ids[i] + ".sweep.csv"), csv.str());
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  save_recordings(o.plan, logs);

  std::size_t ok = 0;
  std::vector<double> regions(o.grid.size(), 0.0);
  std::vector<double> purity(o.grid.size(), 0.0);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (errors[i]) continue;
    ++ok;
    for (std::size_t t = 0; t < o.grid.size(); ++t) {
      regions[t] += static_cast<double>(rows[i][t].regions);
      purity[t] += rows[i][t].purity;
    }
  }
  if (ok) {
    std::ostringstream csv;
    csv << header.str() << "# mean over " << ok << " shapes\nthreshold,regions,purity\n";
    for (std::size_t t = 0; t < o.grid.size(); ++t) {
      csv << csv_number(o.grid[t]) << ',' << csv_number(regions[t] / ok) << ','
          << csv_number(purity[t] / ok) << "\n";
    }
    write_text(o.out_dir / "sweep.csv", csv.str());
    out << "sweep: " << o.grid.size() << " thresholds x " << ok << " shapes -> "
        << (o.out_dir / "sweep.csv").string() << "\n";
  }
  return report_failures(ids, errors, err);
}

int cmd_eval(const EvalOptions& o, std::ostream& out, std::ostream& err) {
  const auto ids = check_shape_inputs(o.shapes);
  if (o.predictions.empty()) throw ConfigError("no predictions given (--pred)");
  std::vector<fs::path> files;
  for (const auto& p : o.predictions) {
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& entry : fs::directory_iterator(p)) {
        const auto name = entry.path().filename().string();
        if (entry.path().extension() == ".json" && name.find(".eval.") == std::string::npos &&
            name != "manifest.json") {
          found.push_back(entry.path());
        }
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else if (fs::is_regular_file(p)) {
      files.push_back(p);
    } else {
      throw ConfigError("prediction not found: " + p.string());
    }
  }
  std::map<std::string, DecompositionFile> preds;
  for (const auto& f : files) {
    DecompositionFile d;
    try {
      d = load_decomposition(f);
    } catch (const std::exception& e) {
      throw ConfigError(f.string() + ": " + e.what());
    }
    const auto id = d.shape_id;
    if (!preds.emplace(id, std::move(d)).second) {
      throw ConfigError("two predictions for shape '" + id + "'");
    }
  }
  prepare_out_dir(o.out_dir);

  std::vector<std::optional<EvalReport>> reports(ids.size());
  std::vector<std::optional<std::string>> errors(ids.size());
  std::set<std::string> configs;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    try {
      const auto it = preds.find(ids[i]);
      if (it == preds.end()) throw Error("no prediction for this shape");
      const Shape shape = load_shape(o.shapes[i]);
      if (it->second.labels.size() != shape.size()) {
        throw Error("prediction has " + std::to_string(it->second.labels.size()) +
                    " labels for " + std::to_string(shape.size()) + " points");
      }
      reports[i] = evaluate(ids[i], it->second.labels, shape.gt_labels());
      const auto config = config_to_json(it->second.config);
      configs.insert(config);
      write_text(o.out_dir / (ids[i] + ".eval.json"), eval_report_to_json(*reports[i], config));
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }

  std::ostringstream csv;
  csv << "# shred eval format_version=" << kOutputFormatVersion << "\n";
  for (const auto& c : configs) csv << "# config=" << c << "\n";
  csv << "shape,regions,purity,aiou\n";
  std::size_t width = 5;
  for (const auto& id : ids) width = std::max(width, id.size());
  out << std::left << std::setw(static_cast<int>(width)) << "shape" << std::right
      << std::setw(10) << "regions" << std::setw(10) << "purity" << std::setw(10) << "aiou"
      << "\n";
  double sum_regions = 0, sum_purity = 0, sum_aiou = 0;
  std::size_t ok = 0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!reports[i]) continue;
    const auto& r = *reports[i];
    ++ok;
    sum_regions += static_cast<double>(r.region_count);
    sum_purity += r.purity;
    sum_aiou += r.aiou;
    csv << ids[i] << ',' << r.region_count << ',' << csv_number(r.purity) << ','
        << csv_number(r.aiou) << "\n";
    out << std::left << std::setw(static_cast<int>(width)) << ids[i] << std::right
        << std::setw(10) << r.region_count << std::setw(10) << fmt(r.purity, 4)
        << std::setw(10) << fmt(r.aiou, 4) << "\n";
  }
  if (ok) {
    const double n = static_cast<double>(ok);
    csv << "mean," << csv_number(sum_regions / n) << ',' << csv_number(sum_purity / n) << ','
        << csv_number(sum_aiou / n) << "\n";
    out << std::left << std::setw(static_cast<int>(width)) << "mean" << std::right
        << std::setw(10) << fmt(sum_regions / n, 2) << std::setw(10) << fmt(sum_purity / n, 4)
        << std::setw(10) << fmt(sum_aiou / n, 4) << "\n";
  }
  write_text(o.out_dir / "eval.csv", csv.str());
  return report_failures(ids, errors, err);
}

int cmd_gendata(const GendataOptions& o, std::ostream& out, std::ostream& err) {
  const auto ids = check_shape_inputs(o.shapes);
  if (o.fps_k == 0) throw ConfigError("--fps-k must be at least 1");
  if (o.shard_size == 0) throw ConfigError("--shard-size must be at least 1");
  prepare_out_dir(o.out_dir);

  ordered_json config;
  config["kind"] = std::string(to_string(o.kind));
  config["seed"] = o.seed;
  config["shard_size"] = o.shard_size;
  config["example_format_version"] = kExampleFormatVersion;
  if (o.kind == OperatorKind::kSplit) config["fps_k"] = o.fps_k;
  if (o.kind == OperatorKind::kFix) {
    config["attempts_per_shape"] = o.fix_attempts;
    config["grow"] = {o.fix.grow_probability, o.fix.grow_min, o.fix.grow_max};
    config["shrink"] = {o.fix.shrink_probability, o.fix.shrink_min, o.fix.shrink_max};
    config["flip_max"] = o.fix.flip_max;
    config["surplus_flip_probability"] = o.fix.surplus_flip_probability;
    config["extension"] = o.fix.extension;
    config["gate"] = o.fix.gate;
  }
  if (o.kind == OperatorKind::kMerge) {
    config["passes_per_shape"] = o.merge_passes;
    config["region_counts"] = o.merge.region_counts;
    config["max_subparts"] = o.merge.max_subparts;
    config["execute_if_same"] = o.merge.execute_if_same;
    config["execute_if_different"] = o.merge.execute_if_different;
    config["adjacency_threshold"] = o.merge.adjacency_threshold;
    config["extension"] = o.merge.extension;
  }

  ShardWriter writer(o.out_dir, std::string(to_string(o.kind)), o.shard_size);
  ShardManifest manifest;
  manifest.kind = o.kind;
  std::vector<std::optional<std::string>> errors(ids.size());
  MergeGenStats merge_stats;
  std::size_t attempts = 0;

  // Sequential: a single writer keeps shard bytes independent of scheduling.
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto seed = shape_seed(o.seed, ids[i]);
    manifest.shapes.push_back(ids[i]);
    manifest.seeds.push_back(seed);
    try {
      const Shape shape = load_shape(o.shapes[i]);
      if (!shape.has_gt()) throw Error("data generation requires ground truth");
      switch (o.kind) {
        case OperatorKind::kSplit:
          for (const auto& ex : gen_split_examples(shape, o.fps_k, seed)) {
            writer.write(to_record(ex));
          }
          break;
        case OperatorKind::kFix: {
          Rng rng(seed);
          for (std::size_t a = 0; a < o.fix_attempts; ++a) {
            ++attempts;
            if (auto ex = gen_fix_example(shape, rng, o.fix)) {
              writer.write(to_record(*ex));
            } else {
              ++manifest.rejected;
            }
          }
          break;
        }
        case OperatorKind::kMerge: {
          Rng rng(seed);
          for (std::size_t p = 0; p < o.merge_passes; ++p) {
            merge_stats += gen_merge_examples(
                shape, rng, [&](MergeExample&& ex) { writer.write(to_record(ex)); }, o.merge);
          }
          break;
        }
      }
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  manifest.shards = writer.finish();
  manifest.total = writer.total();
  manifest.config_json = config.dump();

  ordered_json stats;
  stats["examples"] = manifest.total;
  if (o.kind == OperatorKind::kFix) {
    stats["attempts"] = attempts;
    stats["rejected"] = manifest.rejected;
    stats["rejection_rate"] =
        attempts ? static_cast<double>(manifest.rejected) / static_cast<double>(attempts) : 0.0;
  }
  if (o.kind == OperatorKind::kMerge) {
    stats["fps_regions"] = merge_stats.fps_regions;
    stats["initial_regions"] = merge_stats.initial_regions;
    stats["subpart_histogram"] = merge_stats.subpart_histogram;
    stats["positives"] = merge_stats.positives;
    stats["negatives"] = merge_stats.negatives;
    stats["executed_positives"] = merge_stats.executed_positives;
    stats["executed_negatives"] = merge_stats.executed_negatives;
  }
  manifest.stats_json = stats.dump();
  save_manifest(o.out_dir / "manifest.json", manifest);

  out << to_string(o.kind) << ": " << manifest.total << " examples in "
      << manifest.shards.size() << " shards";
  if (o.kind == OperatorKind::kFix) {
    out << ", rejected " << manifest.rejected << " of " << attempts << " ("
        << fmt(attempts ? 100.0 * static_cast<double>(manifest.rejected) /
                              static_cast<double>(attempts)
                        : 0.0,
               1)
        << "%)";
  }
  out << "\n";
  return report_failures(ids, errors, err);
}

int cmd_make_fixtures(const FixtureOptions& o, std::ostream& out, std::ostream& err) {
  if (o.count == 0) throw ConfigError("--count must be at least 1");
  prepare_out_dir(o.out_dir);
  std::vector<std::string> ids;
  std::vector<std::optional<std::string>> errors(o.count);
  for (std::size_t i = 0; i < o.count; ++i) {
    const auto seed = o.seed + i;
    ids.push_back("box-" + std::to_string(seed));
    try {
      const auto shape = make_box_assembly(seed);
      save_shape(o.out_dir / (ids.back() + ".shrd"), shape);
      out << ids.back() << ": " << shape.size() << " points, " << shape.gt_part_count()
          << " parts\n";
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  return report_failures(ids, errors, err);
}

}  // namespace shred::cli
