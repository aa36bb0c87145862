#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "shred/pipeline.hpp"
#include "shred/synthgen.hpp"
#include "shred_cli/op_spec.hpp"

namespace shred::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 2;
inline constexpr int kExitConfig = 3;

struct DecomposeOptions {
  std::vector<std::filesystem::path> shapes;
  std::filesystem::path out_dir = ".";
  PipelineConfig config;
  OpPlan plan;
};

struct SweepOptions {
  std::vector<std::filesystem::path> shapes;
  std::filesystem::path out_dir = ".";
  PipelineConfig config;
  OpPlan plan;
  std::vector<double> grid;
};

struct EvalOptions {
  std::vector<std::filesystem::path> shapes;
  std::vector<std::filesystem::path> predictions;  // files or directories
  std::filesystem::path out_dir = ".";
};

struct GendataOptions {
  OperatorKind kind = OperatorKind::kSplit;
  std::vector<std::filesystem::path> shapes;
  std::filesystem::path out_dir = ".";
  std::uint64_t seed = 0;
  std::size_t fps_k = 64;
  std::size_t fix_attempts = 100;  // per shape
  std::size_t merge_passes = 1;    // per shape
  std::size_t shard_size = 10000;
  FixGenOptions fix;
  MergeGenOptions merge;
};

struct FixtureOptions {
  std::size_t count = 20;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = ".";
};

int cmd_decompose(const DecomposeOptions& options, std::ostream& out, std::ostream& err);
int cmd_sweep(const SweepOptions& options, std::ostream& out, std::ostream& err);
int cmd_eval(const EvalOptions& options, std::ostream& out, std::ostream& err);
int cmd_gendata(const GendataOptions& options, std::ostream& out, std::ostream& err);
int cmd_make_fixtures(const FixtureOptions& options, std::ostream& out, std::ostream& err);

/// Worker count for `jobs` independent items: hardware threads, capped by
/// SHRED_THREADS when set.
std::size_t worker_count(std::size_t jobs);

/// Runs fn(i) for i in [0, jobs) on up to worker_count(jobs) threads.
void parallel_for(std::size_t jobs, const std::function<void(std::size_t)>& fn);

/// Per-shape seed for data generation.
std::uint64_t shape_seed(std::uint64_t seed, const std::string& shape_id);

}  // namespace shred::cli
