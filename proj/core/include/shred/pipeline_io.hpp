#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "shred/metrics.hpp"
#include "shred/pipeline.hpp"

namespace shred {

inline constexpr int kOutputFormatVersion = 1;

/// Compact JSON object with every PipelineConfig field.
std::string config_to_json(const PipelineConfig& config);
PipelineConfig config_from_json(std::string_view text);

/// Decomposition output:
/// {"shape":..,"n":N,"labels":[..],"trace":[{"stage":"fps","regions":64,
///  "purity":0.41},..],"warnings":[..],"config":{..},"format_version":1}
std::string decomposition_to_json(const RegionDecomposition& decomp,
                                  const StageTrace& trace,
                                  const PipelineConfig& config);

struct DecompositionFile {
  std::string shape_id;
  std::vector<RegionId> labels;
  StageTrace trace;
  PipelineConfig config;
};

DecompositionFile decomposition_from_json(std::string_view text);
DecompositionFile load_decomposition(const std::filesystem::path& path);

/// EvalReport as JSON; `config_json` (may be empty) is embedded verbatim.
std::string eval_report_to_json(const EvalReport& report,
                                std::string_view config_json = {});

}  // namespace shred
