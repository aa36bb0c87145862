#include "shred/pipeline_io.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "shred/error.hpp"

namespace shred {
namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json config_object(const PipelineConfig& c) {
  ordered_json j;
  j["fps_k"] = c.fps_k;
  j["fix_radius"] = c.fix_radius;
  j["merge_outside_radius"] = c.merge_outside_radius;
  j["merge_threshold"] = c.merge_threshold;
  j["adjacency_threshold"] = c.adjacency_threshold;
  j["seed"] = c.seed;
  j["enable_split"] = c.enable_split;
  j["enable_fix"] = c.enable_fix;
  j["enable_merge"] = c.enable_merge;
  return j;
}

PipelineConfig config_of(const nlohmann::json& j) {
  PipelineConfig c;
  c.fps_k = j.value("fps_k", c.fps_k);
  c.fix_radius = j.value("fix_radius", c.fix_radius);
  c.merge_outside_radius = j.value("merge_outside_radius", c.merge_outside_radius);
  c.merge_threshold = j.value("merge_threshold", c.merge_threshold);
  c.adjacency_threshold = j.value("adjacency_threshold", c.adjacency_threshold);
  c.seed = j.value("seed", c.seed);
  c.enable_split = j.value("enable_split", c.enable_split);
  c.enable_fix = j.value("enable_fix", c.enable_fix);
  c.enable_merge = j.value("enable_merge", c.enable_merge);
  return c;
}

}  // namespace

std::string config_to_json(const PipelineConfig& config) {
  return config_object(config).dump();
}

PipelineConfig config_from_json(std::string_view text) {
  try {
    return config_of(nlohmann::json::parse(text));
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed config: ") + e.what());
  }
}

std::string decomposition_to_json(const RegionDecomposition& decomp,
                                  const StageTrace& trace,
                                  const PipelineConfig& config) {
  ordered_json j;
  j["shape"] = decomp.shape_id();
  j["n"] = decomp.size();
  j["labels"] = std::vector<RegionId>(decomp.labels().begin(), decomp.labels().end());
  j["trace"] = ordered_json::array();
  for (const auto& s : trace.stages) {
    ordered_json row;
    row["stage"] = s.stage;
    row["regions"] = s.regions;
    if (s.purity) row["purity"] = *s.purity;
    j["trace"].push_back(row);
  }
  j["merge_rounds"] = trace.merge_rounds;
  j["warnings"] = trace.warnings;
  j["config"] = config_object(config);
  j["format_version"] = kOutputFormatVersion;
  return j.dump();
}

DecompositionFile decomposition_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    DecompositionFile out;
    out.shape_id = j.at("shape").get<std::string>();
    out.labels = j.at("labels").get<std::vector<RegionId>>();
    if (out.labels.size() != j.at("n").get<std::size_t>()) {
      throw Error("decomposition '" + out.shape_id + "': n does not match labels");
    }
    for (const auto& row : j.value("trace", nlohmann::json::array())) {
      StageRecord s;
      s.stage = row.at("stage").get<std::string>();
      s.regions = row.at("regions").get<std::size_t>();
      if (row.contains("purity")) s.purity = row.at("purity").get<double>();
      out.trace.stages.push_back(std::move(s));
    }
    out.trace.merge_rounds = j.value("merge_rounds", std::size_t{0});
    out.trace.warnings =
        j.value("warnings", std::vector<std::string>{});
    if (j.contains("config")) out.config = config_of(j.at("config"));
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed decomposition JSON: ") + e.what());
  }
}

DecompositionFile load_decomposition(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open decomposition file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return decomposition_from_json(buffer.str());
}

std::string eval_report_to_json(const EvalReport& report,
                                std::string_view config_json) {
  ordered_json j;
  j["shape"] = report.shape_id;
  j["region_count"] = report.region_count;
  j["purity"] = report.purity;
  j["aiou"] = report.aiou;
  j["per_gt_part"] = ordered_json::array();
  for (const auto& p : report.per_gt_part) {
    j["per_gt_part"].push_back(
        {{"gt_id", p.gt_id}, {"best_iou", p.best_iou},
         {"purity_fraction", p.purity_fraction}});
  }
  if (!config_json.empty()) j["config"] = ordered_json::parse(config_json);
  j["format_version"] = kOutputFormatVersion;
  return j.dump();
}

}  // namespace shred
