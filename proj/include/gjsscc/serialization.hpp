#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "gjsscc/channel.hpp"
#include "gjsscc/pipeline.hpp"
#include "gjsscc/shapley.hpp"

namespace gjsscc {

using nlohmann::json;

// Masks serialise as {"width", "height", "runs"}: alternating run lengths in
// row-major order, starting with a (possibly empty) run of unset pixels.
json mask_to_json(const RegionMask& mask);
RegionMask mask_from_json(const json& j);

json region_set_to_json(const RegionSet& regions);
RegionSet region_set_from_json(const json& j);

json shapley_report_to_json(const ShapleyReport& report);
json partition_to_json(const RegionPartition& partition, const CodingProfile& profile);
RegionPartition partition_from_json(const json& j);

json profile_to_json(const CodingProfile& profile);
json na_result_to_json(const NAResult& r);
json scheme_result_to_json(const SchemeResult& r);
json sweep_to_json(const SweepConfig& config, const std::vector<SweepRow>& rows);

json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Experiment description shared by the `run`, `extract` and `sweep` commands.
/// Relative paths resolve against the config file's directory.
struct ExperimentConfig {
  std::filesystem::path image;
  std::filesystem::path mask;
  int grid_rows = 2;
  int grid_cols = 2;
  std::optional<std::filesystem::path> partition;
  double p_threshold = 0.7;
  int target = 1;
  CodingProfile profile;
  double snr_scale = 1.0;
  std::vector<std::string> schemes{"star", "star_pos", "star_neg", "full"};
  CodingMode coding = CodingMode::na;
  StreamFormat format = StreamFormat::codec;
  bool background_transmitted = true;
  std::optional<SweepVariable> sweep_variable;
  std::vector<double> sweep_values;
  std::string oracle;
  std::uint64_t seed = 0;
  ShapleyOptions shapley;
};

ExperimentConfig parse_experiment_config(const json& j, const std::filesystem::path& base_dir);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

}  // namespace gjsscc
