#include "gjsscc/serialization.hpp"

#include <fstream>
#include <sstream>

#include "gjsscc/error.hpp"

namespace gjsscc {

json mask_to_json(const RegionMask& mask) {
  json runs = json::array();
  std::uint8_t current = 0;
  std::uint64_t run = 0;
  for (auto b : mask.bits()) {
    if (b == current) {
      ++run;
    } else {
      runs.push_back(run);
      current = b;
      run = 1;
    }
  }
  runs.push_back(run);
  return {{"width", mask.width()}, {"height", mask.height()}, {"runs", runs}};
}

RegionMask mask_from_json(const json& j) {
  RegionMask m(j.at("width").get<int>(), j.at("height").get<int>());
  const std::size_t total = static_cast<std::size_t>(m.width()) * m.height();
  std::size_t pos = 0;
  bool value = false;
  for (const auto& r : j.at("runs")) {
    const auto n = r.get<std::uint64_t>();
    if (pos + n > total) throw ConfigError("mask runs exceed mask size");
    for (std::uint64_t i = 0; i < n; ++i, ++pos) m.set(static_cast<int>(pos % m.width()), static_cast<int>(pos / m.width()), value);
    value = !value;
  }
  if (pos != total) throw ConfigError("mask runs do not cover the mask");
  return m;
}

json region_set_to_json(const RegionSet& regions) {
  json arr = json::array();
  for (const auto& r : regions) arr.push_back({{"id", r.id}, {"mask", mask_to_json(r.mask)}});
  return {{"regions", arr}};
}

RegionSet region_set_from_json(const json& j) {
  RegionSet out;
  for (const auto& r : j.at("regions")) out.push_back({r.at("id").get<int>(), mask_from_json(r.at("mask"))});
  return out;
}

json shapley_report_to_json(const ShapleyReport& report) {
  json values = json::object();
  json errors = json::object();
  json evals = json::object();
  for (std::size_t i = 0; i < report.ids.size(); ++i) {
    const auto key = std::to_string(report.ids[i]);
    values[key] = report.values[i];
    errors[key] = report.std_errors[i];
    evals[key] = report.evaluations[i];
  }
  json j = {{"estimator", report.estimator == Estimator::exact ? "exact" : "permutation_sampled"},
            {"values", values},
            {"evaluations", evals},
            {"empty_value", report.empty_value},
            {"full_value", report.full_value}};
  if (report.estimator == Estimator::permutation_sampled) {
    j["permutations"] = report.permutations;
    j["std_errors"] = errors;
  }
  return j;
}

json profile_to_json(const CodingProfile& p) {
  return {{"q_b", p.q_basic},  {"q_t", p.q_target}, {"eps_c", p.ber_channel},
          {"eps_t", p.ber_target}, {"trials", p.trials}, {"seed", p.master_seed}};
}

json partition_to_json(const RegionPartition& p, const CodingProfile& profile) {
  json members = json::object();
  for (const auto& [id, orig] : p.members) members[std::to_string(id)] = orig;
  return {{"regions", region_set_to_json(p.regions).at("regions")},
          {"members", members},
          {"star_id", p.star_id},
          {"star_ids", p.star_ids},
          {"positive_ids", p.positive_ids},
          {"negative_ids", p.negative_ids},
          {"positive_regions", p.positive_regions},
          {"negative_regions", p.negative_regions},
          {"achieved_probability", p.achieved_probability},
          {"conditional_shapley", shapley_report_to_json(p.conditional)},
          {"profile", profile_to_json(profile)}};
}

RegionPartition partition_from_json(const json& j) {
  try {
    RegionPartition p;
    p.regions = region_set_from_json(j);
    for (const auto& [key, orig] : j.at("members").items()) p.members[std::stoi(key)] = orig.get<std::vector<int>>();
    p.star_id = j.at("star_id").get<int>();
    p.star_ids = j.at("star_ids").get<std::vector<int>>();
    p.positive_ids = j.at("positive_ids").get<std::vector<int>>();
    p.negative_ids = j.at("negative_ids").get<std::vector<int>>();
    p.positive_regions = j.at("positive_regions").get<std::vector<int>>();
    p.negative_regions = j.at("negative_regions").get<std::vector<int>>();
    p.achieved_probability = j.at("achieved_probability").get<double>();
    return p;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("partition file: ") + e.what());
  }
}

json na_result_to_json(const NAResult& r) {
  return {{"K", r.info_bits}, {"N", r.blocklength},        {"rate", r.rate()}, {"rho", r.rho},
          {"I", r.mutual_info}, {"V", r.dispersion}, {"eps_t", r.target_error}};
}

json scheme_result_to_json(const SchemeResult& r) {
  json trials = json::array();
  for (const auto& t : r.per_trial) trials.push_back({{"trial", t.index}, {"seed", t.seed}, {"p_D", t.p_target}});
  return {{"scheme", r.scheme},
          {"p_D", r.p_target},
          {"K", r.raw_bits},
          {"N", r.channel_bits},
          {"R", r.rate},
          {"e", r.efficiency},
          {"treated_source_bits", r.treated_source_bits},
          {"treated_channel_bits", r.treated_channel_bits},
          {"untreated_bits", r.untreated_bits},
          {"trials", r.trials},
          {"seed", r.seed},
          {"per_trial", trials}};
}

json sweep_to_json(const SweepConfig& config, const std::vector<SweepRow>& rows) {
  json out = json::array();
  for (const auto& row : rows) {
    json r = scheme_result_to_json(row.result);
    r["sweep_value"] = row.sweep_value;
    out.push_back(std::move(r));
  }
  return {{"variable", std::string(to_string(config.variable))},
          {"values", config.values},
          {"profile", profile_to_json(config.profile)},
          {"rows", out}};
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open file: " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write file: " + path.string());
  out << text;
  if (!out) throw ConfigError("write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// Experiment config

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_relative() ? base / path : path;
}

}  // namespace

ExperimentConfig parse_experiment_config(const json& j, const std::filesystem::path& base_dir) {
  ExperimentConfig c;
  try {
    c.image = resolve(base_dir, j.at("image").get<std::string>());
    c.mask = resolve(base_dir, j.at("mask").get<std::string>());
    if (j.contains("grid")) {
      c.grid_rows = j["grid"].value("rows", c.grid_rows);
      c.grid_cols = j["grid"].value("cols", c.grid_cols);
    }
    if (j.contains("partition")) c.partition = resolve(base_dir, j["partition"].get<std::string>());
    c.p_threshold = j.value("p_th", c.p_threshold);
    c.target = j.value("target", c.target);
    c.seed = j.value("seed", c.seed);
    if (j.contains("oracle")) {
      auto spec = j["oracle"].get<std::string>();
      if (spec.starts_with("builtin:")) spec = "builtin:" + resolve(base_dir, spec.substr(8)).string();
      c.oracle = spec;
    }

    const json prof = j.value("profile", json::object());
    c.profile.q_basic = prof.value("q_b", c.profile.q_basic);
    c.profile.q_target = prof.value("q_t", c.profile.q_target);
    c.snr_scale = prof.value("snr_scale", c.snr_scale);
    if (prof.contains("gain")) {
      c.profile.ber_channel = bpsk_ber({prof["gain"].get<double>(), c.snr_scale});
    } else {
      c.profile.ber_channel = prof.value("eps_c", c.profile.ber_channel);
    }
    c.profile.ber_target = prof.value("eps_t", c.profile.ber_target);
    c.profile.trials = prof.value("trials", c.profile.trials);
    c.profile.master_seed = c.seed;

    if (j.contains("schemes")) c.schemes = j["schemes"].get<std::vector<std::string>>();
    const auto coding = j.value("coding", std::string("na"));
    if (coding == "na") {
      c.coding = CodingMode::na;
    } else if (coding == "ideal") {
      c.coding = CodingMode::ideal;
    } else {
      throw ConfigError("coding must be 'na' or 'ideal'");
    }
    const auto compression = j.value("compression", std::string("codec"));
    if (compression == "codec") {
      c.format = StreamFormat::codec;
    } else if (compression == "uncompressed") {
      c.format = StreamFormat::raw;
    } else {
      throw ConfigError("compression must be 'codec' or 'uncompressed'");
    }
    c.background_transmitted = j.value("background_transmitted", c.background_transmitted);

    if (j.contains("sweep")) {
      c.sweep_variable = parse_sweep_variable(j["sweep"].at("variable").get<std::string>());
      c.sweep_values = j["sweep"].at("values").get<std::vector<double>>();
    }
    if (j.contains("shapley")) {
      c.shapley.exhaustive_limit = j["shapley"].value("exhaustive_limit", c.shapley.exhaustive_limit);
      c.shapley.permutations = j["shapley"].value("permutations", c.shapley.permutations);
      c.shapley.jobs = j["shapley"].value("jobs", c.shapley.jobs);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  for (const auto& s : c.schemes) (void)Scheme::named(s);
  try {
    c.profile.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  return parse_experiment_config(read_json_file(path), path.parent_path());
}

}  // namespace gjsscc
