#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "gjsscc/error.hpp"
#include "gjsscc/serialization.hpp"

namespace fs = std::filesystem;
using namespace gjsscc;

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::string oracle;
  fs::path out = ".";
};

struct ExperimentFlags {
  std::string config;
  std::string image;
  std::string mask;
  std::string regions;
  std::string partition;
  std::optional<int> rows;
  std::optional<int> cols;
  std::optional<int> target;
  std::optional<double> p_th;
  std::optional<double> eps_c;
  std::optional<double> eps_t;
  std::optional<int> q_b;
  std::optional<int> q_t;
  bool uncompressed = false;
  bool no_background = false;
};

void add_experiment_flags(CLI::App* cmd, ExperimentFlags& f) {
  cmd->add_option("--config", f.config, "experiment JSON file");
  cmd->add_option("--image", f.image, "PGM/PPM image");
  cmd->add_option("--mask", f.mask, "object mask (nonzero pixels)");
  cmd->add_option("--rows", f.rows, "grid rows");
  cmd->add_option("--cols", f.cols, "grid columns");
  cmd->add_option("--target", f.target, "target class D (1-based)");
  cmd->add_option("--eps-c", f.eps_c, "channel BER");
  cmd->add_option("--eps-t", f.eps_t, "target residual BER");
  cmd->add_option("--q-b", f.q_b, "basic quality");
  cmd->add_option("--q-t", f.q_t, "target quality");
  cmd->add_flag("--uncompressed", f.uncompressed, "send raw samples instead of the codec stream");
  cmd->add_flag("--no-background", f.no_background, "do not transmit the background");
}

ExperimentConfig build_config(const ExperimentFlags& f, const Globals& g) {
  ExperimentConfig c;
  if (!f.config.empty()) {
    c = load_experiment_config(f.config);
  } else {
    if (f.image.empty() || f.mask.empty()) throw ConfigError("need --config or both --image and --mask");
  }
  if (!f.image.empty()) c.image = f.image;
  if (!f.mask.empty()) c.mask = f.mask;
  if (!f.partition.empty()) c.partition = fs::path(f.partition);
  if (f.rows) c.grid_rows = *f.rows;
  if (f.cols) c.grid_cols = *f.cols;
  if (f.target) c.target = *f.target;
  if (f.p_th) c.p_threshold = *f.p_th;
  if (f.eps_c) c.profile.ber_channel = *f.eps_c;
  if (f.eps_t) c.profile.ber_target = *f.eps_t;
  if (f.q_b) c.profile.q_basic = *f.q_b;
  if (f.q_t) c.profile.q_target = *f.q_t;
  if (f.uncompressed) c.format = StreamFormat::raw;
  if (f.no_background) c.background_transmitted = false;
  if (g.seed) c.seed = *g.seed;
  if (g.trials) c.profile.trials = *g.trials;
  c.profile.master_seed = c.seed;
  if (!g.oracle.empty()) c.oracle = g.oracle;
  try {
    c.profile.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  return c;
}

void require_file(const fs::path& p, const char* what) {
  if (!fs::exists(p)) throw ConfigError(std::string(what) + " not found: " + p.string());
}

struct Loaded {
  Image image;
  RegionMask object;
  RegionMask background;
  RegionSet regions;
  std::unique_ptr<Oracle> oracle;
};

Loaded load_inputs(const ExperimentConfig& c, const std::string& regions_file, bool need_oracle) {
  require_file(c.image, "image");
  require_file(c.mask, "mask");
  Loaded in;
  in.image = load_raster(c.image);
  in.object = load_mask(c.mask);
  if (!in.object.matches(in.image)) throw ConfigError("mask size does not match image: " + c.mask.string());
  in.background = in.object.complement();
  if (!regions_file.empty()) {
    in.regions = region_set_from_json(read_json_file(regions_file));
  } else {
    in.regions = grid_presegment(in.object, c.grid_rows, c.grid_cols);
  }
  validate(in.regions, in.object);
  if (need_oracle) {
    if (c.oracle.empty()) throw ConfigError("no oracle given (use --oracle builtin:<model> or external:<command>)");
    in.oracle = make_oracle(c.oracle);
  }
  return in;
}

CoalitionContext context_of(const ExperimentConfig& c, Loaded& in) {
  return {in.image, in.regions, in.background, c.profile, {c.format, c.background_transmitted}, *in.oracle, c.target};
}

fs::path output_path(const Globals& g, const std::string& name) {
  std::error_code ec;
  fs::create_directories(g.out, ec);
  if (ec) throw ConfigError("cannot create output directory " + g.out.string() + ": " + ec.message());
  return g.out / name;
}

RegionPartition partition_for(const ExperimentConfig& c, Loaded& in) {
  if (c.partition) {
    require_file(*c.partition, "partition");
    return partition_from_json(read_json_file(*c.partition));
  }
  const auto ctx = context_of(c, in);
  const auto seg = algorithm1_segment(ctx, c.p_threshold, c.shapley);
  return algorithm2_rank(ctx, seg, c.shapley);
}

std::vector<Scheme> schemes_of(const ExperimentConfig& c) {
  std::vector<Scheme> out;
  for (const auto& s : c.schemes) out.push_back(Scheme::named(s, c.background_transmitted, c.coding, c.format));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Goal-oriented joint source and channel coding simulator"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "master seed");
  app.add_option("--trials", g.trials, "noise realisations per evaluation")->check(CLI::PositiveNumber);
  app.add_option("--oracle", g.oracle, "builtin:<model.json> or external:<command>");
  app.add_option("--out", g.out, "output directory");

  auto* segment = app.add_subcommand("segment", "split an object mask into grid regions");
  std::string seg_mask;
  int seg_rows = 2, seg_cols = 2;
  segment->add_option("--mask", seg_mask, "object mask")->required();
  segment->add_option("--rows", seg_rows, "grid rows");
  segment->add_option("--cols", seg_cols, "grid columns");

  ExperimentFlags sh_flags;
  std::string estimator = "exact";
  std::uint64_t permutations = 2000;
  auto* shapley = app.add_subcommand("shapley", "Shapley value of every region");
  add_experiment_flags(shapley, sh_flags);
  shapley->add_option("--regions", sh_flags.regions, "region set JSON from 'segment'");
  shapley->add_option("--estimator", estimator, "exact or sampled")->check(CLI::IsMember({"exact", "sampled"}));
  shapley->add_option("--permutations", permutations, "sampled estimator permutations");

  ExperimentFlags ex_flags;
  auto* extract = app.add_subcommand("extract", "find U*, U+ and U-");
  add_experiment_flags(extract, ex_flags);
  extract->add_option("--regions", ex_flags.regions, "region set JSON from 'segment'");
  extract->add_option("--p-th", ex_flags.p_th, "classification threshold");

  ExperimentFlags run_flags;
  std::string scheme_name = "star";
  auto* run = app.add_subcommand("run", "evaluate one transmission scheme");
  add_experiment_flags(run, run_flags);
  run->add_option("--regions", run_flags.regions, "region set JSON from 'segment'");
  run->add_option("--partition", run_flags.partition, "partition JSON from 'extract'");
  run->add_option("--p-th", run_flags.p_th, "classification threshold");
  run->add_option("--scheme", scheme_name, "star, star_pos, star_neg or full");

  ExperimentFlags sw_flags;
  auto* sweep = app.add_subcommand("sweep", "run a config-driven parameter sweep");
  add_experiment_flags(sweep, sw_flags);
  sweep->add_option("--regions", sw_flags.regions, "region set JSON from 'segment'");
  sweep->add_option("--partition", sw_flags.partition, "partition JSON from 'extract'");

  std::uint64_t na_k = 0;
  double na_eps_c = 0.0, na_eps_t = 0.0;
  std::string na_mode = "na";
  bool na_json = false;
  auto* na = app.add_subcommand("na", "minimum blocklength for K bits at a target BER");
  na->add_option("--k", na_k, "information bits")->required();
  na->add_option("--ber-channel", na_eps_c, "channel BER")->required();
  na->add_option("--ber-target", na_eps_t, "target BER")->required();
  na->add_option("--mode", na_mode, "na or ideal")->check(CLI::IsMember({"na", "ideal"}));
  na->add_flag("--json", na_json, "print the full result as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return e.get_exit_code() == 0 ? app.exit(e) : (app.exit(e), 2);
  }

  try {
    if (segment->parsed()) {
      require_file(seg_mask, "mask");
      const auto regions = grid_presegment(load_mask(seg_mask), seg_rows, seg_cols);
      const auto path = output_path(g, "regions.json");
      write_text_file(path, region_set_to_json(regions).dump(2) + "\n");
      std::cout << regions.size() << " regions -> " << path.string() << "\n";
    } else if (shapley->parsed()) {
      const auto c = build_config(sh_flags, g);
      auto in = load_inputs(c, sh_flags.regions, true);
      ShapleyOptions opts = c.shapley;
      opts.permutations = permutations;
      const auto report = region_shapley(context_of(c, in), opts,
                                         estimator == "exact" ? Estimator::exact : Estimator::permutation_sampled);
      const auto path = output_path(g, "shapley.json");
      write_text_file(path, shapley_report_to_json(report).dump(2) + "\n");
      for (std::size_t i = 0; i < report.ids.size(); ++i)
        std::cout << report.ids[i] << ' ' << format_double(report.values[i]) << "\n";
    } else if (extract->parsed()) {
      const auto c = build_config(ex_flags, g);
      auto in = load_inputs(c, ex_flags.regions, true);
      const auto ctx = context_of(c, in);
      const auto seg = algorithm1_segment(ctx, c.p_threshold, c.shapley);
      const auto part = algorithm2_rank(ctx, seg, c.shapley);
      const auto path = output_path(g, "partition.json");
      write_text_file(path, partition_to_json(part, c.profile).dump(2) + "\n");
      std::cout << "U* = region " << part.star_id << " (p_D = " << format_double(part.achieved_probability)
                << "), " << part.positive_regions.size() << " positive, " << part.negative_regions.size()
                << " negative -> " << path.string() << "\n";
    } else if (run->parsed()) {
      const auto c = build_config(run_flags, g);
      auto in = load_inputs(c, run_flags.regions, true);
      const auto part = partition_for(c, in);
      const auto scheme = Scheme::named(scheme_name, c.background_transmitted, c.coding, c.format);
      const auto r = run_scheme(in.image, in.object, part, c.profile, scheme, *in.oracle, c.target,
                                static_cast<std::uint64_t>(c.profile.trials), c.seed);
      const auto path = output_path(g, "run.json");
      write_text_file(path, scheme_result_to_json(r).dump(2) + "\n");
      std::cout << "scheme=" << r.scheme << " p_D=" << format_double(r.p_target) << " K=" << r.raw_bits
                << " N=" << r.channel_bits << " R=" << format_double(r.rate) << " e=" << format_double(r.efficiency)
                << "\n";
    } else if (sweep->parsed()) {
      const auto c = build_config(sw_flags, g);
      if (!c.sweep_variable) throw ConfigError("config has no 'sweep' section");
      SweepConfig sc;
      sc.variable = *c.sweep_variable;
      sc.values = c.sweep_values;
      sc.schemes = schemes_of(c);
      sc.profile = c.profile;
      sc.snr_scale = c.snr_scale;
      sc.trials = static_cast<std::uint64_t>(c.profile.trials);
      sc.seed = c.seed;
      sc.target = c.target;
      for (double v : sc.values) (void)profile_at(sc, v);
      auto in = load_inputs(c, sw_flags.regions, true);
      const auto part = partition_for(c, in);
      const auto rows = run_sweep(in.image, in.object, part, sc, *in.oracle);
      const std::string csv = sweep_csv(rows);
      write_text_file(output_path(g, "sweep.csv"), csv);
      write_text_file(output_path(g, "sweep.json"), sweep_to_json(sc, rows).dump(2) + "\n");
      std::cout << csv;
    } else if (na->parsed()) {
      if (!(na_eps_c > 0.0 && na_eps_c < 0.5) || !(na_eps_t > 0.0 && na_eps_t < na_eps_c)) {
        throw ConfigError("need 0 < ber-target < ber-channel < 0.5");
      }
      const auto mode = na_mode == "na" ? CodingMode::na : CodingMode::ideal;
      if (na_json && mode == CodingMode::na) {
        std::cout << na_result_to_json(na_min_blocklength(na_k, na_eps_c, na_eps_t)).dump(2) << "\n";
      } else {
        std::cout << protected_length(na_k, na_eps_c, na_eps_t, mode) << "\n";
      }
    }
  } catch (const ThresholdUnachievable& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const OracleError& e) {
    std::cerr << "oracle error: " << e.what() << "\n";
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
