#include "gjsscc/pipeline.hpp"

#include <charconv>
#include <sstream>

#include "gjsscc/error.hpp"

namespace gjsscc {

Scheme Scheme::named(std::string_view name, bool background_transmitted, CodingMode coding, StreamFormat format) {
  Scheme s;
  s.name = std::string(name);
  s.background_transmitted = background_transmitted;
  s.coding = coding;
  s.format = format;
  if (name == "star") {
  } else if (name == "star_pos") {
    s.positive = true;
  } else if (name == "star_neg") {
    s.negative = true;
  } else if (name == "full") {
    s.positive = s.negative = true;
    s.background = background_transmitted;
  } else {
    throw ConfigError("unknown scheme '" + std::string(name) + "' (expected star, star_pos, star_neg or full)");
  }
  return s;
}

SchemeResult run_scheme(const Image& img, const RegionMask& object_mask, const RegionPartition& partition,
                        const CodingProfile& profile, const Scheme& scheme, Oracle& oracle, int target,
                        std::uint64_t trials, std::uint64_t seed) {
  profile.validate();
  if (trials < 1) throw DomainError("run_scheme: trials must be >= 1");
  if (!object_mask.matches(img)) throw DomainError("run_scheme: object mask size mismatch");
  validate(partition.regions, object_mask);

  const RegionMask background = object_mask.complement();
  RegionMask treated(img.width(), img.height());
  if (scheme.star) treated |= partition.star_mask();
  if (scheme.positive && !partition.positive_regions.empty()) treated |= partition.positive_mask();
  if (scheme.negative && !partition.negative_regions.empty()) treated |= partition.negative_mask();
  if (scheme.background && scheme.background_transmitted) treated |= background;

  RegionMask untreated = object_mask;
  if (scheme.background_transmitted) untreated |= background;
  untreated.subtract(treated);

  const PreparedTransmission prepared = prepare_transmission(img, treated, untreated, profile, scheme.format);

  SchemeResult out;
  out.scheme = scheme.name;
  out.raw_bits = img.raw_bits();
  out.treated_source_bits = prepared.treated_bits();
  out.treated_channel_bits =
      protected_length(prepared.treated_bits(), profile.ber_channel, profile.ber_target, scheme.coding);
  out.untreated_bits = prepared.untreated_bits();
  out.channel_bits = out.treated_channel_bits + out.untreated_bits;
  out.trials = trials;
  out.seed = seed;

  double sum = 0.0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    const std::uint64_t trial_seed = derive_seed(seed, {t});
    const Image received = deliver(img, prepared, profile, trial_seed);
    const double p = oracle.classify(received, target).target_probability();
    out.per_trial.push_back({t, trial_seed, p});
    sum += p;
  }
  out.p_target = sum / static_cast<double>(trials);
  if (out.channel_bits == 0) throw DomainError("run_scheme: nothing to transmit");
  out.rate = static_cast<double>(out.raw_bits) / static_cast<double>(out.channel_bits);
  out.efficiency = out.p_target * out.rate;
  return out;
}

std::string_view to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::ber_target: return "eps_t";
    case SweepVariable::q_target: return "q_t";
    case SweepVariable::channel_gain: return "gain";
  }
  return "?";
}

SweepVariable parse_sweep_variable(std::string_view s) {
  if (s == "eps_t") return SweepVariable::ber_target;
  if (s == "q_t") return SweepVariable::q_target;
  if (s == "gain") return SweepVariable::channel_gain;
  throw ConfigError("unknown sweep variable '" + std::string(s) + "' (expected eps_t, q_t or gain)");
}

CodingProfile profile_at(const SweepConfig& config, double value) {
  CodingProfile p = config.profile;
  switch (config.variable) {
    case SweepVariable::ber_target: p.ber_target = value; break;
    case SweepVariable::q_target:
      if (value != static_cast<double>(static_cast<int>(value))) throw ConfigError("q_t grid values must be integers");
      p.q_target = static_cast<int>(value);
      break;
    case SweepVariable::channel_gain:
      if (!(value > 0.0)) throw ConfigError("channel gain grid values must be positive");
      p.ber_channel = bpsk_ber({value, config.snr_scale});
      break;
  }
  if (!(p.ber_target > 0.0 && p.ber_target < p.ber_channel)) {
    throw ConfigError("sweep point " + format_double(value) + ": need 0 < eps_t < eps_c (eps_t = " +
                      format_double(p.ber_target) + ", eps_c = " + format_double(p.ber_channel) + ")");
  }
  try {
    p.validate();
  } catch (const DomainError& e) {
    throw ConfigError("sweep point " + format_double(value) + ": " + e.what());
  }
  return p;
}

std::vector<SweepRow> run_sweep(const Image& img, const RegionMask& object_mask, const RegionPartition& partition,
                                const SweepConfig& config, Oracle& oracle) {
  if (config.values.empty()) throw ConfigError("sweep: empty grid");
  if (config.schemes.empty()) throw ConfigError("sweep: no schemes");
  std::vector<CodingProfile> profiles;
  for (double v : config.values) profiles.push_back(profile_at(config, v));

  std::vector<SweepRow> rows;
  for (const auto& scheme : config.schemes) {
    for (std::size_t i = 0; i < config.values.size(); ++i) {
      rows.push_back({config.values[i], run_scheme(img, object_mask, partition, profiles[i], scheme, oracle,
                                                   config.target, config.trials, config.seed)});
    }
  }
  return rows;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::logic_error("format_double failed");
  return std::string(buf, ptr);
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "scheme,sweep_value,p_D,K,N,R,e,trials,seed\n";
  for (const auto& row : rows) {
    const auto& r = row.result;
    os << r.scheme << ',' << format_double(row.sweep_value) << ',' << format_double(r.p_target) << ',' << r.raw_bits
       << ',' << r.channel_bits << ',' << format_double(r.rate) << ',' << format_double(r.efficiency) << ','
       << r.trials << ',' << r.seed << '\n';
  }
  return os.str();
}

}  // namespace gjsscc
