#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gjsscc/channel.hpp"
#include "gjsscc/classifier.hpp"
#include "gjsscc/shapley.hpp"
#include "gjsscc/transmission.hpp"

namespace gjsscc {

/// Which parts of the image receive (q_t, eps_t) and how streams are coded.
struct Scheme {
  std::string name;
  bool star = true;
  bool positive = false;
  bool negative = false;
  bool background = false;  ///< only meaningful when the background is transmitted
  bool background_transmitted = true;
  CodingMode coding = CodingMode::na;
  StreamFormat format = StreamFormat::codec;

  /// "star" (U*), "star_pos" (U* & U+), "star_neg" (U* & U-), "full" (whole image).
  static Scheme named(std::string_view name, bool background_transmitted = true, CodingMode coding = CodingMode::na,
                      StreamFormat format = StreamFormat::codec);
};

struct TrialRecord {
  std::uint64_t index = 0;
  std::uint64_t seed = 0;
  double p_target = 0.0;
};

struct SchemeResult {
  std::string scheme;
  double p_target = 0.0;           ///< mean p_D over trials
  std::uint64_t raw_bits = 0;      ///< K
  std::uint64_t channel_bits = 0;  ///< N
  double rate = 0.0;               ///< R = K / N
  double efficiency = 0.0;         ///< e = p_D * R
  std::uint64_t treated_source_bits = 0;
  std::uint64_t treated_channel_bits = 0;
  std::uint64_t untreated_bits = 0;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  std::vector<TrialRecord> per_trial;
};

/// Trial t uses seed derive_seed(seed, {t}), independent of the trial count.
SchemeResult run_scheme(const Image& img, const RegionMask& object_mask, const RegionPartition& partition,
                        const CodingProfile& profile, const Scheme& scheme, Oracle& oracle, int target,
                        std::uint64_t trials, std::uint64_t seed);

enum class SweepVariable { ber_target, q_target, channel_gain };

std::string_view to_string(SweepVariable v);
SweepVariable parse_sweep_variable(std::string_view s);

struct SweepConfig {
  SweepVariable variable = SweepVariable::ber_target;
  std::vector<double> values;
  std::vector<Scheme> schemes;
  CodingProfile profile;  ///< base point; the sweep variable overrides one field
  double snr_scale = 1.0; ///< for channel_gain sweeps
  std::uint64_t trials = 8;
  std::uint64_t seed = 0;
  int target = 1;
};

struct SweepRow {
  double sweep_value = 0.0;
  SchemeResult result;
};

/// Profile at one grid point; throws ConfigError for an invalid point.
CodingProfile profile_at(const SweepConfig& config, double value);

/// Validates every grid point first, then runs each (scheme, point) pair.
/// Rows are ordered by scheme, then by grid value as listed.
std::vector<SweepRow> run_sweep(const Image& img, const RegionMask& object_mask, const RegionPartition& partition,
                                const SweepConfig& config, Oracle& oracle);

/// Fixed columns: scheme,sweep_value,p_D,K,N,R,e,trials,seed.
std::string sweep_csv(const std::vector<SweepRow>& rows);

/// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace gjsscc
