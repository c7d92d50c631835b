#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <span>
#include <vector>

#include "gjsscc/classifier.hpp"
#include "gjsscc/imaging.hpp"
#include "gjsscc/transmission.hpp"

namespace gjsscc {

/// Bit i set means player i (the i-th region of the current list) is treated.
using Coalition = std::uint64_t;
using ValueFunction = std::function<double(Coalition)>;

enum class Estimator { exact, permutation_sampled };

struct ShapleyReport {
  std::vector<int> ids;            ///< region id of each player
  std::vector<double> values;      ///< v_s
  std::vector<double> std_errors;  ///< sampled estimator only; zero for exact
  std::vector<std::uint64_t> evaluations;  ///< marginal contributions accumulated per region
  Estimator estimator = Estimator::exact;
  std::uint64_t permutations = 0;
  double empty_value = 0.0;  ///< v(empty set)
  double full_value = 0.0;   ///< v(all players)

  /// Index of the largest value; ties go to the smallest id.
  std::size_t argmax() const;
  /// Largest value excluding index `skip`; ties go to the smallest id.
  std::size_t argmax_excluding(std::size_t skip) const;
};

struct ShapleyOptions {
  int exhaustive_limit = 12;
  std::uint64_t permutations = 2000;  ///< used when the sampled estimator is required
  int jobs = 1;                       ///< parallel coalition evaluations (thread-safe oracles only)
};

/// Weight |A|! (n - |A| - 1)! / n! of a coalition of size k among n players.
double shapley_weight(int n, int k);

/// Exact Shapley values of an n-player game by full enumeration. The value
/// function is called exactly once per coalition, in ascending mask order
/// (or split across `jobs` threads when `parallel_safe`).
ShapleyReport shapley_exact(int n, const ValueFunction& value, std::vector<int> ids, int jobs = 1,
                            bool parallel_safe = false);

/// Permutation-sampling estimator over `permutations` uniformly drawn orders.
/// Coalition values are memoised, so each distinct coalition is evaluated once.
ShapleyReport shapley_sampled(int n, const ValueFunction& value, std::vector<int> ids, std::uint64_t permutations,
                              std::uint64_t seed);

/// Everything needed to evaluate p_D of a reconstructed image U(A).
struct CoalitionContext {
  const Image& image;
  const RegionSet& regions;
  const RegionMask& background;
  const CodingProfile& profile;
  TransmissionOptions transmission;
  Oracle& oracle;
  int target = 1;
};

/// Mean p_D over profile.trials noise realisations of U(A): regions whose ids
/// are in `treated_ids` get (q_t, eps_t), the remaining regions and the
/// background get (q_b, eps_c). Realisation i is seeded from
/// (master_seed, sorted ids of A, i), so the value never depends on call order.
double evaluate_coalition(const CoalitionContext& ctx, std::span<const int> treated_ids);

/// Seed shared by all realisations of one coalition.
std::uint64_t coalition_seed(std::uint64_t master_seed, std::span<const int> treated_ids);

/// Memoising value function over the players of ctx.regions. `forced_ids`
/// are added to every coalition (the conditional game of the ranking step).
class CoalitionValues {
 public:
  CoalitionValues(const CoalitionContext& ctx, std::vector<int> player_ids, std::vector<int> forced_ids = {});

  double operator()(Coalition c);
  ValueFunction as_function() {
    return [this](Coalition c) { return (*this)(c); };
  }
  bool parallel_safe() const { return ctx_.oracle.concurrent(); }
  std::size_t evaluated() const;

 private:
  const CoalitionContext& ctx_;
  std::vector<int> players_;
  std::vector<int> forced_;
  mutable std::mutex mu_;
  std::map<Coalition, double> memo_;
};

/// Shapley values of the regions in ctx.regions; exact up to the exhaustive
/// limit, permutation-sampled above it.
ShapleyReport region_shapley(const CoalitionContext& ctx, const ShapleyOptions& options,
                             Estimator estimator = Estimator::exact);

struct SegmentationResult {
  RegionSet regions;                       ///< S-bar: region set after merges
  std::map<int, std::vector<int>> members; ///< merged id -> original ids
  int star_id = 0;
  RegionMask star_mask;
  double star_probability = 0.0;  ///< p_D of U({star})
  std::vector<ShapleyReport> trail;
};

/// Shapley-driven merging until the top region alone exceeds p_th.
/// Throws ThresholdUnachievable once a single merged region still falls short.
SegmentationResult algorithm1_segment(const CoalitionContext& ctx, double p_threshold,
                                      const ShapleyOptions& options = {});

struct RegionPartition {
  RegionSet regions;                        ///< S-bar
  std::map<int, std::vector<int>> members;  ///< S-bar id -> original ids
  int star_id = 0;
  std::vector<int> star_ids;      ///< S*, original ids
  std::vector<int> positive_ids;  ///< S+, original ids
  std::vector<int> negative_ids;  ///< S-, original ids
  std::vector<int> positive_regions;  ///< S-bar ids ranked v >= 0
  std::vector<int> negative_regions;  ///< S-bar ids ranked v < 0
  double achieved_probability = 0.0;
  ShapleyReport conditional;  ///< conditional values of the remaining regions

  RegionMask star_mask() const;
  RegionMask positive_mask() const;
  RegionMask negative_mask() const;
};

/// Ranks S-bar minus the star by conditional Shapley value with the star
/// always treated: v >= 0 goes to S+, v < 0 to S-.
RegionPartition algorithm2_rank(const CoalitionContext& ctx, const SegmentationResult& segmentation,
                                const ShapleyOptions& options = {});

}  // namespace gjsscc
