#include "gjsscc/shapley.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <thread>

#include "gjsscc/error.hpp"

namespace gjsscc {

namespace {

constexpr int kMaxExactPlayers = 24;

std::size_t best_index(const ShapleyReport& r, std::size_t skip) {
  std::size_t best = r.values.size();
  for (std::size_t i = 0; i < r.values.size(); ++i) {
    if (i == skip) continue;
    if (best == r.values.size() || r.values[i] > r.values[best] ||
        (r.values[i] == r.values[best] && r.ids[i] < r.ids[best])) {
      best = i;
    }
  }
  if (best == r.values.size()) throw DomainError("argmax over an empty player set");
  return best;
}

void check_ids(int n, const std::vector<int>& ids) {
  if (n < 0 || n > 63) throw DomainError("shapley: player count must lie in [0, 63]");
  if (static_cast<int>(ids.size()) != n) throw DomainError("shapley: one id per player required");
}

}  // namespace

std::size_t ShapleyReport::argmax() const { return best_index(*this, values.size()); }
std::size_t ShapleyReport::argmax_excluding(std::size_t skip) const { return best_index(*this, skip); }

double shapley_weight(int n, int k) {
  if (n < 1 || k < 0 || k >= n) throw DomainError("shapley_weight: need 0 <= k < n");
  // 1 / (n * C(n-1, k))
  double binom = 1.0;
  for (int i = 1; i <= k; ++i) binom = binom * (n - k - 1 + i) / i;
  return 1.0 / (n * binom);
}

ShapleyReport shapley_exact(int n, const ValueFunction& value, std::vector<int> ids, int jobs, bool parallel_safe) {
  check_ids(n, ids);
  if (n > kMaxExactPlayers) throw DomainError("shapley_exact: too many players for enumeration");
  const std::size_t size = std::size_t{1} << n;
  std::vector<double> table(size);

  if (parallel_safe && jobs > 1 && size > 1) {
    const auto workers = static_cast<std::size_t>(std::min<std::size_t>(static_cast<std::size_t>(jobs), size));
    std::vector<std::exception_ptr> errors(workers);
    {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          try {
            for (std::size_t c = w; c < size; c += workers) table[c] = value(c);
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
    }
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  } else {
    for (std::size_t c = 0; c < size; ++c) table[c] = value(c);
  }

  ShapleyReport r;
  r.ids = std::move(ids);
  r.values.assign(static_cast<std::size_t>(n), 0.0);
  r.std_errors.assign(static_cast<std::size_t>(n), 0.0);
  r.evaluations.assign(static_cast<std::size_t>(n), size / 2);
  r.estimator = Estimator::exact;
  r.empty_value = table.front();
  r.full_value = table.back();

  std::vector<double> weights(static_cast<std::size_t>(std::max(n, 1)));
  for (int k = 0; k < n; ++k) weights[static_cast<std::size_t>(k)] = shapley_weight(n, k);

  for (int s = 0; s < n; ++s) {
    const std::size_t bit = std::size_t{1} << s;
    double acc = 0.0;
    for (std::size_t c = 0; c < size; ++c) {
      if (c & bit) continue;
      acc += weights[static_cast<std::size_t>(std::popcount(c))] * (table[c | bit] - table[c]);
    }
    r.values[static_cast<std::size_t>(s)] = acc;
  }
  return r;
}

ShapleyReport shapley_sampled(int n, const ValueFunction& value, std::vector<int> ids, std::uint64_t permutations,
                              std::uint64_t seed) {
  check_ids(n, ids);
  if (permutations < 1) throw DomainError("shapley_sampled: need at least one permutation");

  std::map<Coalition, double> memo;
  auto v = [&](Coalition c) {
    auto it = memo.find(c);
    if (it != memo.end()) return it->second;
    const double x = value(c);
    memo.emplace(c, x);
    return x;
  };

  const auto un = static_cast<std::size_t>(n);
  std::vector<double> mean(un, 0.0), m2(un, 0.0);
  std::vector<int> order(un);
  const Coalition all = n == 0 ? 0 : (n == 64 ? ~Coalition{0} : ((Coalition{1} << n) - 1));
  const double empty = v(0);

  for (std::uint64_t m = 0; m < permutations; ++m) {
    std::iota(order.begin(), order.end(), 0);
    RandomStream rng(derive_seed(seed, {m}));
    for (std::size_t i = un; i > 1; --i) std::swap(order[i - 1], order[rng.next_below(i)]);

    Coalition c = 0;
    double prev = empty;
    const double count = static_cast<double>(m + 1);
    for (int p : order) {
      c |= Coalition{1} << p;
      const double cur = v(c);
      const double d = cur - prev;
      prev = cur;
      // Welford update
      auto& mu = mean[static_cast<std::size_t>(p)];
      const double delta = d - mu;
      mu += delta / count;
      m2[static_cast<std::size_t>(p)] += delta * (d - mu);
    }
  }

  ShapleyReport r;
  r.ids = std::move(ids);
  r.values = mean;
  r.std_errors.assign(un, 0.0);
  if (permutations > 1) {
    for (std::size_t i = 0; i < un; ++i) {
      const double var = m2[i] / static_cast<double>(permutations - 1);
      r.std_errors[i] = std::sqrt(var / static_cast<double>(permutations));
    }
  }
  r.evaluations.assign(un, permutations);
  r.estimator = Estimator::permutation_sampled;
  r.permutations = permutations;
  r.empty_value = empty;
  r.full_value = v(all);
  return r;
}

// ---------------------------------------------------------------------------
// Coalition values

std::uint64_t coalition_seed(std::uint64_t master_seed, std::span<const int> treated_ids) {
  std::vector<int> sorted(treated_ids.begin(), treated_ids.end());
  std::sort(sorted.begin(), sorted.end());
  std::uint64_t h = hash_combine(master_seed, std::string_view("coalition"));
  for (int id : sorted) h = hash_combine(h, static_cast<std::uint64_t>(id));
  return hash_combine(h, sorted.size());
}

double evaluate_coalition(const CoalitionContext& ctx, std::span<const int> treated_ids) {
  ctx.profile.validate();
  const Image& img = ctx.image;
  if (!ctx.background.matches(img)) throw DomainError("evaluate_coalition: background mask size mismatch");

  RegionMask treated(img.width(), img.height());
  RegionMask untreated(img.width(), img.height());
  for (int id : treated_ids) {
    if (std::none_of(ctx.regions.begin(), ctx.regions.end(), [id](const Region& r) { return r.id == id; })) {
      throw DomainError("evaluate_coalition: unknown region id " + std::to_string(id));
    }
  }
  for (const auto& r : ctx.regions) {
    const bool in = std::find(treated_ids.begin(), treated_ids.end(), r.id) != treated_ids.end();
    (in ? treated : untreated) |= r.mask;
  }
  if (ctx.transmission.background_transmitted) untreated |= ctx.background;

  const PreparedTransmission prepared =
      prepare_transmission(img, treated, untreated, ctx.profile, ctx.transmission.format);
  const std::uint64_t base_seed = ctx.profile.degenerate() ? coalition_seed(ctx.profile.master_seed, {})
                                                           : coalition_seed(ctx.profile.master_seed, treated_ids);
  double sum = 0.0;
  for (int i = 0; i < ctx.profile.trials; ++i) {
    const Image received = deliver(img, prepared, ctx.profile, derive_seed(base_seed, {static_cast<std::uint64_t>(i)}));
    sum += ctx.oracle.classify(received, ctx.target).target_probability();
  }
  return sum / ctx.profile.trials;
}

CoalitionValues::CoalitionValues(const CoalitionContext& ctx, std::vector<int> player_ids, std::vector<int> forced_ids)
    : ctx_(ctx), players_(std::move(player_ids)), forced_(std::move(forced_ids)) {
  if (players_.size() > 63) throw DomainError("coalition values: too many players");
}

double CoalitionValues::operator()(Coalition c) {
  {
    std::lock_guard lock(mu_);
    auto it = memo_.find(c);
    if (it != memo_.end()) return it->second;
  }
  std::vector<int> ids = forced_;
  for (std::size_t i = 0; i < players_.size(); ++i)
    if (c & (Coalition{1} << i)) ids.push_back(players_[i]);
  const double v = evaluate_coalition(ctx_, ids);
  std::lock_guard lock(mu_);
  memo_.emplace(c, v);
  return v;
}

std::size_t CoalitionValues::evaluated() const {
  std::lock_guard lock(mu_);
  return memo_.size();
}

namespace {

std::vector<int> ids_of(const RegionSet& regions) {
  std::vector<int> ids;
  for (const auto& r : regions) ids.push_back(r.id);
  return ids;
}

ShapleyReport run_game(CoalitionValues& values, std::vector<int> ids, const ShapleyOptions& options,
                       Estimator estimator, std::uint64_t seed) {
  const int n = static_cast<int>(ids.size());
  if (estimator == Estimator::exact) {
    if (n > options.exhaustive_limit) {
      throw DomainError("exact Shapley enumeration over " + std::to_string(n) + " regions exceeds the limit of " +
                        std::to_string(options.exhaustive_limit) + "; use the sampled estimator");
    }
    return shapley_exact(n, values.as_function(), std::move(ids), options.jobs, values.parallel_safe());
  }
  return shapley_sampled(n, values.as_function(), std::move(ids), options.permutations, seed);
}

Estimator pick_estimator(std::size_t n, const ShapleyOptions& options) {
  return static_cast<int>(n) <= options.exhaustive_limit ? Estimator::exact : Estimator::permutation_sampled;
}

}  // namespace

ShapleyReport region_shapley(const CoalitionContext& ctx, const ShapleyOptions& options, Estimator estimator) {
  CoalitionValues values(ctx, ids_of(ctx.regions));
  return run_game(values, ids_of(ctx.regions), options, estimator,
                  hash_combine(ctx.profile.master_seed, std::string_view("permutations")));
}

// ---------------------------------------------------------------------------
// Algorithms 1 and 2

SegmentationResult algorithm1_segment(const CoalitionContext& ctx, double p_threshold, const ShapleyOptions& options) {
  if (ctx.regions.empty()) throw DomainError("algorithm1: no regions");
  if (!(p_threshold > 0.0 && p_threshold < 1.0)) throw DomainError("algorithm1: p_th must lie in (0, 1)");

  SegmentationResult out;
  RegionSet current = ctx.regions;
  for (const auto& r : current) out.members[r.id] = {r.id};
  double best = -1.0;

  for (std::uint64_t iteration = 0;; ++iteration) {
    CoalitionContext local{ctx.image, current, ctx.background, ctx.profile, ctx.transmission, ctx.oracle, ctx.target};
    const auto ids = ids_of(current);
    CoalitionValues values(local, ids);
    ShapleyReport report = run_game(values, ids, options, pick_estimator(ids.size(), options),
                                    derive_seed(hash_combine(ctx.profile.master_seed, std::string_view("alg1")), {iteration}));
    const std::size_t top = report.argmax();
    const double p_top = values(Coalition{1} << top);
    out.trail.push_back(report);
    best = std::max(best, p_top);

    if (p_top > p_threshold) {
      out.star_id = current[top].id;
      out.star_mask = current[top].mask;
      out.star_probability = p_top;
      out.regions = std::move(current);
      return out;
    }
    if (current.size() == 1) throw ThresholdUnachievable(best);

    const std::size_t runner_up = report.argmax_excluding(top);
    const int keep = current[top].id;
    const int drop = current[runner_up].id;
    current[top].mask |= current[runner_up].mask;
    auto& kept = out.members[keep];
    const auto& dropped = out.members[drop];
    kept.insert(kept.end(), dropped.begin(), dropped.end());
    std::sort(kept.begin(), kept.end());
    out.members.erase(drop);
    current.erase(current.begin() + static_cast<std::ptrdiff_t>(runner_up));
  }
}

RegionPartition algorithm2_rank(const CoalitionContext& ctx, const SegmentationResult& segmentation,
                                const ShapleyOptions& options) {
  RegionPartition out;
  out.regions = segmentation.regions;
  out.members = segmentation.members;
  out.star_id = segmentation.star_id;
  out.star_ids = segmentation.members.at(segmentation.star_id);
  out.achieved_probability = segmentation.star_probability;

  std::vector<int> remaining;
  for (const auto& r : out.regions)
    if (r.id != out.star_id) remaining.push_back(r.id);
  out.conditional.estimator = Estimator::exact;
  if (remaining.empty()) return out;

  CoalitionContext local{ctx.image, out.regions, ctx.background, ctx.profile, ctx.transmission, ctx.oracle, ctx.target};
  CoalitionValues values(local, remaining, {out.star_id});
  out.conditional = run_game(values, remaining, options, pick_estimator(remaining.size(), options),
                             hash_combine(ctx.profile.master_seed, std::string_view("alg2")));

  std::vector<std::size_t> order(remaining.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return out.conditional.values[a] > out.conditional.values[b];
  });
  for (std::size_t i : order) {
    const int id = remaining[i];
    const auto& originals = out.members.at(id);
    if (out.conditional.values[i] >= 0.0) {
      out.positive_regions.push_back(id);
      out.positive_ids.insert(out.positive_ids.end(), originals.begin(), originals.end());
    } else {
      out.negative_regions.push_back(id);
      out.negative_ids.insert(out.negative_ids.end(), originals.begin(), originals.end());
    }
  }
  std::sort(out.positive_ids.begin(), out.positive_ids.end());
  std::sort(out.negative_ids.begin(), out.negative_ids.end());
  return out;
}

namespace {

RegionMask union_of(const RegionPartition& p, const std::vector<int>& region_ids) {
  if (p.regions.empty()) return {};
  RegionMask m(p.regions.front().mask.width(), p.regions.front().mask.height());
  for (const auto& r : p.regions)
    if (std::find(region_ids.begin(), region_ids.end(), r.id) != region_ids.end()) m |= r.mask;
  return m;
}

}  // namespace

RegionMask RegionPartition::star_mask() const { return union_of(*this, {star_id}); }
RegionMask RegionPartition::positive_mask() const { return union_of(*this, positive_regions); }
RegionMask RegionPartition::negative_mask() const { return union_of(*this, negative_regions); }

}  // namespace gjsscc
