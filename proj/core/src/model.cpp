#include "sbbf/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "sbbf/filter.hpp"

namespace sbbf {

namespace {

constexpr double kLaneKeepRatio = 31.0 / 32.0;
constexpr double kMaxModelA = 1e6;

// (1 - (31/32)^i)^8: the false-positive rate of one block holding exactly i
// distinct hash values, assuming independent uniform lane bits.
double block_fpp_at_count(double keep_pow_i) {
  const double one_lane = 1.0 - keep_pow_i;
  double r = one_lane * one_lane;  // ^2
  r *= r;                          // ^4
  return r * r;                    // ^8
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Knuth inversion; fine for the per-block rates this oracle runs at.
std::uint64_t poisson_sample(double mean, std::mt19937_64& rng) {
  const double limit = std::exp(-mean);
  std::uint64_t count = 0;
  double product = uniform01(rng);
  while (product > limit) {
    ++count;
    product *= uniform01(rng);
  }
  return count;
}

// A uniformly distributed hash conditioned on landing in bucket `index`:
// the preimage of block_index(., num_buckets) for bucket b is the interval
// [b * 2^64 / B, (b+1) * 2^64 / B), sampled via floor((b * 2^64 + r) / B).
std::uint64_t hash_for_bucket(std::uint64_t index, std::uint64_t num_buckets,
                              std::mt19937_64& rng) {
#if defined(__SIZEOF_INT128__)
  const unsigned __int128 numer =
      (static_cast<unsigned __int128>(index) << 64) | rng();
  std::uint64_t hash = static_cast<std::uint64_t>(numer / num_buckets);
  while (block_index(hash, num_buckets) != index) {
    ++hash;  // floor rounding can undershoot by one bucket at the boundary
  }
  return hash;
#else
  // Without 128-bit division, rejection-sample; acceptable for an oracle.
  for (;;) {
    const std::uint64_t hash = rng();
    if (block_index(hash, num_buckets) == index) {
      return hash;
    }
  }
#endif
}

void check_a(double a) {
  if (!std::isfinite(a) || a < 0.0) {
    throw std::domain_error("per-block density a must be finite and nonnegative");
  }
  if (a > kMaxModelA) {
    throw std::domain_error("per-block density a is beyond the model's sanity bound");
  }
}

}  // namespace

double sbbf_fpp(double a) {
  check_a(a);
  if (a == 0.0) {
    return 0.0;
  }
  const double log_a = std::log(a);
  const std::uint64_t cap =
      static_cast<std::uint64_t>(std::ceil(a + 40.0 * std::sqrt(a) + 64.0));
  double sum = 0.0;
  double keep_pow_i = 1.0;  // (31/32)^i, maintained incrementally
  for (std::uint64_t i = 0; i <= cap; ++i) {
    const double di = static_cast<double>(i);
    const double log_pmf = di * log_a - a - std::lgamma(di + 1.0);
    sum += std::exp(log_pmf) * block_fpp_at_count(keep_pow_i);
    keep_pow_i *= kLaneKeepRatio;
    if (di > a && sum > 0.0) {
      // Chernoff bound on the Poisson tail; the inner factor is <= 1, so the
      // tail mass bounds the truncation error directly.
      const double log_tail = di - a - di * std::log(di / a);
      if (log_tail < std::log(1e-12 * sum)) {
        break;
      }
    }
  }
  return std::min(sum, 1.0);
}

double sbbf_fpp_mc(double a, std::uint64_t blocks, std::uint64_t trials, std::uint64_t seed) {
  check_a(a);
  if (blocks < 1 || trials < 1) {
    throw std::domain_error("sbbf_fpp_mc needs at least one block and one trial");
  }
  if (a > 500.0) {
    throw std::domain_error("sbbf_fpp_mc supports densities up to 500");
  }
  std::mt19937_64 rng(seed);
  SplitBlockFilter filter(blocks);
  if (a > 0.0) {
    for (std::uint64_t b = 0; b < blocks; ++b) {
      const std::uint64_t count = poisson_sample(a, rng);
      for (std::uint64_t i = 0; i < count; ++i) {
        filter.add_hash(hash_for_bucket(b, blocks, rng));
      }
    }
  }
  std::uint64_t hits = 0;
  for (std::uint64_t i = 0; i < trials; ++i) {
    hits += filter.find_hash(rng()) ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(trials);
}

double standard_bloom_fpp(double bits_per_key, unsigned k) {
  if (!std::isfinite(bits_per_key) || bits_per_key <= 0.0) {
    throw std::domain_error("bits_per_key must be positive");
  }
  if (k < 1) {
    throw std::domain_error("k must be at least 1");
  }
  const double per_probe = 1.0 - std::exp(-static_cast<double>(k) / bits_per_key);
  return std::pow(per_probe, static_cast<double>(k));
}

unsigned optimal_bloom_k(double bits_per_key) {
  if (!std::isfinite(bits_per_key) || bits_per_key <= 0.0) {
    throw std::domain_error("bits_per_key must be positive");
  }
  const unsigned k_max = std::max(
      16u, static_cast<unsigned>(std::ceil(bits_per_key * std::numbers::ln2)) + 2);
  unsigned best_k = 1;
  double best = standard_bloom_fpp(bits_per_key, 1);
  for (unsigned k = 2; k <= k_max; ++k) {
    const double fpp = standard_bloom_fpp(bits_per_key, k);
    if (fpp < best) {
      best = fpp;
      best_k = k;
    }
  }
  return best_k;
}

double standard_bloom_fpp_optimal(double bits_per_key) {
  return standard_bloom_fpp(bits_per_key, optimal_bloom_k(bits_per_key));
}

double standard_bloom_fpp_real_k(double bits_per_key) {
  if (!std::isfinite(bits_per_key) || bits_per_key <= 0.0) {
    throw std::domain_error("bits_per_key must be positive");
  }
  return std::exp2(-bits_per_key * std::numbers::ln2);
}

double solve_a_for_fpp(double target_fpp) {
  if (!std::isfinite(target_fpp) || target_fpp <= 0.0 || target_fpp >= 1.0) {
    throw std::domain_error("target_fpp must lie strictly between 0 and 1");
  }
  double lo = 1e-3;
  double hi = 1e3;
  while (hi - lo > 1e-9) {
    const double mid = 0.5 * (lo + hi);
    if (sbbf_fpp(mid) < target_fpp) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

SizingResult size_for(std::uint64_t ndv, double target_fpp) {
  if (ndv < 1) {
    throw std::domain_error("ndv must be at least 1");
  }
  if (!std::isfinite(target_fpp) || target_fpp <= 0.0 || target_fpp >= 1.0) {
    throw std::domain_error("target_fpp must lie strictly between 0 and 1");
  }
  const double a_target = solve_a_for_fpp(target_fpp);
  const double n = static_cast<double>(ndv);
  std::uint64_t buckets =
      std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(n / a_target)));
  while (sbbf_fpp(n / static_cast<double>(buckets)) > target_fpp) {
    ++buckets;
  }
  while (buckets > 1 && sbbf_fpp(n / static_cast<double>(buckets - 1)) <= target_fpp) {
    --buckets;
  }
  SizingResult result;
  result.num_buckets = buckets;
  result.bytes = buckets * kBlockBytes;
  result.a = n / static_cast<double>(buckets);
  result.predicted_fpp = sbbf_fpp(result.a);
  result.outside_efficient_range =
      target_fpp < kEfficientFppMin || target_fpp > kEfficientFppMax;
  return result;
}

FppRatioReport within_2x_report(std::span<const double> a_grid) {
  FppRatioReport report;
  report.rows.reserve(a_grid.size());
  for (const double a : a_grid) {
    FppRatioRow row;
    row.a = a;
    if (a <= 0.0) {
      // An empty filter: both rates are zero, no meaningful ratio.
      check_a(a);
      report.rows.push_back(row);
      continue;
    }
    row.bits_per_key = static_cast<double>(kBlockBits) / a;
    row.sbbf = sbbf_fpp(a);
    row.standard = standard_bloom_fpp_optimal(row.bits_per_key);
    row.ratio = row.sbbf / row.standard;
    report.max_ratio = std::max(report.max_ratio, row.ratio);
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace sbbf
