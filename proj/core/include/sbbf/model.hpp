#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace sbbf {

/// The range of false-positive rates the eight-lane layout covers
/// efficiently; sizing outside it still works but is flagged.
inline constexpr double kEfficientFppMin = 0.004;
inline constexpr double kEfficientFppMax = 0.19;

/// False-positive probability of a split block filter holding an average of
/// `a` distinct hash values per block:
///
///   sum_{i>=0} Poisson_a(i) * (1 - (31/32)^i)^8
///
/// The Poisson pmf is evaluated in log space and the series is truncated
/// once the remaining tail mass contributes less than 1e-12 of the result.
/// Throws std::domain_error for negative, non-finite, or absurdly large a.
double sbbf_fpp(double a);

/// Monte-Carlo estimate of the same quantity using the real filter code:
/// every block receives Poisson(a)-many uniformly distributed insertions,
/// then `trials` absent hashes are queried. The independent oracle for
/// sbbf_fpp; deterministic for a given seed on every platform.
double sbbf_fpp_mc(double a, std::uint64_t blocks, std::uint64_t trials, std::uint64_t seed);

/// Classic Bloom filter false-positive rate (1 - e^{-k/bits_per_key})^k.
double standard_bloom_fpp(double bits_per_key, unsigned k);

/// The integer k >= 1 minimizing standard_bloom_fpp at this density.
unsigned optimal_bloom_k(double bits_per_key);

/// standard_bloom_fpp at the optimal integer k.
double standard_bloom_fpp_optimal(double bits_per_key);

/// The real-valued-k closed form 2^{-bits_per_key * ln 2}, reported
/// alongside the integer-k figure.
double standard_bloom_fpp_real_k(double bits_per_key);

/// Inverts sbbf_fpp by bisection on a over [1e-3, 1e3] (the function is
/// strictly increasing) to within 1e-9.
double solve_a_for_fpp(double target_fpp);

struct SizingResult {
  std::uint64_t num_buckets = 0;
  std::uint64_t bytes = 0;
  double predicted_fpp = 0.0;          ///< sbbf_fpp(ndv / num_buckets)
  double a = 0.0;                      ///< ndv / num_buckets
  bool outside_efficient_range = false;
};

/// Smallest bucket count whose predicted false-positive rate meets the
/// target. Throws std::domain_error unless 0 < target_fpp < 1 and ndv >= 1.
SizingResult size_for(std::uint64_t ndv, double target_fpp);

struct FppRatioRow {
  double a = 0.0;
  double bits_per_key = 0.0;   ///< 256 / a, the same n and m as the split filter
  double sbbf = 0.0;           ///< sbbf_fpp(a)
  double standard = 0.0;       ///< standard_bloom_fpp(256/a, optimal integer k)
  double ratio = 0.0;          ///< sbbf / standard
};

struct FppRatioReport {
  std::vector<FppRatioRow> rows;
  double max_ratio = 0.0;
};

/// Compares the split filter against a standard Bloom filter given the same
/// number of keys and bits, over a grid of per-block densities.
FppRatioReport within_2x_report(std::span<const double> a_grid);

}  // namespace sbbf
