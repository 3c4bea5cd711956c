#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace nslit {

// Counter-based uniform substreams: draw k of a stream never depends on draw
// k-1, so ensembles can be sampled and integrated in any order (or in
// parallel) with bit-identical results. SplitMix64 finalizer underneath.
std::uint64_t substream_u64(std::uint64_t seed, std::uint64_t index);
double substream_uniform(std::uint64_t seed, std::uint64_t index);  // in [0, 1)

// FNV-1a 64-bit content checksum, used by the run manifest.
std::uint64_t fnv1a64(std::string_view bytes);

// Trapezoid rule on a uniform grid.
double trapezoid(std::span<const double> values, double dx);

// Two-sided Kolmogorov-Smirnov statistic of `samples` (any order) against a
// CDF given as a callable.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

// Piecewise-linear CDF table on a uniform grid, built from nonnegative
// density samples. Supports evaluation and inverse (quantile) lookup.
class CdfTable {
  public:
    CdfTable(std::vector<double> x, std::span<const double> density);

    double cdf(double x) const;
    double quantile(double u) const;  // u in [0, 1]
    double total_mass() const { return total_; }

  private:
    std::vector<double> x_;
    std::vector<double> cum_;  // normalized, cum_.front() == 0, back() == 1
    double total_ = 0.0;
};

// Index range [first, last] of the smallest central window holding `mass`
// of the (nonnegative) density samples.
struct IndexRange {
    std::size_t first = 0;
    std::size_t last = 0;
};
IndexRange central_mass_region(std::span<const double> density, double mass);

// Strict interior local minima of a sampled curve (plateaus resolved to their
// midpoint). Used to locate interference minima in intensity profiles.
std::vector<std::size_t> local_minima(std::span<const double> values);

}  // namespace nslit
