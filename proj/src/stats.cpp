#include "nslit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nslit {

namespace {

std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t substream_u64(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t state = seed ^ (index * 0xDA942042E4DD58B5ULL);
    splitmix64_next(state);  // decorrelate nearby (seed, index) pairs
    return splitmix64_next(state);
}

double substream_uniform(std::uint64_t seed, std::uint64_t index) {
    return static_cast<double>(substream_u64(seed, index) >> 11) * 0x1.0p-53;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

double trapezoid(std::span<const double> values, double dx) {
    if (values.size() < 2) return 0.0;
    double s = 0.5 * (values.front() + values.back());
    for (std::size_t i = 1; i + 1 < values.size(); ++i) s += values[i];
    return s * dx;
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw std::invalid_argument("ks_statistic: empty sample");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    }
    return d;
}

CdfTable::CdfTable(std::vector<double> x, std::span<const double> density) : x_(std::move(x)) {
    if (x_.size() != density.size() || x_.size() < 2)
        throw std::invalid_argument("CdfTable: need matching grids with >= 2 points");
    cum_.resize(x_.size(), 0.0);
    for (std::size_t i = 1; i < x_.size(); ++i) {
        const double d0 = std::max(density[i - 1], 0.0);
        const double d1 = std::max(density[i], 0.0);
        cum_[i] = cum_[i - 1] + 0.5 * (d0 + d1) * (x_[i] - x_[i - 1]);
    }
    total_ = cum_.back();
    if (!(total_ > 0.0))
        throw std::invalid_argument("CdfTable: density integrates to zero (field not normalizable)");
    for (double& c : cum_) c /= total_;
    cum_.front() = 0.0;
    cum_.back() = 1.0;
}

double CdfTable::cdf(double x) const {
    if (x <= x_.front()) return 0.0;
    if (x >= x_.back()) return 1.0;
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    const std::size_t j = static_cast<std::size_t>(it - x_.begin()) - 1;
    const double w = (x - x_[j]) / (x_[j + 1] - x_[j]);
    return cum_[j] + w * (cum_[j + 1] - cum_[j]);
}

double CdfTable::quantile(double u) const {
    u = std::clamp(u, 0.0, 1.0);
    auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
    if (it == cum_.begin()) return x_.front();
    if (it == cum_.end()) return x_.back();
    std::size_t j = static_cast<std::size_t>(it - cum_.begin()) - 1;
    // skip zero-density plateaus
    while (j + 1 < cum_.size() && cum_[j + 1] == cum_[j]) ++j;
    if (j + 1 >= cum_.size()) return x_.back();
    const double w = (u - cum_[j]) / (cum_[j + 1] - cum_[j]);
    return x_[j] + w * (x_[j + 1] - x_[j]);
}

IndexRange central_mass_region(std::span<const double> density, double mass) {
    if (density.empty()) throw std::invalid_argument("central_mass_region: empty density");
    const double total = [&] {
        double s = 0.0;
        for (double d : density) s += std::max(d, 0.0);
        return s;
    }();
    if (!(total > 0.0)) throw std::invalid_argument("central_mass_region: zero density");
    const double tail = 0.5 * (1.0 - mass) * total;
    std::size_t first = 0, last = density.size() - 1;
    double acc = 0.0;
    while (first < last && acc + std::max(density[first], 0.0) < tail)
        acc += std::max(density[first++], 0.0);
    acc = 0.0;
    while (last > first && acc + std::max(density[last], 0.0) < tail)
        acc += std::max(density[last--], 0.0);
    return IndexRange{first, last};
}

std::vector<std::size_t> local_minima(std::span<const double> values) {
    std::vector<std::size_t> out;
    const std::size_t n = values.size();
    std::size_t i = 1;
    while (i + 1 < n) {
        if (values[i] < values[i - 1] && values[i] <= values[i + 1]) {
            std::size_t j = i;
            while (j + 1 < n && values[j + 1] == values[i]) ++j;  // plateau
            if (j + 1 < n && values[j + 1] > values[i]) out.push_back((i + j) / 2);
            i = j + 1;
        } else {
            ++i;
        }
    }
    return out;
}

}  // namespace nslit
