#include "grushin/rng.hpp"

#include <cmath>
#include <numbers>

namespace grushin {

namespace {

// splitmix64 finalizer
std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace

CounterRng CounterRng::for_run(std::uint64_t master_seed, std::uint64_t run_index) {
    return CounterRng(mix64(master_seed ^ mix64(run_index * 0x9e3779b97f4a7c15ULL + 1)));
}

std::uint64_t CounterRng::next_u64() {
    return mix64(seed_ + 0x9e3779b97f4a7c15ULL * ++counter_);
}

double CounterRng::uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double CounterRng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
}

double CounterRng::gaussian() {
    if (have_cached_) {
        have_cached_ = false;
        return cached_;
    }
    // Box-Muller; guard against log(0).
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    cached_ = r * std::sin(theta);
    have_cached_ = true;
    return r * std::cos(theta);
}

std::vector<double> noise_inject(std::span<const double> data, double level, std::uint64_t seed) {
    std::vector<double> out(data.begin(), data.end());
    if (level == 0.0 || data.empty()) return out;

    double sumsq = 0.0;
    for (double v : data) sumsq += v * v;
    const double rms = std::sqrt(sumsq / static_cast<double>(data.size()));
    const double sigma = level * rms;

    CounterRng rng(seed);
    for (double& v : out) v += sigma * rng.gaussian();
    return out;
}

} // namespace grushin
