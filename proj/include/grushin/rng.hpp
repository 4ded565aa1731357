#pragma once
// Counter-based random stream. Every draw is a pure function of
// (seed, counter), so ensemble runs are reproducible regardless of
// thread count or evaluation order.

#include <cstdint>
#include <span>
#include <vector>

namespace grushin {

class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    // Stream for ensemble run `run_index` derived from a master seed.
    static CounterRng for_run(std::uint64_t master_seed, std::uint64_t run_index);

    std::uint64_t next_u64();
    double uniform01();                       // in [0, 1)
    double uniform(double lo, double hi);
    double gaussian();                        // standard normal, Box-Muller

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_ = 0;
    std::uint64_t counter_ = 0;
    bool have_cached_ = false;
    double cached_ = 0.0;
};

// Additive Gaussian perturbation with standard deviation level * RMS(data).
// level == 0 returns the data unchanged.
std::vector<double> noise_inject(std::span<const double> data, double level, std::uint64_t seed);

} // namespace grushin
