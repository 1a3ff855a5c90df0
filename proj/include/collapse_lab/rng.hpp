#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "collapse_lab/errors.hpp"

namespace collapse_lab {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Replica seed derivation. Depends only on (master, index), so results are
// independent of execution order and thread count.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t s = master ^ (0x9E3779B97F4A7C15ull * (index + 1));
    return splitmix64(s);
}

// mt19937_64 engine with fixed value mappings. The std distributions are
// implementation-defined, which would break the bit-identical replay
// contract, so the few mappings needed are spelled out here.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // Uniform in (0, 1]; safe as a log argument.
    double uniform_pos() { return 1.0 - uniform(); }

    // Exponential waiting time with the given rate.
    double exponential(double rate) {
        if (!(rate > 0.0)) throw DomainError("exponential rate must be positive");
        return -std::log(uniform_pos()) / rate;
    }

    // Standard normal via Box-Muller (fixed draw count: two uniforms per pair).
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform_pos();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    // Uniform integer in {0, ..., n-1}.
    int uniform_int(int n) {
        if (n <= 0) throw DomainError("uniform_int needs n > 0");
        int k = static_cast<int>(uniform() * n);
        return k < n ? k : n - 1;
    }

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Inclusive prefix sums for categorical sampling.
inline std::vector<double> cumulative_weights(const std::vector<double>& weights) {
    std::vector<double> cdf(weights.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i] > 0.0 ? weights[i] : 0.0;
        cdf[i] = acc;
    }
    return cdf;
}

// Draws an index from the cumulative table; u is uniform in [0, 1).
inline std::size_t sample_categorical(const std::vector<double>& cdf, double u) {
    if (cdf.empty() || !(cdf.back() > 0.0))
        throw DegenerateInputError("categorical sampling from all-zero weights");
    const double target = u * cdf.back();
    std::size_t lo = 0, hi = cdf.size() - 1;
    while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (cdf[mid] <= target)
            lo = mid + 1;
        else
            hi = mid;
    }
    return lo;
}

}  // namespace collapse_lab
