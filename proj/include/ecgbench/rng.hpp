#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace ecgbench {

/// Seeded random stream. Wraps mt19937_64 with a 53-bit uniform and a
/// Box-Muller normal transform so the draw sequence is identical across
/// platforms for a given (seed, algorithm_id). No global state.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed,
                       std::string algorithm_id = "mt19937_64-boxmuller")
        : seed_(seed), algorithm_id_(std::move(algorithm_id)), engine_(seed) {
        if (algorithm_id_ != "mt19937_64-boxmuller") {
            throw std::invalid_argument("RngStream: unknown algorithm_id '" +
                                        algorithm_id_ + "'");
        }
    }

    std::uint64_t seed() const { return seed_; }
    const std::string& algorithm_id() const { return algorithm_id_; }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform draw in [0,1) with 53 bits of mantissa.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform draw in [lo,hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0,n). n must be positive.
    std::size_t uniform_int(std::size_t n) {
        if (n == 0) throw std::invalid_argument("RngStream: uniform_int(0)");
        return static_cast<std::size_t>(engine_() % n);
    }

    /// Standard normal via Box-Muller; the second value of each pair is
    /// cached so draws stay sequence-deterministic.
    double standard_normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        // 1-uniform() keeps u1 in (0,1], so log(u1) is finite.
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    double normal(double mean, double stddev) {
        if (stddev < 0.0) throw std::invalid_argument("RngStream: negative stddev");
        if (stddev == 0.0) return mean;
        return mean + stddev * standard_normal();
    }

private:
    std::uint64_t seed_;
    std::string algorithm_id_;
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace ecgbench
