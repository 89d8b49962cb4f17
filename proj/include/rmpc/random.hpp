#pragma once

#include <cmath>
#include <cstdint>

#include <Eigen/Dense>

namespace rmpc {

/// Small self-contained PRNG (splitmix64) with a Box-Muller Gaussian
/// transform. The stream depends only on the 64-bit seed, so runs are
/// reproducible byte-for-byte on a given build regardless of the
/// standard library's distribution implementations.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in (lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    /// Standard normal deviate.
    double next_gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        // Box-Muller; u1 in (0,1] so the log is finite.
        double u1 = 1.0 - next_double();
        double u2 = next_double();
        double mag = std::sqrt(-2.0 * std::log(u1));
        double ang = 2.0 * M_PI * u2;
        spare_ = mag * std::sin(ang);
        has_spare_ = true;
        return mag * std::cos(ang);
    }

    Eigen::VectorXd gaussian_vector(Eigen::Index n) {
        Eigen::VectorXd v(n);
        for (Eigen::Index i = 0; i < n; ++i) v(i) = next_gaussian();
        return v;
    }

  private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace rmpc
