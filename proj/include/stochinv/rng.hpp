#pragma once

#include "stochinv/types.hpp"

#include <cstdint>
#include <random>

namespace stochinv {

/// Seeded random stream. One named stream drives an inverter run;
/// per-trial substreams are derived from (seed, trial_index) so that
/// concurrent trials never share state.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : state_(mix(seed)), engine_(state_) {}

    /// Derived stream for trial `index`; independent of this stream's position.
    RngStream substream(std::uint64_t index) const {
        return RngStream(state_ ^ (0x9e3779b97f4a7c15ULL * (index + 1)));
    }

    std::mt19937_64& engine() { return engine_; }

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
    double gaussian() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }

    /// Index in [0, n) with the given discrete probabilities (must sum to 1).
    Index categorical(const Vector& p) {
        double u = uniform();
        double acc = 0.0;
        for (Index i = 0; i < p.size(); ++i) {
            acc += p[i];
            if (u < acc) return i;
        }
        return p.size() - 1;
    }

    Index uniform_index(Index n) {
        return std::uniform_int_distribution<Index>(0, n - 1)(engine_);
    }

    Matrix gaussian_matrix(Index rows, Index cols) {
        Matrix m(rows, cols);
        std::normal_distribution<double> dist(0.0, 1.0);
        for (Index j = 0; j < cols; ++j)
            for (Index i = 0; i < rows; ++i)
                m(i, j) = dist(engine_);
        return m;
    }

    Matrix uniform_matrix(Index rows, Index cols) {
        Matrix m(rows, cols);
        std::uniform_real_distribution<double> dist(0.0, 1.0);
        for (Index j = 0; j < cols; ++j)
            for (Index i = 0; i < rows; ++i)
                m(i, j) = dist(engine_);
        return m;
    }

private:
    // splitmix64 finalizer
    static std::uint64_t mix(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    std::uint64_t state_;
    std::mt19937_64 engine_;
};

} // namespace stochinv
