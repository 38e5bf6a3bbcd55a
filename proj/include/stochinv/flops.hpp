#pragma once

#include "stochinv/types.hpp"

#include <map>
#include <string>

namespace stochinv {

/// Analytical flop accounting. Convention: a dense (n x m) by (m x p)
/// multiply costs 2nmp, matrix add/scale costs one flop per entry, and a
/// q x q factorization/inversion costs 2q^3. Counts are per-kernel
/// formulas, not hardware counters, so flop axes are comparable only
/// within this tool.
class FlopCounter {
public:
    void add(const std::string& kernel, double flops) {
        total_ += flops;
        per_kernel_[kernel] += flops;
    }
    double total() const { return total_; }
    const std::map<std::string, double>& per_kernel() const { return per_kernel_; }

private:
    double total_ = 0.0;
    std::map<std::string, double> per_kernel_;
};

namespace flops {

inline double gemm(double n, double m, double p) { return 2.0 * n * m * p; }
inline double small_inverse(double q) { return 2.0 * q * q * q; }

// Per-step tallies mirroring the specialized kernel implementations.
double kaczmarz(Index n, Index q);
double bad_broyden(Index n, Index q);
double psb(Index n, Index q);
double good_broyden(Index n);
double aip(Index n, Index q);
double dfp(Index n, Index q);
double bfgs(Index n, Index q);
double column_update(Index n, Index q, bool symmetric);
double generic_row(Index n, Index q);  // dense W
double generic_col(Index n, Index q);  // dense W
double generic_sym(Index n, Index q);  // dense W
double adarbfgs(Index n, Index q);
double newton_schulz(Index n);
double minimal_residual(Index n);

} // namespace flops

} // namespace stochinv
