#include "stochinv/flops.hpp"

namespace stochinv::flops {

namespace {
// Shorthands so the polynomials below visibly mirror the kernel code.
inline double d(Index v) { return static_cast<double>(v); }
} // namespace

double kaczmarz(Index n_, Index q_) {
    const double n = d(n_), q = d(q_);
    // A^T S, S^T A X, final product: 3 gemms; gram + solve; sub + add
    return 6 * n * n * q + 4 * n * q * q + 2 * q * q * q + n * q + n * n;
}

double bad_broyden(Index n_, Index q_) {
    const double n = d(n_), q = d(q_);
    if (q_ == 1) return 6 * n * n + 4 * n; // rank-one fast path
    return 6 * n * n * q + 4 * n * q * q + 2 * q * q * q + n * q + n * n;
}

double psb(Index n_, Index q_) {
    const double n = d(n_), q = d(q_);
    return 8 * n * n * q + 8 * n * q * q + 2 * q * q * q + n * q + 3 * n * n;
}

double good_broyden(Index n_) {
    const double n = d(n_);
    return 4 * n * n + 3 * n;
}

double aip(Index n_, Index q_) {
    const double n = d(n_), q = d(q_);
    return 6 * n * n * q + 4 * n * q * q + 2 * q * q * q + n * q + n * n;
}

double dfp(Index n_, Index q_) {
    const double n = d(n_), q = d(q_);
    // primal and the Woodbury inverse pair together
    return 14 * n * n * q + 14 * n * q * q + 4 * q * q * q + 6 * n * n;
}

double bfgs(Index n_, Index q_) {
    const double n = d(n_), q = d(q_);
    return 10 * n * n * q + 10 * n * q * q + 2 * q * q * q + 4 * n * n;
}

double column_update(Index n_, Index q_, bool symmetric) {
    const double n = d(n_), q = d(q_);
    if (symmetric)
        return 10 * n * n * q + 8 * n * q * q + 2 * q * q * q + n * q + 3 * n * n;
    return 8 * n * n * q + 4 * n * q * q + 2 * q * q * q + n * q + n * n;
}

double generic_row(Index n_, Index q_) {
    const double n = d(n_), q = d(q_);
    return 8 * n * n * q + 4 * n * q * q + 2 * q * q * q + n * q + n * n;
}

double generic_col(Index n_, Index q_) {
    const double n = d(n_), q = d(q_);
    return 8 * n * n * q + 4 * n * q * q + 2 * q * q * q + n * q + n * n;
}

double generic_sym(Index n_, Index q_) {
    const double n = d(n_), q = d(q_);
    return 10 * n * n * q + 8 * n * q * q + 2 * q * q * q + n * q + 3 * n * n;
}

double adarbfgs(Index n_, Index q_) {
    const double n = d(n_), q = d(q_);
    // two q x q inverse square roots counted at the small-inverse rate
    return 8 * n * n * q + 10 * n * q * q + 4 * q * q * q + n * q + n * n;
}

double newton_schulz(Index n_) {
    const double n = d(n_);
    return 4 * n * n * n + 2 * n * n;
}

double minimal_residual(Index n_) {
    const double n = d(n_);
    // X R, A(X R), two traces, the update, and the cached-residual downdate
    return 4 * n * n * n + 8 * n * n;
}

} // namespace stochinv::flops
