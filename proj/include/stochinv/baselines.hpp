#pragma once

#include "stochinv/problem_matrix.hpp"
#include "stochinv/simi.hpp"
#include "stochinv/types.hpp"

#include <cstdint>
#include <optional>

namespace stochinv {

/// X+ = 2X - XAX. Diverges when rho(I - X0 A) >= 1; the run loop reports
/// that as an outcome rather than crashing.
Matrix newton_schulz_step(const Matrix& x, const Matrix& a);

/// X0 = 0.99 A^T / s^2 with s the power-iteration spectral norm estimate.
Matrix newton_schulz_init(const Matrix& a, std::uint64_t seed = 0);

struct MrStep {
    Matrix x;
    Matrix r; // cached residual I - A x
    double alpha = 0.0;
    bool stagnated = false; // zero step denominator: alpha forced to 0
};

/// Minimal Residual step with the residual carried along:
/// X+ = X + (Tr(R^T A X R) / ||A X R||_F^2) X R, R+ = R - alpha A X R.
MrStep mr_step_cached(const Matrix& x, const Matrix& r, const Matrix& a);

/// Convenience form recomputing R = I - A X from scratch.
Matrix mr_step(const Matrix& x, const Matrix& a);

/// X0 = (Tr(A) / Tr(A A^T)) I, the projected identity.
Matrix mr_init(const Matrix& a);

enum class BaselineMethod { newton_schulz, minimal_residual };

struct BaselineConfig {
    ProblemMatrix a;
    BaselineMethod method = BaselineMethod::newton_schulz;
    double tol = 1e-2;
    long max_iters = 1000;
    double time_budget_seconds = 0.0;
    std::uint64_t seed = 0; // spectral-norm start vector for the paper init
    TrackOptions track;
    std::optional<Matrix> x0; // default: the method's paper initialization
};

/// Shares the simi history/termination contract; divergence (non-finite
/// iterate) terminates with Termination::error and a "diverged" message.
RunResult run_baseline(const BaselineConfig& config);

} // namespace stochinv
