#pragma once

#include "stochinv/problem_matrix.hpp"
#include "stochinv/rng.hpp"
#include "stochinv/simi.hpp"
#include "stochinv/sketching.hpp"
#include "stochinv/types.hpp"

#include <optional>

namespace stochinv {

/// AdaRBFGS iterate in factored form X_k = L_k L_k^T, so the implied
/// iterate is SPD by construction.
struct FactoredState {
    Matrix l;
    long k = 0;
    std::vector<HistoryPoint> history;
    double condition_estimate = 0.0; // cond(L) diagnostic, desk scale only; 0 = not computed
    FlopCounter flops;
    double seconds = 0.0;
};

/// One factored BFGS update for a given pre-factor sketch Stilde:
/// L+ = L + L*Stilde*R*((Stilde^T Stilde)^{-1/2} Stilde^T - R^T S^T A L)
/// with S = L*Stilde and R = (S^T A S)^{-1/2}. Throws NumericalError when
/// either q x q inverse square root hits its eigenvalue floor (resample).
Matrix adarbfgs_update_factor(const Matrix& l, const Matrix& a, const Matrix& stilde);

/// Eq 8.2 block probabilities p_i = Tr(S_i^T A S_i) / Tr(A X_k) for the
/// adaptive-factor-cols rule, computed from the current factor.
Vector adaptive_block_probabilities(const Matrix& l, const Matrix& a,
                                    const std::vector<std::vector<Index>>& blocks);

/// Draw a pre-factor sketch per the adaptive rule and apply the factored
/// update, redrawing on inverse-square-root failure (limit max_redraws).
FactoredState adarbfgs_step(const FactoredState& state, const ProblemMatrix& a,
                            const SketchRule& rule, RngStream& rng, int max_redraws = 100);

/// 1 - lambda_min(A X) / Tr(A X); the one-step contraction factor.
/// Equals 1 - 1/n at X = A^{-1}.
double one_step_rate_bound(const Matrix& x, const Matrix& a);

Matrix reconstruct(const FactoredState& state);

struct AdaConfig {
    ProblemMatrix a; // SPD
    SketchRule rule; // adaptive-factor-cols or adaptive-factor-gauss
    double tol = 1e-2;
    long max_iters = 1000;
    double time_budget_seconds = 0.0;
    std::uint64_t seed = 0;
    TrackOptions track;
    std::optional<Matrix> l0; // default: identity
    int max_redraws = 100;
};

/// Full AdaRBFGS run; the returned state.x is the reconstructed iterate.
RunResult run_adarbfgs(const AdaConfig& config);

} // namespace stochinv
