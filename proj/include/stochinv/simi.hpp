#pragma once

#include "stochinv/flops.hpp"
#include "stochinv/problem_matrix.hpp"
#include "stochinv/qn_updates.hpp"
#include "stochinv/sketching.hpp"
#include "stochinv/types.hpp"
#include "stochinv/weights.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace stochinv {

// Generic step kernels. `w` is the materialized weight matrix; passing
// nullptr selects the identity-weight path, which is shared with the
// corresponding named kernel (kaczmarz / bad Broyden / PSB) so the two are
// arithmetically identical.

/// X+ = X + W A^T S (S^T A W A^T S)^{-1} S^T (I - A X)
Matrix step_row(const Matrix& x, const Matrix& a, const Matrix& s, const Matrix* w = nullptr);

/// X+ = X + (I - X A) S (S^T A^T W A S)^{-1} S^T A^T W; satisfies X+ A S = S
Matrix step_col(const Matrix& x, const Matrix& a, const Matrix& s, const Matrix* w = nullptr);

/// Symmetric update: X+ = X - M Theta - (M Theta)^T + Theta^T (A X A - A) Theta
/// with Theta = S (S^T A W A S)^{-1} S^T A W and M = X A - I.
Matrix step_sym(const Matrix& x, const Matrix& a, const Matrix& s, const Matrix* w = nullptr);

/// The same symmetric update in its boxed closed-form arrangement
/// (test cross-check for step_sym; dense products, desk scale only).
Matrix step_sym_alt(const Matrix& x, const Matrix& a, const Matrix& s, const Matrix& w);

enum class VariantKind { generic_row, generic_col, generic_sym, named };

struct MethodSpec {
    VariantKind kind = VariantKind::generic_row;
    UpdateName name = UpdateName::kaczmarz; // meaningful only when kind == named

    static MethodSpec row() { return {VariantKind::generic_row, UpdateName::kaczmarz}; }
    static MethodSpec col() { return {VariantKind::generic_col, UpdateName::kaczmarz}; }
    static MethodSpec sym() { return {VariantKind::generic_sym, UpdateName::kaczmarz}; }
    static MethodSpec named_method(UpdateName n) { return {VariantKind::named, n}; }

    std::string label() const;
    /// Iterates are symmetric by construction (drift corrected each step).
    bool symmetric_iterates() const;
    bool tracks_inverse_iterate() const;
};

struct TrackOptions {
    Index residual_every_k = 10;
    bool flops = true;
    bool wall_time = true;
};

struct InverterConfig {
    ProblemMatrix a;
    WeightSpec w = WeightSpec::identity(); // generic variants only; named updates imply their W
    SketchRule rule;
    MethodSpec method;
    double tol = 1e-2; // relative residual target; 0 makes it unreachable
    long max_iters = 1000;
    double time_budget_seconds = 0.0; // 0 = unlimited; checked at residual checkpoints
    std::uint64_t seed = 0;
    TrackOptions track;
    std::optional<Matrix> x0; // default: identity
    int max_redraws = 100;    // consecutive rejected sketches before giving up
};

struct HistoryPoint {
    long k = 0;
    double residual = 0.0; // ||I - A X_k||_F / ||I - A X_0||_F
    double flops = 0.0;    // cumulative, step kernels only
    double seconds = 0.0;  // cumulative wall time around step kernels only
};

enum class Termination { tol_reached, max_iters, error };

struct InverterState {
    Matrix x;
    std::optional<Matrix> x_inv; // maintained for good-broyden / dfp
    long k = 0;
    std::vector<HistoryPoint> history;
    double max_symmetry_drift = 0.0; // largest per-step re-symmetrization correction
    FlopCounter flops;
    double seconds = 0.0;
};

struct RunResult {
    InverterState state;
    Termination termination = Termination::error;
    std::string message;
};

/// Resolve the probability vector a method uses for a discrete rule,
/// applying the method's implied weight (named updates) or config.w
/// (generic variants). `proxy` substitutes for A^{-1} under the
/// optimized-heuristic rule.
Vector method_probabilities(const InverterConfig& config, const std::vector<Matrix>& members,
                            const Matrix* proxy = nullptr);

RunResult run_inverter(const InverterConfig& config);

} // namespace stochinv
