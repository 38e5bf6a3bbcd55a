#pragma once

#include "stochinv/problem_matrix.hpp"
#include "stochinv/rng.hpp"
#include "stochinv/types.hpp"
#include "stochinv/weights.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace stochinv {

enum class SketchKind {
    coordinate,          // q = 1, S = e_i
    coordinate_block,    // partition C_1..C_r of {1..n}, S = I_{:C_i}
    gaussian_dense,      // q columns of i.i.d. standard normals
    fixed_family,        // explicit list S_1..S_r
    adaptive_factor_cols,  // S = L_k I_{:C_i}
    adaptive_factor_gauss, // S = L_k * gaussian
};

enum class ProbabilityRule {
    uniform,
    convenient,
    optimized_exact,
    optimized_heuristic,
    explicit_p,
    none, // gaussian kinds only
};

/// Which side of the inverse equation a method sketches; selects between
/// the A^T S and A S probability/rate formulas.
enum class SketchSide { row, col };

struct SketchRule {
    SketchKind kind = SketchKind::coordinate;
    Index q = 1;
    std::vector<std::vector<Index>> blocks; // coordinate_block / adaptive_factor_cols
    std::vector<Matrix> family;             // fixed_family
    ProbabilityRule probabilities = ProbabilityRule::uniform;
    Vector explicit_p;

    /// Realizes the column update's S = A V pre-transform: the drawn
    /// matrix is V and the step kernel left-multiplies by A.
    bool premultiply_by_a = false;

    static SketchRule coordinate(ProbabilityRule prob = ProbabilityRule::uniform);
    static SketchRule coordinate_block(Index n, Index q,
                                       ProbabilityRule prob = ProbabilityRule::uniform);
    static SketchRule gaussian(Index q);
    static SketchRule fixed(std::vector<Matrix> family,
                            ProbabilityRule prob = ProbabilityRule::uniform);
    static SketchRule adaptive_cols(Index n, Index q);
    static SketchRule adaptive_gauss(Index q);

    bool is_discrete() const {
        return kind == SketchKind::coordinate || kind == SketchKind::coordinate_block ||
               kind == SketchKind::fixed_family;
    }
    bool is_adaptive() const {
        return kind == SketchKind::adaptive_factor_cols ||
               kind == SketchKind::adaptive_factor_gauss;
    }
    std::string describe() const;

    void validate(Index n) const;
};

/// Contiguous index blocks of size q (last block may be smaller).
std::vector<std::vector<Index>> contiguous_partition(Index n, Index q);

struct SketchSample {
    Matrix matrix;               // n x q
    std::optional<Index> outcome; // discrete rules only
};

/// A finite sketch family with probabilities; complete when the
/// horizontal concatenation has full row rank.
struct DiscreteSampling {
    std::vector<Matrix> members;
    Vector probabilities;

    Matrix stacked() const;
    Index total_width() const;
    double expected_width() const; // E[q]
    bool is_complete(double tol = 1e-12) const;
    void validate() const; // throws ConfigError when invariants fail
};

/// Members of a discrete rule at dimension n (probabilities not yet assigned).
std::vector<Matrix> discrete_members(const SketchRule& rule, Index n);

/// p_i proportional to ||W^{1/2} A^T S_i||_F^2 (row) or ||W^{1/2} A S_i||_F^2 (col).
Vector convenient_probabilities(const std::vector<Matrix>& family, const ProblemMatrix& a,
                                const WeightSpec& w, SketchSide side);

enum class InverseSource { exact, proxy };

struct OptimizedProbabilities {
    Vector p;
    double gamma; // achieved value of the rate upper bound objective
};

/// Probabilities minimizing the gamma(p) rate bound; requires a square
/// invertible stacked family. `proxy` substitutes X_k for A^{-1}.
OptimizedProbabilities optimized_probabilities(const std::vector<Matrix>& family,
                                               const ProblemMatrix& a, const WeightSpec& w,
                                               InverseSource source,
                                               const Matrix* proxy = nullptr);

/// Resolve a rule's probability setting against a concrete family.
Vector resolve_probabilities(const SketchRule& rule, const std::vector<Matrix>& members,
                             const ProblemMatrix& a, const WeightSpec& w, SketchSide side,
                             const Matrix* proxy = nullptr);

/// Draw one sample at explicit dimension n; `resolved_p` overrides the
/// rule's probability setting (used when probabilities are data-dependent
/// or recomputed per iteration).
SketchSample draw_sketch_n(const SketchRule& rule, Index n, RngStream& rng,
                           const Matrix* factor = nullptr, const Vector* resolved_p = nullptr);

/// Draw one sample. Adaptive kinds require `factor` (the current L_k),
/// other kinds forbid it. When `accept` is provided, rejected samples are
/// redrawn up to `max_redraws` times before a hard error naming the rule.
SketchSample draw_sketch(const SketchRule& rule, RngStream& rng,
                         const Matrix* factor = nullptr,
                         const std::function<bool(const Matrix&)>& accept = nullptr,
                         int max_redraws = 100);

/// Deterministic member for a forced outcome index (discrete and
/// adaptive-cols rules; test and enumeration use).
Matrix sketch_outcome(const SketchRule& rule, Index n, Index outcome,
                      const Matrix* factor = nullptr);

} // namespace stochinv
