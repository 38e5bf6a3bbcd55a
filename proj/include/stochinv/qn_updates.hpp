#pragma once

#include "stochinv/problem_matrix.hpp"
#include "stochinv/types.hpp"
#include "stochinv/weights.hpp"

#include <string>

namespace stochinv {

enum class UpdateName {
    kaczmarz,
    bad_broyden,
    psb,
    good_broyden,
    aip,
    dfp,
    bfgs,
    column,
};

enum class InverseEquation { ax_eq_i, xa_eq_i, x_ainv_eq_i };

/// Static description of a named update: the weight/equation pair it
/// specializes and the symmetry class it requires of A.
struct NamedUpdate {
    UpdateName name;
    WeightKind implied_w;
    InverseEquation implied_equation;
    Symmetry requires_symmetry;     // minimum class of A
    bool tracks_inverse_iterate;    // iterates toward A, exposes X_k^{-1}
    bool sketch_premultiplied_by_a; // draws V, steps with S = A V
};

const NamedUpdate& named_update(UpdateName name);
UpdateName update_name_from_string(const std::string& s);
std::string to_string(UpdateName name);

/// Rejects configurations violating the update's symmetry requirement.
void validate_update(UpdateName name, const ProblemMatrix& a);

// Step kernels. All throw GramRankDeficientError when the small sketched
// Gram matrix fails to invert, so callers can resample.

/// Row update with W = I; identical arithmetic to step_row(identity W).
Matrix kaczmarz_step(const Matrix& x, const Matrix& a, const Matrix& s);

/// Column update with W = I; rank-one fast path auto-selected at q = 1.
Matrix bad_broyden_step(const Matrix& x, const Matrix& a, const Matrix& s);
Matrix bad_broyden_step_block(const Matrix& x, const Matrix& a, const Matrix& s);
Matrix bad_broyden_step_rank_one(const Matrix& x, const Matrix& a, const Vector& s);

/// Symmetric update with W = I.
Matrix psb_step(const Matrix& x, const Matrix& a, const Matrix& s);

/// Rank-one update toward A with the Woodbury-maintained inverse pair.
struct IteratePair {
    Matrix primal;  // converges to A
    Matrix inverse; // converges to A^{-1}
};
IteratePair good_broyden_step(const Matrix& x, const Matrix& x_inv, const Matrix& a, Index i);

/// Row update with W = A^{-1} (never materialized; touches only A).
Matrix aip_step(const Matrix& x, const Matrix& a, const Matrix& s);

/// Symmetric update toward A with W = A; inverse pair via Woodbury.
IteratePair dfp_step(const Matrix& x, const Matrix& x_inv, const Matrix& a, const Matrix& s);

/// Symmetric update with W = A^{-1}; preserves positive definiteness.
Matrix bfgs_step(const Matrix& x, const Matrix& a, const Matrix& s);

/// Update with W = (A^T A)^{-1} realized through S = A V.
Matrix column_update_step(const Matrix& x, const Matrix& a, const Matrix& v, bool symmetric);

} // namespace stochinv
