#pragma once

#include "stochinv/problem_matrix.hpp"
#include "stochinv/types.hpp"

#include <optional>
#include <string>

namespace stochinv {

enum class WeightKind {
    identity,
    explicit_matrix,
    matrix_a,         // W = A, requires spd A
    inverse_of_a,     // W = A^{-1}, requires spd A
    a_squared,        // W = A^2 (A^T A for symmetric A)
    gram_inverse_left,  // W = (A^T A)^{-1}
    gram_inverse_right, // W = (A A^T)^{-1}
};

/// Weight matrix of the projection norm. Non-identity kinds stay
/// symbolic until a caller materializes them; only desk-scale paths
/// (the rates engine and the generic step kernels used in tests) do.
class WeightSpec {
public:
    static WeightSpec identity() { return WeightSpec(WeightKind::identity); }
    static WeightSpec matrix_a() { return WeightSpec(WeightKind::matrix_a); }
    static WeightSpec inverse_of_a() { return WeightSpec(WeightKind::inverse_of_a); }
    static WeightSpec a_squared() { return WeightSpec(WeightKind::a_squared); }
    static WeightSpec gram_inverse_left() { return WeightSpec(WeightKind::gram_inverse_left); }
    static WeightSpec gram_inverse_right() { return WeightSpec(WeightKind::gram_inverse_right); }

    /// Explicit SPD matrix, validated by factorization success.
    static WeightSpec explicit_matrix(Matrix w);

    WeightKind kind() const { return kind_; }
    std::string name() const;

    /// Materialize W for the given problem matrix.
    Matrix resolve(const ProblemMatrix& a) const;
    /// Materialize W^{1/2} and W^{-1/2} (rates-module use).
    Matrix resolve_sqrt(const ProblemMatrix& a) const;
    Matrix resolve_inv_sqrt(const ProblemMatrix& a) const;

private:
    explicit WeightSpec(WeightKind kind) : kind_(kind) {}

    WeightKind kind_;
    std::optional<Matrix> explicit_;
};

} // namespace stochinv
