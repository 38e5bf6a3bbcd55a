#pragma once

#include "stochinv/types.hpp"

#include <cstdint>

namespace stochinv {

/// Symmetric eigendecomposition M = Q diag(values) Q^T, values ascending,
/// Q orthonormal. Computed by cyclic Jacobi rotations.
struct EigenDecomposition {
    Vector values;  // ascending
    Matrix vectors; // columns are eigenvectors

    Matrix reconstruct() const { return vectors * values.asDiagonal() * vectors.transpose(); }
};

EigenDecomposition jacobi_eigendecomposition(const Matrix& m);

/// Pseudo-inverse of a small symmetric matrix, with the number of
/// eigenvalues dropped as rank-deficient relative to `tol`.
struct PinvResult {
    Matrix pinv;
    int dropped = 0; // eigenvalues with |lambda| <= tol * max|lambda|
};

PinvResult sym_pinv(const Matrix& m, double tol = 1e-12);

/// ||W^{-1/2} X W^{-1/2}||_F for SPD W given as its inverse square root.
double weighted_frobenius_norm(const Matrix& x, const Matrix& w_inv_sqrt);

/// Plain Frobenius-norm overload (identity weight).
double weighted_frobenius_norm(const Matrix& x);

/// Power-iteration estimate of ||M||_2 (largest singular value) on M^T M.
/// Deterministic given the seed and never exceeds the true norm.
double spectral_norm_estimate(const Matrix& m, int iters = 100, std::uint64_t seed = 0);

/// Symmetric square root of an SPD (or PSD within tolerance) matrix.
/// Negative eigenvalues beyond -1e-10 * ||M||_2 are an error; smaller
/// ones are clamped to zero.
Matrix sym_sqrt(const Matrix& m);

/// Inverse symmetric square root; eigenvalues below floor_rel * lambda_max
/// raise a numerical error (callers resample).
Matrix sym_inv_sqrt(const Matrix& m, double floor_rel = 1e-14);

/// Dense LU inverse. Used for error norms in tests and desk-scale
/// diagnostics only; production iteration loops never call this.
Matrix lu_inverse(const Matrix& m);

double smallest_eigenvalue(const Matrix& sym);

} // namespace stochinv
