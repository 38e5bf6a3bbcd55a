#pragma once

#include "stochinv/linalg.hpp"
#include "stochinv/rng.hpp"
#include "stochinv/types.hpp"

#include <Eigen/QR>

namespace testutil {

using stochinv::Index;
using stochinv::Matrix;
using stochinv::RngStream;
using stochinv::Vector;

inline Matrix random_general(Index n, RngStream& rng) { return rng.gaussian_matrix(n, n); }

/// Well-conditioned SPD sample: B B^T shifted away from singularity.
inline Matrix random_spd(Index n, RngStream& rng) {
    const Matrix b = rng.gaussian_matrix(n, n);
    return b * b.transpose() + 0.5 * static_cast<double>(n) * Matrix::Identity(n, n);
}

inline Matrix random_symmetric(Index n, RngStream& rng) {
    const Matrix b = rng.gaussian_matrix(n, n);
    return 0.5 * (b + b.transpose());
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

inline Vector vec(const Matrix& m) {
    return Eigen::Map<const Vector>(m.data(), m.size());
}

inline Matrix unvec(const Vector& v, Index rows, Index cols) {
    return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

/// Independent projection oracle: minimize Tr(D^T W^{-1} D W^{-1}) subject
/// to C vec(D) = d, solved through the stacked KKT system (least-squares,
/// so redundant constraint rows are fine). Returns x + D.
inline Matrix kkt_projection(const Matrix& x, const Matrix& w, const Matrix& c,
                             const Vector& d) {
    const Index n = x.rows();
    const Index nn = n * n;
    const Index m = c.rows();
    const Matrix w_inv = stochinv::lu_inverse(w);
    const Matrix g = kron(w_inv, w_inv); // Tr(D^T W^{-1} D W^{-1}) = vec^T (W^{-1} x W^{-1}) vec

    Matrix kkt = Matrix::Zero(nn + m, nn + m);
    kkt.topLeftCorner(nn, nn) = 2.0 * g;
    kkt.topRightCorner(nn, m) = c.transpose();
    kkt.bottomLeftCorner(m, nn) = c;
    Vector rhs = Vector::Zero(nn + m);
    rhs.tail(m) = d;

    const Vector sol = kkt.completeOrthogonalDecomposition().solve(rhs);
    return x + unvec(sol.head(nn), n, n);
}

/// Row constraint S^T A X+ = S^T, shifted to the increment D:
/// S^T A D = S^T (I - A X).
inline Matrix row_oracle(const Matrix& x, const Matrix& a, const Matrix& s, const Matrix& w) {
    const Index n = x.rows();
    const Matrix sa = s.transpose() * a;
    const Matrix c = kron(Matrix::Identity(n, n), sa);
    const Matrix target = s.transpose() - sa * x;
    return kkt_projection(x, w, c, vec(target));
}

/// Column constraint X+ A S = S: D A S = S - X A S.
inline Matrix col_oracle(const Matrix& x, const Matrix& a, const Matrix& s, const Matrix& w) {
    const Index n = x.rows();
    const Matrix as = a * s;
    const Matrix c = kron(as.transpose(), Matrix::Identity(n, n));
    const Matrix target = s - x * as;
    return kkt_projection(x, w, c, vec(target));
}

/// Symmetric variant: column constraint plus entrywise symmetry of X+.
inline Matrix sym_oracle(const Matrix& x, const Matrix& a, const Matrix& s, const Matrix& w) {
    const Index n = x.rows();
    const Matrix as = a * s;
    const Index mc = n * as.cols();
    const Index ms = n * (n - 1) / 2;
    Matrix c = Matrix::Zero(mc + ms, n * n);
    c.topRows(mc) = kron(as.transpose(), Matrix::Identity(n, n));
    Vector d(mc + ms);
    d.head(mc) = vec(Matrix(s - x * as));
    Index row = mc;
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j) {
            // D_ij - D_ji = x_ji - x_ij keeps X+ symmetric for symmetric x too
            c(row, j * n + i) = 1.0;
            c(row, i * n + j) = -1.0;
            d(row) = x(j, i) - x(i, j);
            ++row;
        }
    return kkt_projection(x, w, c, d);
}

/// ||M||_{F(W^{-1})} = ||W^{-1/2} M W^{-1/2}||_F given W^{-1/2}.
inline double weighted_error_norm(const Matrix& m, const Matrix& w_inv_sqrt) {
    return (w_inv_sqrt * m * w_inv_sqrt).norm();
}

} // namespace testutil
