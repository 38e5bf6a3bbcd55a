#include "stochinv/linalg.hpp"

#include "stochinv/errors.hpp"
#include "stochinv/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace stochinv {

EigenDecomposition jacobi_eigendecomposition(const Matrix& m) {
    if (m.rows() != m.cols())
        throw std::invalid_argument("jacobi_eigendecomposition: matrix must be square");
    const Index n = m.rows();
    Matrix a = 0.5 * (m + m.transpose());
    Matrix q = Matrix::Identity(n, n);

    const double scale = std::max(a.norm(), 1e-300);
    const int max_sweeps = 60;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (Index p = 0; p < n; ++p)
            for (Index r = p + 1; r < n; ++r) off += a(p, r) * a(p, r);
        if (std::sqrt(2.0 * off) <= 1e-15 * scale) break;

        for (Index p = 0; p < n - 1; ++p) {
            for (Index r = p + 1; r < n; ++r) {
                const double apq = a(p, r);
                if (std::abs(apq) <= 1e-300) continue;
                const double theta = (a(r, r) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0)
                                     ? 1.0 / (theta + std::sqrt(1.0 + theta * theta))
                                     : 1.0 / (theta - std::sqrt(1.0 + theta * theta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                // A <- J^T A J with the Givens rotation in plane (p, r)
                for (Index k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akr = a(k, r);
                    a(k, p) = c * akp - s * akr;
                    a(k, r) = s * akp + c * akr;
                }
                for (Index k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double ark = a(r, k);
                    a(p, k) = c * apk - s * ark;
                    a(r, k) = s * apk + c * ark;
                }
                for (Index k = 0; k < n; ++k) {
                    const double qkp = q(k, p);
                    const double qkr = q(k, r);
                    q(k, p) = c * qkp - s * qkr;
                    q(k, r) = s * qkp + c * qkr;
                }
            }
        }
    }

    EigenDecomposition dec;
    dec.values = a.diagonal();
    dec.vectors = q;

    // sort ascending
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::sort(order.begin(), order.end(),
              [&](Index i, Index j) { return dec.values[i] < dec.values[j]; });
    Vector vals(n);
    Matrix vecs(n, n);
    for (Index j = 0; j < n; ++j) {
        vals[j] = dec.values[order[static_cast<std::size_t>(j)]];
        vecs.col(j) = dec.vectors.col(order[static_cast<std::size_t>(j)]);
    }
    dec.values = std::move(vals);
    dec.vectors = std::move(vecs);
    return dec;
}

PinvResult sym_pinv(const Matrix& m, double tol) {
    if (m.rows() != m.cols()) throw std::invalid_argument("sym_pinv: matrix must be square");
    const EigenDecomposition dec = jacobi_eigendecomposition(m);
    const double lam_max = dec.values.cwiseAbs().maxCoeff();
    PinvResult out;
    Vector inv_vals = Vector::Zero(dec.values.size());
    for (Index i = 0; i < dec.values.size(); ++i) {
        if (std::abs(dec.values[i]) <= tol * lam_max) {
            ++out.dropped;
        } else {
            inv_vals[i] = 1.0 / dec.values[i];
        }
    }
    out.pinv = dec.vectors * inv_vals.asDiagonal() * dec.vectors.transpose();
    return out;
}

double weighted_frobenius_norm(const Matrix& x, const Matrix& w_inv_sqrt) {
    if (x.rows() != w_inv_sqrt.rows() || x.cols() != w_inv_sqrt.rows())
        throw std::invalid_argument("weighted_frobenius_norm: dimension mismatch");
    return (w_inv_sqrt * x * w_inv_sqrt).norm();
}

double weighted_frobenius_norm(const Matrix& x) { return x.norm(); }

double spectral_norm_estimate(const Matrix& m, int iters, std::uint64_t seed) {
    if (iters < 1) throw std::invalid_argument("spectral_norm_estimate: iters must be >= 1");
    if (m.size() == 0 || m.norm() == 0.0) return 0.0;
    RngStream rng(seed);
    Vector v = rng.gaussian_matrix(m.cols(), 1).col(0);
    if (v.norm() == 0.0) v.setOnes();
    v.normalize();
    double est = 0.0;
    for (int it = 0; it < iters; ++it) {
        Vector w = m * v;
        est = w.norm(); // Rayleigh-quotient-style estimate, never above sigma_max
        if (est == 0.0) {
            // v landed in the null space; restart from a fresh direction
            v = rng.gaussian_matrix(m.cols(), 1).col(0);
            v.normalize();
            continue;
        }
        v = m.transpose() * w;
        const double nv = v.norm();
        if (nv == 0.0) break;
        v /= nv;
    }
    return est;
}

Matrix sym_sqrt(const Matrix& m) {
    const EigenDecomposition dec = jacobi_eigendecomposition(m);
    const double lam_max = dec.values.size() ? dec.values.cwiseAbs().maxCoeff() : 0.0;
    Vector roots(dec.values.size());
    for (Index i = 0; i < dec.values.size(); ++i) {
        double lam = dec.values[i];
        if (lam < -1e-10 * lam_max)
            throw NumericalError("sym_sqrt: matrix has a significantly negative eigenvalue");
        roots[i] = std::sqrt(std::max(lam, 0.0));
    }
    return dec.vectors * roots.asDiagonal() * dec.vectors.transpose();
}

Matrix sym_inv_sqrt(const Matrix& m, double floor_rel) {
    const EigenDecomposition dec = jacobi_eigendecomposition(m);
    const double lam_max = dec.values.size() ? dec.values.maxCoeff() : 0.0;
    Vector inv_roots(dec.values.size());
    for (Index i = 0; i < dec.values.size(); ++i) {
        double lam = dec.values[i];
        if (lam <= floor_rel * lam_max || lam <= 0.0)
            throw NumericalError("sym_inv_sqrt: matrix is not positive definite");
        inv_roots[i] = 1.0 / std::sqrt(lam);
    }
    return dec.vectors * inv_roots.asDiagonal() * dec.vectors.transpose();
}

Matrix lu_inverse(const Matrix& m) {
    Eigen::PartialPivLU<Matrix> lu(m);
    return lu.inverse();
}

double smallest_eigenvalue(const Matrix& sym) {
    return jacobi_eigendecomposition(sym).values.minCoeff();
}

} // namespace stochinv
