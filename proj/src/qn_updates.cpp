#include "stochinv/qn_updates.hpp"

#include "stochinv/errors.hpp"

#include <Eigen/Cholesky>

#include <array>
#include <cmath>

namespace stochinv {

namespace {

const std::array<NamedUpdate, 8> kTable = {{
    {UpdateName::kaczmarz, WeightKind::identity, InverseEquation::ax_eq_i, Symmetry::general,
     false, false},
    {UpdateName::bad_broyden, WeightKind::identity, InverseEquation::xa_eq_i, Symmetry::general,
     false, false},
    {UpdateName::psb, WeightKind::identity, InverseEquation::ax_eq_i, Symmetry::symmetric, false,
     false},
    {UpdateName::good_broyden, WeightKind::identity, InverseEquation::x_ainv_eq_i,
     Symmetry::general, true, false},
    {UpdateName::aip, WeightKind::inverse_of_a, InverseEquation::ax_eq_i, Symmetry::spd, false,
     false},
    {UpdateName::dfp, WeightKind::matrix_a, InverseEquation::x_ainv_eq_i, Symmetry::spd, true,
     false},
    {UpdateName::bfgs, WeightKind::inverse_of_a, InverseEquation::ax_eq_i, Symmetry::spd, false,
     false},
    {UpdateName::column, WeightKind::gram_inverse_left, InverseEquation::ax_eq_i,
     Symmetry::general, false, true},
}};

/// Factor the small sketched Gram matrix, throwing the resample signal on
/// failure. All Grams here are symmetric PSD by construction, so a failed
/// Cholesky means rank deficiency (or loss of definiteness for the SPD
/// kernels), which callers handle by redrawing S.
Eigen::LLT<Matrix> gram_llt(const Matrix& gram, const char* kernel) {
    Eigen::LLT<Matrix> llt(gram);
    if (llt.info() != Eigen::Success)
        throw GramRankDeficientError(std::string(kernel) +
                                     ": sketched Gram matrix is not positive definite");
    return llt;
}

} // namespace

const NamedUpdate& named_update(UpdateName name) {
    for (const NamedUpdate& u : kTable)
        if (u.name == name) return u;
    throw ConfigError("named_update: unknown update");
}

UpdateName update_name_from_string(const std::string& s) {
    if (s == "kaczmarz") return UpdateName::kaczmarz;
    if (s == "bad-broyden") return UpdateName::bad_broyden;
    if (s == "psb") return UpdateName::psb;
    if (s == "good-broyden") return UpdateName::good_broyden;
    if (s == "aip") return UpdateName::aip;
    if (s == "dfp") return UpdateName::dfp;
    if (s == "bfgs") return UpdateName::bfgs;
    if (s == "column") return UpdateName::column;
    throw ConfigError("unknown update name: " + s);
}

std::string to_string(UpdateName name) {
    switch (name) {
        case UpdateName::kaczmarz: return "kaczmarz";
        case UpdateName::bad_broyden: return "bad-broyden";
        case UpdateName::psb: return "psb";
        case UpdateName::good_broyden: return "good-broyden";
        case UpdateName::aip: return "aip";
        case UpdateName::dfp: return "dfp";
        case UpdateName::bfgs: return "bfgs";
        case UpdateName::column: return "column";
    }
    return "?";
}

void validate_update(UpdateName name, const ProblemMatrix& a) {
    const NamedUpdate& u = named_update(name);
    switch (u.requires_symmetry) {
        case Symmetry::general:
            return;
        case Symmetry::symmetric:
            if (!a.is_symmetric())
                throw ConfigError(to_string(name) + " requires a symmetric matrix");
            return;
        case Symmetry::spd:
            a.validate_spd();
            return;
    }
}

Matrix kaczmarz_step(const Matrix& x, const Matrix& a, const Matrix& s) {
    const Matrix as = a.transpose() * s; // A^T S
    const Matrix gram = as.transpose() * as;
    const Matrix rhs = s.transpose() - as.transpose() * x; // S^T (I - A X)
    return x + as * gram_llt(gram, "kaczmarz_step").solve(rhs);
}

Matrix bad_broyden_step(const Matrix& x, const Matrix& a, const Matrix& s) {
    if (s.cols() == 1) return bad_broyden_step_rank_one(x, a, s.col(0));
    return bad_broyden_step_block(x, a, s);
}

Matrix bad_broyden_step_block(const Matrix& x, const Matrix& a, const Matrix& s) {
    const Matrix as = a * s; // A S
    const Matrix gram = as.transpose() * as;
    const Matrix left = s - x * as; // (I - X A) S
    return x + left * gram_llt(gram, "bad_broyden_step").solve(as.transpose());
}

Matrix bad_broyden_step_rank_one(const Matrix& x, const Matrix& a, const Vector& s) {
    const Vector gamma = a * s;
    const double denom = gamma.squaredNorm();
    if (denom <= 0.0)
        throw GramRankDeficientError("bad_broyden_step: A S vanished");
    return x + ((s - x * gamma) / denom) * gamma.transpose();
}

Matrix psb_step(const Matrix& x, const Matrix& a, const Matrix& s) {
    const Matrix as = a * s;
    const Matrix gram = as.transpose() * as; // S^T A A S
    const Matrix t = gram_llt(gram, "psb_step").solve(as.transpose()); // Lambda-part, q x n
    const Matrix u = x * as - s;   // (X A - I) S
    const Matrix mtheta = u * t;   // M Theta
    const Matrix c = as.transpose() * u; // Theta^T (A X A - A) Theta core, q x q
    return x - mtheta - mtheta.transpose() + t.transpose() * (c * t);
}

IteratePair good_broyden_step(const Matrix& x, const Matrix& x_inv, const Matrix& a, Index i) {
    const Vector w = x_inv * a.col(i); // X^{-1} A e_i
    const double denom = w(i);
    if (std::abs(denom) < 1e-14)
        throw NumericalError("good_broyden_step: degenerate pivot");

    IteratePair next;
    next.primal = x;
    next.primal.col(i) = a.col(i);

    Vector u = w;
    u(i) -= 1.0; // (X^{-1} A - I) e_i
    next.inverse = x_inv - (u / denom) * x_inv.row(i);
    return next;
}

Matrix aip_step(const Matrix& x, const Matrix& a, const Matrix& s) {
    const Matrix as = a * s;
    const Matrix gram = s.transpose() * as; // S^T A S
    const Matrix rhs = s.transpose() - as.transpose() * x;
    return x + s * gram_llt(gram, "aip_step").solve(rhs);
}

IteratePair dfp_step(const Matrix& x, const Matrix& x_inv, const Matrix& a, const Matrix& s) {
    const Matrix as = a * s;
    const Matrix gram = s.transpose() * as; // S^T A S
    const Eigen::LLT<Matrix> llt = gram_llt(gram, "dfp_step");
    const Matrix t1 = llt.solve(as.transpose()); // (S^T A S)^{-1} S^T A
    const Matrix t2 = llt.solve(s.transpose());  // (S^T A S)^{-1} S^T
    const Matrix k = t2 * x;                     // q x n
    const Matrix aox = as * k;                   // A Omega X
    const Matrix aoa = as * t1;                  // A Omega A

    IteratePair next;
    next.primal = x + aoa - aox - aox.transpose() + as * ((k * t2.transpose()) * as.transpose());

    // dual (BFGS-form) update of the inverse with Y = A S:
    // H+ = H + S (S^T A S)^{-1} S^T - H Y (Y^T H Y)^{-1} Y^T H
    const Matrix hy = x_inv * as;
    const Matrix gram2 = as.transpose() * hy; // S^T A X^{-1} A S
    next.inverse =
        x_inv + s * t2 - hy * gram_llt(gram2, "dfp_step (inverse)").solve(hy.transpose());
    return next;
}

Matrix bfgs_step(const Matrix& x, const Matrix& a, const Matrix& s) {
    const Matrix as = a * s;
    const Matrix gram = s.transpose() * as; // S^T A S
    const Eigen::LLT<Matrix> llt = gram_llt(gram, "bfgs_step");
    const Matrix t1 = llt.solve(as.transpose()); // (S^T A S)^{-1} S^T A, so P A = S t1
    const Matrix t2 = llt.solve(s.transpose());  // so P = S t2
    const Matrix k = t1 * x;                     // q x n
    const Matrix pax = s * k;                    // P A X
    // X+ = P + (I - P A) X (I - A P) expanded to keep every product rank q
    return s * t2 + x - pax - pax.transpose() + s * ((k * t1.transpose()) * s.transpose());
}

Matrix column_update_step(const Matrix& x, const Matrix& a, const Matrix& v, bool symmetric) {
    const Matrix av = a * v; // A V
    const Matrix gram = av.transpose() * av;
    const Eigen::LLT<Matrix> llt = gram_llt(gram, "column_update_step");
    if (!symmetric) {
        const Matrix rhs = av.transpose() - (av.transpose() * a) * x; // V^T(A^T - A^T A X)
        return x + v * llt.solve(rhs);
    }
    // symmetric variant: the sym update with S = A V and W = (A^2)^{-1},
    // which reduces to Theta = A V L V^T, L = (V^T A^2 V)^{-1}
    const Matrix aav = a * av;                 // A^2 V
    const Matrix t = llt.solve(v.transpose()); // L V^T
    const Matrix u = x * aav - av;             // (X A - I) A V
    const Matrix mtheta = u * t;
    const Matrix c = aav.transpose() * u;      // Theta^T (A X A - A) Theta core
    return x - mtheta - mtheta.transpose() + t.transpose() * (c * t);
}

} // namespace stochinv
