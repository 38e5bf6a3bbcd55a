#include "stochinv/rates.hpp"

#include "stochinv/errors.hpp"
#include "stochinv/linalg.hpp"

#include <cmath>
#include <sstream>

namespace stochinv {

Matrix projector_z(const ProblemMatrix& a, const WeightSpec& w, const Matrix& s,
                   SketchSide side) {
    const Matrix& amat = a.data();
    const Matrix w_mat = w.resolve(a);
    const Matrix as = (side == SketchSide::row) ? Matrix(amat.transpose() * s)
                                                : Matrix(amat * s); // A^T S or A S
    const Matrix gram = as.transpose() * w_mat * as;
    const PinvResult gram_inv = sym_pinv(gram);
    if (gram_inv.dropped != 0)
        throw GramRankDeficientError("projector_z: sketched Gram matrix is rank deficient");
    return as * gram_inv.pinv * as.transpose();
}

Matrix expected_z_discrete(const ProblemMatrix& a, const WeightSpec& w,
                           const DiscreteSampling& sampling, SketchSide side) {
    sampling.validate(); // positive definite iff the sampling is complete
    const Matrix amat =
        (side == SketchSide::row) ? a.data() : Matrix(a.data().transpose());
    const Matrix w_mat = w.resolve(a);

    // E[Z] = A^T S_stk D^2 S_stk^T A with the block-diagonal
    // D^2 = Diag(p_i (S_i^T A W A^T S_i)^{-1})
    const Index n = a.n();
    Matrix acc = Matrix::Zero(n, n);
    for (std::size_t i = 0; i < sampling.members.size(); ++i) {
        const Matrix& si = sampling.members[i];
        const Matrix as = amat.transpose() * si;
        const Matrix gram = as.transpose() * w_mat * as;
        const PinvResult gram_inv = sym_pinv(gram);
        if (gram_inv.dropped != 0)
            throw GramRankDeficientError("expected_z_discrete: member Gram is rank deficient");
        acc.noalias() +=
            sampling.probabilities[static_cast<Index>(i)] * (as * gram_inv.pinv * as.transpose());
    }
    return 0.5 * (acc + acc.transpose());
}

RateReport rho(const ProblemMatrix& a, const WeightSpec& w, const DiscreteSampling& sampling,
               SketchSide side) {
    RateReport report;
    report.expected_z = expected_z_discrete(a, w, sampling, side);

    const Matrix w_sqrt = w.resolve_sqrt(a);
    const Matrix conj = w_sqrt * report.expected_z * w_sqrt;
    const double lam_min = smallest_eigenvalue(0.5 * (conj + conj.transpose()));
    if (lam_min <= 0.0)
        throw NumericalError("rho: E[Z] conjugate is not positive definite; sampling must be "
                             "complete (Prop on discrete samplings: positive definite if and "
                             "only if complete)");
    report.rho = 1.0 - lam_min;
    report.lower_bound = 1.0 - sampling.expected_width() / static_cast<double>(a.n());

    const double slack = 1e-10;
    if (report.rho < report.lower_bound - slack || report.rho > 1.0 + slack)
        throw NumericalError("rho: computed rate escapes its theoretical sandwich");

    std::ostringstream os;
    os << "n=" << a.n() << " W=" << w.name() << " r=" << sampling.members.size()
       << " side=" << (side == SketchSide::row ? "row" : "col");
    report.sampling_descriptor = os.str();
    return report;
}

double kappa_2f(const Matrix& m) {
    const Matrix gram = m * m.transpose();
    const EigenDecomposition dec = jacobi_eigendecomposition(gram);
    const double lam_min = dec.values.minCoeff();
    const double lam_max = dec.values.maxCoeff();
    if (lam_min <= 1e-13 * lam_max)
        throw NumericalError("kappa_2f: matrix lacks full row rank");
    return std::sqrt(gram.trace() / lam_min);
}

FracsumResult fracsum_optimal_p(const Vector& a) {
    if (a.size() == 0 || a.minCoeff() <= 0.0)
        throw ConfigError("fracsum_optimal_p: all entries must be positive");
    Vector roots = a.cwiseSqrt();
    const double total = roots.sum();
    return FracsumResult{roots / total, total * total};
}

double gamma_upper_bound(const ProblemMatrix& a, const WeightSpec& w,
                         const DiscreteSampling& sampling, const Vector& p, SketchSide side) {
    DiscreteSampling weighted = sampling;
    weighted.probabilities = p;
    const Matrix ez = expected_z_discrete(a, w, weighted, side);

    const Matrix w_inv_sqrt = w.resolve_inv_sqrt(a);
    const PinvResult ez_inv = sym_pinv(ez);
    if (ez_inv.dropped != 0) throw NumericalError("gamma_upper_bound: E[Z_p] is singular");
    const double trace = (w_inv_sqrt * ez_inv.pinv * w_inv_sqrt).trace();
    const double gamma_direct = 1.0 - 1.0 / trace;

    // fracsum expansion, available when the stacked family is square invertible
    const Matrix amat = (side == SketchSide::row) ? a.data() : Matrix(a.data().transpose());
    const Matrix stacked_raw = weighted.stacked();
    if (stacked_raw.cols() == stacked_raw.rows()) {
        Eigen::FullPivLU<Matrix> lu(stacked_raw);
        if (lu.isInvertible()) {
            const Matrix stacked_inv_t = lu.inverse().transpose();
            const Matrix w_sqrt = w.resolve_sqrt(a);
            const Matrix a_inv = lu_inverse(amat);
            double sum = 0.0;
            Index col = 0;
            for (std::size_t i = 0; i < weighted.members.size(); ++i) {
                const Index qi = weighted.members[i].cols();
                const Matrix sbar = stacked_inv_t.middleCols(col, qi);
                const double term =
                    (w_sqrt * a_inv * sbar * weighted.members[i].transpose() * amat * w_inv_sqrt)
                        .squaredNorm();
                sum += term / p[static_cast<Index>(i)];
                col += qi;
            }
            const double gamma_expansion = 1.0 - 1.0 / sum;
            if (std::abs(gamma_expansion - gamma_direct) >
                1e-8 * std::max(1.0, std::abs(gamma_direct)))
                throw NumericalError("gamma_upper_bound: direct and expansion paths disagree");
        }
    }
    return gamma_direct;
}

long iteration_complexity(double eps, double rho_value) {
    if (eps <= 0.0 || eps >= 1.0) throw ConfigError("iteration_complexity: need 0 < eps < 1");
    if (rho_value < 0.0 || rho_value >= 1.0)
        throw ConfigError("iteration_complexity: need 0 <= rho < 1");
    return static_cast<long>(std::ceil(std::log(1.0 / eps) / (1.0 - rho_value)));
}

long iteration_complexity_halved(double eps, double rho_value) {
    if (eps <= 0.0 || eps >= 1.0) throw ConfigError("iteration_complexity: need 0 < eps < 1");
    if (rho_value < 0.0 || rho_value >= 1.0)
        throw ConfigError("iteration_complexity: need 0 <= rho < 1");
    return static_cast<long>(std::ceil(0.5 * std::log(1.0 / eps) / (1.0 - rho_value)));
}

} // namespace stochinv
