#include "stochinv/weights.hpp"

#include "stochinv/linalg.hpp"

#include <stdexcept>

namespace stochinv {

WeightSpec WeightSpec::explicit_matrix(Matrix w) {
    if (w.rows() != w.cols()) throw std::invalid_argument("WeightSpec: explicit W must be square");
    if ((w - w.transpose()).norm() > 1e-10 * std::max(1.0, w.norm()))
        throw std::invalid_argument("WeightSpec: explicit W must be symmetric");
    Eigen::LLT<Matrix> llt(w);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("WeightSpec: explicit W is not positive definite");
    WeightSpec spec(WeightKind::explicit_matrix);
    spec.explicit_ = std::move(w);
    return spec;
}

std::string WeightSpec::name() const {
    switch (kind_) {
        case WeightKind::identity: return "identity";
        case WeightKind::matrix_a: return "a";
        case WeightKind::explicit_matrix: return "explicit";
        case WeightKind::inverse_of_a: return "inv-a";
        case WeightKind::a_squared: return "a2";
        case WeightKind::gram_inverse_left: return "gram-left";
        case WeightKind::gram_inverse_right: return "gram-right";
    }
    return "?";
}

namespace {

Matrix spd_inverse(const Matrix& m, const char* what) {
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error(std::string("WeightSpec: ") + what + " is not positive definite");
    return llt.solve(Matrix::Identity(m.rows(), m.cols()));
}

} // namespace

Matrix WeightSpec::resolve(const ProblemMatrix& a) const {
    const Index n = a.n();
    switch (kind_) {
        case WeightKind::identity:
            return Matrix::Identity(n, n);
        case WeightKind::matrix_a:
            a.validate_spd();
            return a.data();
        case WeightKind::explicit_matrix:
            if (explicit_->rows() != n)
                throw std::invalid_argument("WeightSpec: explicit W dimension mismatch");
            return *explicit_;
        case WeightKind::inverse_of_a:
            a.validate_spd();
            return spd_inverse(a.data(), "A");
        case WeightKind::a_squared:
            a.validate_spd();
            return a.data() * a.data();
        case WeightKind::gram_inverse_left:
            return spd_inverse(a.data().transpose() * a.data(), "A^T A");
        case WeightKind::gram_inverse_right:
            return spd_inverse(a.data() * a.data().transpose(), "A A^T");
    }
    throw std::logic_error("WeightSpec: unknown kind");
}

Matrix WeightSpec::resolve_sqrt(const ProblemMatrix& a) const {
    switch (kind_) {
        case WeightKind::identity:
            return Matrix::Identity(a.n(), a.n());
        case WeightKind::matrix_a:
            a.validate_spd();
            return sym_sqrt(a.data());
        case WeightKind::inverse_of_a:
            a.validate_spd();
            return sym_inv_sqrt(a.data());
        case WeightKind::a_squared:
            a.validate_spd();
            return a.data();
        default:
            return sym_sqrt(resolve(a));
    }
}

Matrix WeightSpec::resolve_inv_sqrt(const ProblemMatrix& a) const {
    switch (kind_) {
        case WeightKind::identity:
            return Matrix::Identity(a.n(), a.n());
        case WeightKind::matrix_a:
            a.validate_spd();
            return sym_inv_sqrt(a.data());
        case WeightKind::inverse_of_a:
            a.validate_spd();
            return sym_sqrt(a.data());
        case WeightKind::a_squared:
            a.validate_spd();
            return spd_inverse(a.data(), "A");
        default:
            return sym_inv_sqrt(resolve(a));
    }
}

} // namespace stochinv
