#include "stochinv/problem_matrix.hpp"

#include "stochinv/linalg.hpp"

#include <stdexcept>

namespace stochinv {

ProblemMatrix::ProblemMatrix(Matrix data, Symmetry symmetry)
    : data_(std::move(data)), symmetry_(symmetry) {
    if (data_.rows() != data_.cols() || data_.rows() < 1)
        throw std::invalid_argument("ProblemMatrix: matrix must be square with n >= 1");
    if (symmetry_ != Symmetry::general) {
        Matrix sym = 0.5 * (data_ + data_.transpose());
        correction_ = (data_ - sym).norm();
        data_ = std::move(sym);
    }
}

double ProblemMatrix::smallest_eigenvalue() const {
    if (!lambda_min_known_) {
        lambda_min_ = stochinv::smallest_eigenvalue(0.5 * (data_ + data_.transpose()));
        lambda_min_known_ = true;
    }
    return lambda_min_;
}

void ProblemMatrix::validate_spd() const {
    if (symmetry_ != Symmetry::spd)
        throw std::invalid_argument("ProblemMatrix: operation requires an spd-flagged matrix");
    if (lambda_min_known_) {
        if (lambda_min_ <= 0.0)
            throw std::runtime_error("ProblemMatrix: spd flag set but smallest eigenvalue <= 0");
        return;
    }
    // Cholesky success certifies positive definiteness without the
    // O(n^3) eigendecomposition that smallest_eigenvalue() would run.
    Eigen::LLT<Matrix> llt(data_);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("ProblemMatrix: spd flag set but Cholesky failed");
}

} // namespace stochinv
