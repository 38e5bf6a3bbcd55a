#pragma once

#include "stochinv/types.hpp"

namespace stochinv {

enum class Symmetry { general, symmetric, spd };

/// The dense square matrix A to invert, with its symmetry class.
/// Construction with a symmetric/spd flag symmetrizes (M + M^T)/2 and
/// records the magnitude of the applied correction.
class ProblemMatrix {
public:
    ProblemMatrix(Matrix data, Symmetry symmetry);

    const Matrix& data() const { return data_; }
    Index n() const { return data_.rows(); }
    Symmetry symmetry() const { return symmetry_; }
    bool is_symmetric() const { return symmetry_ != Symmetry::general; }

    /// Frobenius norm of the skew part removed at construction.
    double symmetrization_correction() const { return correction_; }

    /// For the spd flag: smallest eigenvalue, computed on demand and
    /// cached. Throws if the flag is spd and lambda_min <= 0.
    double smallest_eigenvalue() const;
    void validate_spd() const;

private:
    Matrix data_;
    Symmetry symmetry_;
    double correction_ = 0.0;
    mutable double lambda_min_ = 0.0;
    mutable bool lambda_min_known_ = false;
};

} // namespace stochinv
