#pragma once

#include <stdexcept>
#include <string>

namespace stochinv {

/// Invalid configuration (bad flags, mismatched dimensions, rule misuse).
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Numerical failure (divergence, factorization failure, rank deficiency).
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A sketched Gram matrix was rank deficient; callers resample.
struct GramRankDeficientError : NumericalError {
    explicit GramRankDeficientError(const std::string& what) : NumericalError(what) {}
};

/// File parsing / filesystem failure.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace stochinv
