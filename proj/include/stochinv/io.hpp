#pragma once

#include "stochinv/problem_matrix.hpp"
#include "stochinv/types.hpp"

#include <cstdint>
#include <string>

namespace stochinv {

/// Reads a real-valued Matrix Market file (coordinate or array format).
/// The `symmetric` qualifier mirrors the stored triangle; the symmetry
/// flag of the result follows the header. Parse errors carry line numbers.
ProblemMatrix load_matrix_market(const std::string& path);

/// Dense ridge Hessian A^T A + lambda I from a LIBSVM sparse file
/// (label idx:value ..., 1-based indices); n is the largest feature
/// index. SPD-flagged when lambda > 0.
ProblemMatrix build_ridge_hessian(const std::string& path, double lambda);

/// A = Abar^T Abar with Abar i.i.d. uniform(0,1) from the seeded stream;
/// SPD-flagged.
ProblemMatrix gen_synthetic(Index n, std::uint64_t seed);

/// Test hook: the same construction from an explicit factor Abar.
ProblemMatrix synthetic_from_factor(const Matrix& abar);

} // namespace stochinv
