#pragma once

#include "stochinv/problem_matrix.hpp"
#include "stochinv/sketching.hpp"
#include "stochinv/types.hpp"
#include "stochinv/weights.hpp"

#include <optional>
#include <string>

namespace stochinv {

/// Convergence-rate diagnostics for an (A, W, sampling) triple.
struct RateReport {
    Matrix expected_z;   // symmetric positive definite for complete samplings
    double rho = 1.0;    // 1 - lambda_min(W^{1/2} E[Z] W^{1/2})
    double lower_bound = 0.0; // 1 - E[q]/n
    std::optional<double> kappa_2f;
    std::optional<double> gamma_bound;
    std::string sampling_descriptor;
};

/// Z = A^T S (S^T A W A^T S)^{-1} S^T A (row side); the column side swaps
/// A for A^T. W^{1/2} Z W^{1/2} is an orthogonal projector of rank q.
Matrix projector_z(const ProblemMatrix& a, const WeightSpec& w, const Matrix& s, SketchSide side);

/// Closed-form E[Z] for a complete discrete sampling.
Matrix expected_z_discrete(const ProblemMatrix& a, const WeightSpec& w,
                           const DiscreteSampling& sampling, SketchSide side);

RateReport rho(const ProblemMatrix& a, const WeightSpec& w, const DiscreteSampling& sampling,
               SketchSide side);

/// Scaled condition number sqrt(Tr(M M^T) / lambda_min(M M^T)); >= sqrt(n).
double kappa_2f(const Matrix& m);

struct FracsumResult {
    Vector p;
    double value; // (sum_i sqrt(a_i))^2, the minimum of sum a_i / p_i over the simplex
};

/// Minimizer of sum_i a_i / p_i over the probability simplex.
FracsumResult fracsum_optimal_p(const Vector& a);

/// gamma(p) = 1 - 1 / Tr(W^{-1/2} (E[Z_p])^{-1} W^{-1/2}); an upper bound
/// on rho. When the stacked family is square invertible the fracsum
/// expansion is evaluated as well and cross-checked against the direct path.
double gamma_upper_bound(const ProblemMatrix& a, const WeightSpec& w,
                         const DiscreteSampling& sampling, const Vector& p, SketchSide side);

/// Iterations needed to push the expected squared error below eps:
/// ceil(log(1/eps) / (1 - rho)). The halved variant covers the norm of
/// the expected error.
long iteration_complexity(double eps, double rho_value);
long iteration_complexity_halved(double eps, double rho_value);

} // namespace stochinv
