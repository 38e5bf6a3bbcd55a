#pragma once

#include "stochinv/problem_matrix.hpp"
#include "stochinv/simi.hpp"
#include "stochinv/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace stochinv {

enum class MatrixSourceKind { mtx, libsvm, synthetic, identity };

struct MatrixSource {
    MatrixSourceKind kind = MatrixSourceKind::synthetic;
    std::string path;    // mtx / libsvm
    double lambda = 1.0; // libsvm ridge parameter
    Index n = 0;         // synthetic / identity
    std::uint64_t seed = 0;

    ProblemMatrix load() const;
    std::string describe() const;
};

/// One benchmarked method: a label from the CLI vocabulary plus its
/// sketch/probability/weight settings (ignored where not applicable).
struct MethodConfig {
    std::string name; // row|col|sym|kaczmarz|bad-broyden|psb|good-broyden|aip|dfp|bfgs|column|
                      // adarbfgs-cols|adarbfgs-gauss|newton-schulz|mr
    Index q = 0;      // 0 = ceil(sqrt(n))
    ProbabilityRule probabilities = ProbabilityRule::uniform;
    WeightSpec w = WeightSpec::identity(); // generic variants only
};

enum class InitPolicy {
    paper,   // Newton-Schulz and MR use their prescribed inits, others X0 = I
    identity // X0 = I for every method
};

struct BenchmarkSpec {
    std::vector<MethodConfig> methods;
    double tol = 1e-2;
    long max_iters = 1000;
    double time_budget_seconds = 0.0; // 0 = unlimited; checked between residual recomputes
    std::uint64_t seed = 0;
    long trials = 1;
    InitPolicy init = InitPolicy::paper;
    Index residual_every_k = 10;
    bool measure_time = true; // disable for byte-identical CSV across runs
};

struct ConvergenceTrace {
    std::string method;
    long trial = 0;
    std::vector<HistoryPoint> points;
    std::string status; // tol_reached | max_iters | diverged | error
};

std::vector<ConvergenceTrace> run_benchmark(const ProblemMatrix& a, const BenchmarkSpec& spec);

/// CSV with header method,iter,residual,flops,seconds; %.17g numbers.
/// Method column carries a "#trial" suffix when trials > 1.
void write_csv(const std::vector<ConvergenceTrace>& traces, const std::string& path);

/// Self-contained SVG: residual-vs-seconds and residual-vs-flops panels,
/// log-scale y.
void write_svg(const std::vector<ConvergenceTrace>& traces, const std::string& path);

} // namespace stochinv
