#include "stochinv/adarbfgs.hpp"
#include "stochinv/baselines.hpp"
#include "stochinv/bench.hpp"
#include "stochinv/errors.hpp"
#include "stochinv/io.hpp"
#include "stochinv/rates.hpp"
#include "stochinv/simi.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

namespace {

using namespace stochinv;

/// --matrix grammar: synthetic:N[:seed] | identity:N | libsvm:path[:lambda]
/// | mtx:path | a bare path ending in .mtx
MatrixSource parse_matrix_source(const std::string& spec) {
    MatrixSource src;
    const auto split = [](const std::string& s) {
        std::vector<std::string> parts;
        std::size_t start = 0;
        while (true) {
            const std::size_t colon = s.find(':', start);
            if (colon == std::string::npos) {
                parts.push_back(s.substr(start));
                break;
            }
            parts.push_back(s.substr(start, colon - start));
            start = colon + 1;
        }
        return parts;
    };
    const std::vector<std::string> parts = split(spec);
    const std::string& head = parts[0];
    try {
        if (head == "synthetic") {
            if (parts.size() < 2 || parts.size() > 3)
                throw ConfigError("--matrix synthetic:N[:seed]");
            src.kind = MatrixSourceKind::synthetic;
            src.n = std::stol(parts[1]);
            src.seed = parts.size() == 3 ? std::stoull(parts[2]) : 0;
        } else if (head == "identity") {
            if (parts.size() != 2) throw ConfigError("--matrix identity:N");
            src.kind = MatrixSourceKind::identity;
            src.n = std::stol(parts[1]);
        } else if (head == "libsvm") {
            if (parts.size() < 2 || parts.size() > 3)
                throw ConfigError("--matrix libsvm:path[:lambda]");
            src.kind = MatrixSourceKind::libsvm;
            src.path = parts[1];
            src.lambda = parts.size() == 3 ? std::stod(parts[2]) : 1.0;
        } else if (head == "mtx") {
            if (parts.size() != 2) throw ConfigError("--matrix mtx:path");
            src.kind = MatrixSourceKind::mtx;
            src.path = parts[1];
        } else if (spec.size() > 4 && spec.substr(spec.size() - 4) == ".mtx") {
            src.kind = MatrixSourceKind::mtx;
            src.path = spec;
        } else {
            throw ConfigError("unrecognized --matrix value '" + spec + "'");
        }
    } catch (const std::invalid_argument&) {
        throw ConfigError("malformed number in --matrix value '" + spec + "'");
    }
    return src;
}

ProbabilityRule parse_probabilities(const std::string& s) {
    if (s == "uniform") return ProbabilityRule::uniform;
    if (s == "convenient") return ProbabilityRule::convenient;
    if (s == "optimized") return ProbabilityRule::optimized_exact;
    if (s == "heuristic") return ProbabilityRule::optimized_heuristic;
    throw ConfigError("unknown --probabilities value '" + s + "'");
}

WeightSpec parse_weight(const std::string& s) {
    if (s == "identity") return WeightSpec::identity();
    if (s == "inv-a") return WeightSpec::inverse_of_a();
    if (s == "a2") return WeightSpec::a_squared();
    if (s == "gram-left") return WeightSpec::gram_inverse_left();
    if (s == "gram-right") return WeightSpec::gram_inverse_right();
    throw ConfigError("unknown --weight value '" + s + "'");
}

std::uint64_t effective_seed(const CLI::Option* opt, std::uint64_t flag_value) {
    if (opt->count() > 0) return flag_value;
    if (const char* env = std::getenv("STOCHINV_SEED")) return std::stoull(env);
    return flag_value;
}

void warn_if_sparse(const ProblemMatrix& a, const MatrixSource& src) {
    if (src.kind != MatrixSourceKind::mtx) return;
    const Index n = a.n();
    Index nnz = 0;
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < n; ++i)
            if (a.data()(i, j) != 0.0) ++nnz;
    const double density = static_cast<double>(nnz) / (static_cast<double>(n) * n);
    if (density < 0.01)
        std::cerr << "warning: matrix density " << density * 100.0
                  << "% < 1%; this tool densifies sparse input and is desk-scale\n";
}

void write_matrix_market(const ProblemMatrix& a, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    const Index n = a.n();
    const bool symmetric = a.is_symmetric();
    out << "%%MatrixMarket matrix array real " << (symmetric ? "symmetric" : "general") << "\n";
    out << n << " " << n << "\n";
    out.precision(17);
    for (Index j = 0; j < n; ++j)
        for (Index i = symmetric ? j : 0; i < n; ++i) out << a.data()(i, j) << "\n";
    if (!out) throw IoError("failed writing " + path);
}

int run(int argc, char** argv) {
    CLI::App app{"stochastic sketch-and-project matrix inversion"};
    app.require_subcommand(1);

    std::string matrix_spec;
    std::vector<std::string> methods;
    Index q = 0;
    std::string probabilities = "uniform";
    std::string weight = "identity";
    double tol = 1e-2;
    long max_iters = 1000;
    std::uint64_t seed = 0;
    long trials = 1;
    std::string init = "paper";
    std::string out_csv, out_svg, out_path;
    bool force = false;
    Index gen_n = 100;

    CLI::App* gen = app.add_subcommand("gen", "generate a synthetic SPD matrix (Matrix Market)");
    gen->add_option("--n", gen_n, "dimension")->check(CLI::PositiveNumber);
    CLI::Option* gen_seed = gen->add_option("--seed", seed, "generator seed");
    gen->add_option("--out", out_path, "output .mtx path")->required();

    CLI::App* rate = app.add_subcommand("rate", "convergence-rate report for a sampling");
    rate->add_option("--matrix", matrix_spec)->required();
    rate->add_option("--q", q, "sketch width (default 1)");
    rate->add_option("--probabilities", probabilities, "uniform|convenient|optimized|heuristic");
    rate->add_option("--weight", weight, "identity|inv-a|a2|gram-left|gram-right");
    rate->add_flag("--force", force, "allow the O(n^3) rate computation beyond n = 5000");

    CLI::App* invert = app.add_subcommand("invert", "run one method to tolerance");
    invert->add_option("--matrix", matrix_spec)->required();
    invert->add_option("--method", methods, "method name")->required();
    invert->add_option("--q", q, "sketch width (default ceil(sqrt(n)))");
    invert->add_option("--probabilities", probabilities);
    invert->add_option("--weight", weight);
    invert->add_option("--tol", tol);
    invert->add_option("--max-iters", max_iters);
    CLI::Option* invert_seed = invert->add_option("--seed", seed);
    invert->add_option("--init", init, "paper|identity");

    CLI::App* bench = app.add_subcommand("bench", "multi-method benchmark with CSV/SVG traces");
    bench->add_option("--matrix", matrix_spec)->required();
    bench->add_option("--method", methods, "method name (repeatable)")->required();
    bench->add_option("--q", q);
    bench->add_option("--probabilities", probabilities);
    bench->add_option("--weight", weight);
    bench->add_option("--tol", tol);
    bench->add_option("--max-iters", max_iters);
    CLI::Option* bench_seed = bench->add_option("--seed", seed);
    bench->add_option("--trials", trials);
    bench->add_option("--init", init, "paper|identity");
    bench->add_option("--out-csv", out_csv);
    bench->add_option("--out-svg", out_svg);

    CLI11_PARSE(app, argc, argv);

    if (gen->parsed()) {
        write_matrix_market(gen_synthetic(gen_n, effective_seed(gen_seed, seed)), out_path);
        std::cout << "wrote synthetic(" << gen_n << ") to " << out_path << "\n";
        return 0;
    }

    const MatrixSource src = parse_matrix_source(matrix_spec);
    const ProblemMatrix a = src.load();
    warn_if_sparse(a, src);
    const WeightSpec w = parse_weight(weight);
    const ProbabilityRule prule = parse_probabilities(probabilities);

    if (rate->parsed()) {
        if (a.n() > 5000 && !force)
            throw ConfigError("rate computation is O(n^3) dense; pass --force beyond n = 5000");
        const Index qq = q > 0 ? q : 1;
        SketchRule rule = qq == 1 ? SketchRule::coordinate(prule)
                                  : SketchRule::coordinate_block(a.n(), qq, prule);
        const std::vector<Matrix> members = discrete_members(rule, a.n());
        const Vector p = resolve_probabilities(rule, members, a, w, SketchSide::row);
        const DiscreteSampling sampling{members, p};
        const RateReport report = rho(a, w, sampling, SketchSide::row);
        std::cout << "sampling:   " << rule.describe() << " " << report.sampling_descriptor
                  << "\n";
        std::cout << "rho:        " << report.rho << "\n";
        std::cout << "lower bound (1 - E[q]/n): " << report.lower_bound << "\n";
        std::cout << "iterations for eps=1e-2 (expected sq. error): "
                  << iteration_complexity(1e-2, report.rho) << "\n";
        if (prule == ProbabilityRule::optimized_exact) {
            const OptimizedProbabilities opt =
                optimized_probabilities(members, a, w, InverseSource::exact);
            std::cout << "gamma(p*) upper bound: " << opt.gamma << "\n";
        }
        return 0;
    }

    BenchmarkSpec spec;
    for (const std::string& name : methods) {
        MethodConfig m;
        m.name = name;
        m.q = q;
        m.probabilities = prule;
        m.w = w;
        spec.methods.push_back(std::move(m));
    }
    spec.tol = tol;
    spec.max_iters = max_iters;
    spec.trials = trials;
    if (init == "paper") {
        spec.init = InitPolicy::paper;
    } else if (init == "identity") {
        spec.init = InitPolicy::identity;
    } else {
        throw ConfigError("unknown --init value '" + init + "'");
    }

    if (invert->parsed()) {
        spec.seed = effective_seed(invert_seed, seed);
        spec.trials = 1;
        const std::vector<ConvergenceTrace> traces = run_benchmark(a, spec);
        const ConvergenceTrace& trace = traces.front();
        const HistoryPoint& last = trace.points.back();
        std::cout << "method:   " << trace.method << "\n";
        std::cout << "status:   " << trace.status << "\n";
        std::cout << "iters:    " << last.k << "\n";
        std::cout << "residual: " << last.residual << "\n";
        std::cout << "flops:    " << last.flops << "\n";
        std::cout << "seconds:  " << last.seconds << "\n";
        if (trace.status == "diverged" || trace.status == "error")
            throw NumericalError("method " + trace.method + " did not converge (" +
                                 trace.status + ")");
        return 0;
    }

    spec.seed = effective_seed(bench_seed, seed);
    const std::vector<ConvergenceTrace> traces = run_benchmark(a, spec);
    for (const ConvergenceTrace& trace : traces) {
        const HistoryPoint& last =
            trace.points.empty() ? HistoryPoint{} : trace.points.back();
        std::cout << trace.method;
        if (trials > 1) std::cout << "#" << trace.trial;
        std::cout << ": " << trace.status << " iters=" << last.k << " residual=" << last.residual
                  << " flops=" << last.flops << " seconds=" << last.seconds << "\n";
    }
    if (!out_csv.empty()) write_csv(traces, out_csv);
    if (!out_svg.empty()) write_svg(traces, out_svg);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const stochinv::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const stochinv::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const stochinv::NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
