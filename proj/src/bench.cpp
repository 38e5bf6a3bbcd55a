#include "stochinv/bench.hpp"

#include "stochinv/adarbfgs.hpp"
#include "stochinv/baselines.hpp"
#include "stochinv/errors.hpp"
#include "stochinv/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <sstream>

namespace stochinv {

ProblemMatrix MatrixSource::load() const {
    switch (kind) {
        case MatrixSourceKind::mtx: return load_matrix_market(path);
        case MatrixSourceKind::libsvm: return build_ridge_hessian(path, lambda);
        case MatrixSourceKind::synthetic: return gen_synthetic(n, seed);
        case MatrixSourceKind::identity:
            if (n < 1) throw ConfigError("identity source: n must be >= 1");
            return ProblemMatrix(Matrix::Identity(n, n), Symmetry::spd);
    }
    throw ConfigError("MatrixSource: unknown kind");
}

std::string MatrixSource::describe() const {
    std::ostringstream os;
    switch (kind) {
        case MatrixSourceKind::mtx: os << "mtx(" << path << ")"; break;
        case MatrixSourceKind::libsvm: os << "libsvm(" << path << ", lambda=" << lambda << ")"; break;
        case MatrixSourceKind::synthetic: os << "synthetic(" << n << ", seed=" << seed << ")"; break;
        case MatrixSourceKind::identity: os << "identity(" << n << ")"; break;
    }
    return os.str();
}

namespace {

Index default_q(Index n) {
    return std::max<Index>(1, static_cast<Index>(std::ceil(std::sqrt(static_cast<double>(n)))));
}

RunResult run_method(const ProblemMatrix& a, const MethodConfig& m, const BenchmarkSpec& spec,
                     std::uint64_t seed) {
    const Index n = a.n();
    const Index q = m.q > 0 ? m.q : default_q(n);
    TrackOptions track;
    track.residual_every_k = spec.residual_every_k;
    track.wall_time = spec.measure_time;

    if (m.name == "newton-schulz" || m.name == "mr") {
        BaselineConfig c{a};
        c.method = m.name == "mr" ? BaselineMethod::minimal_residual
                                  : BaselineMethod::newton_schulz;
        c.tol = spec.tol;
        c.max_iters = spec.max_iters;
        c.time_budget_seconds = spec.time_budget_seconds;
        c.seed = seed;
        c.track = track;
        if (spec.init == InitPolicy::identity) c.x0 = Matrix::Identity(n, n);
        return run_baseline(c);
    }

    if (m.name == "adarbfgs-cols" || m.name == "adarbfgs-gauss") {
        AdaConfig c{a};
        c.rule = m.name == "adarbfgs-cols" ? SketchRule::adaptive_cols(n, q)
                                           : SketchRule::adaptive_gauss(q);
        c.tol = spec.tol;
        c.max_iters = spec.max_iters;
        c.time_budget_seconds = spec.time_budget_seconds;
        c.seed = seed;
        c.track = track;
        return run_adarbfgs(c);
    }

    InverterConfig c{a};
    if (m.name == "row") {
        c.method = MethodSpec::row();
        c.w = m.w;
    } else if (m.name == "col") {
        c.method = MethodSpec::col();
        c.w = m.w;
    } else if (m.name == "sym") {
        c.method = MethodSpec::sym();
        c.w = m.w;
    } else {
        c.method = MethodSpec::named_method(update_name_from_string(m.name));
    }
    if (c.method.kind == VariantKind::named && c.method.name == UpdateName::good_broyden) {
        c.rule = SketchRule::coordinate(ProbabilityRule::uniform);
    } else if (q == 1) {
        c.rule = SketchRule::coordinate(m.probabilities);
    } else {
        c.rule = SketchRule::coordinate_block(n, q, m.probabilities);
    }
    c.tol = spec.tol;
    c.max_iters = spec.max_iters;
    c.time_budget_seconds = spec.time_budget_seconds;
    c.seed = seed;
    c.track = track;
    return run_inverter(c);
}

std::string status_of(const RunResult& r) {
    switch (r.termination) {
        case Termination::tol_reached: return "tol_reached";
        case Termination::max_iters: return "max_iters";
        case Termination::error:
            return r.message.rfind("diverged", 0) == 0 ? "diverged" : "error";
    }
    return "error";
}

ConvergenceTrace run_trial(const ProblemMatrix& a, const MethodConfig& m,
                           const BenchmarkSpec& spec, std::size_t method_index, long trial) {
    ConvergenceTrace trace;
    trace.method = m.name;
    trace.trial = trial;
    const std::uint64_t seed =
        spec.seed ^ (0x9e3779b97f4a7c15ULL *
                     (static_cast<std::uint64_t>(method_index) * 4096u +
                      static_cast<std::uint64_t>(trial) + 1u));
    try {
        const RunResult result = run_method(a, m, spec, seed);
        trace.points = result.state.history;
        trace.status = status_of(result);
    } catch (const std::exception& e) {
        trace.status = "error";
        trace.points.clear();
        trace.points.push_back({0, 1.0, 0.0, 0.0});
        (void)e;
    }
    return trace;
}

} // namespace

std::vector<ConvergenceTrace> run_benchmark(const ProblemMatrix& a, const BenchmarkSpec& spec) {
    if (spec.methods.empty()) throw ConfigError("run_benchmark: at least one method required");
    if (spec.tol < 0.0) throw ConfigError("run_benchmark: tol must be >= 0");
    if (spec.trials < 1) throw ConfigError("run_benchmark: trials must be >= 1");

    std::vector<ConvergenceTrace> traces;
    for (std::size_t mi = 0; mi < spec.methods.size(); ++mi) {
        const MethodConfig& m = spec.methods[mi];
        if (spec.trials == 1) {
            traces.push_back(run_trial(a, m, spec, mi, 0));
            continue;
        }
        // trials are independent; fan out, then gather in trial order so
        // output stays deterministic
        std::vector<std::future<ConvergenceTrace>> futures;
        futures.reserve(static_cast<std::size_t>(spec.trials));
        for (long t = 0; t < spec.trials; ++t)
            futures.push_back(std::async(std::launch::async, run_trial, std::cref(a),
                                         std::cref(m), std::cref(spec), mi, t));
        for (auto& f : futures) traces.push_back(f.get());
    }
    return traces;
}

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

void write_csv(const std::vector<ConvergenceTrace>& traces, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "method,iter,residual,flops,seconds\n";
    const bool multi =
        std::any_of(traces.begin(), traces.end(), [](const auto& t) { return t.trial > 0; });
    for (const ConvergenceTrace& trace : traces) {
        std::string label = trace.method;
        if (multi) label += "#" + std::to_string(trace.trial);
        for (const HistoryPoint& p : trace.points)
            out << label << ',' << p.k << ',' << fmt(p.residual) << ',' << fmt(p.flops) << ','
                << fmt(p.seconds) << '\n';
    }
    if (!out) throw IoError("failed writing " + path);
}

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

struct PanelGeom {
    double x0, y0, w, h; // plot area in SVG coordinates
};

void emit_panel(std::ostream& out, const std::vector<ConvergenceTrace>& traces,
                const PanelGeom& g, bool use_seconds, const std::string& title) {
    double xmax = 0.0;
    double ymin = 1.0, ymax = 1.0;
    for (const auto& t : traces)
        for (const auto& p : t.points) {
            xmax = std::max(xmax, use_seconds ? p.seconds : p.flops);
            if (p.residual > 0.0) ymin = std::min(ymin, p.residual);
            ymax = std::max(ymax, p.residual);
        }
    if (xmax <= 0.0) xmax = 1.0;
    const double floor_res = 1e-16;
    ymin = std::max(ymin / 2.0, floor_res);
    ymax = std::max(ymax * 2.0, ymin * 10.0);
    const double ly0 = std::log10(ymin), ly1 = std::log10(ymax);

    const auto sx = [&](double v) { return g.x0 + g.w * (v / xmax); };
    const auto sy = [&](double r) {
        const double lr = std::log10(std::max(r, floor_res));
        return g.y0 + g.h * (1.0 - (lr - ly0) / (ly1 - ly0));
    };

    out << "<rect x='" << g.x0 << "' y='" << g.y0 << "' width='" << g.w << "' height='" << g.h
        << "' fill='none' stroke='black'/>\n";
    out << "<text x='" << g.x0 + g.w / 2 << "' y='" << g.y0 - 10
        << "' text-anchor='middle' font-size='14'>" << title << "</text>\n";
    // log-decade gridlines and labels
    for (int d = static_cast<int>(std::ceil(ly0)); d <= static_cast<int>(std::floor(ly1)); ++d) {
        const double y = sy(std::pow(10.0, d));
        out << "<line x1='" << g.x0 << "' y1='" << y << "' x2='" << g.x0 + g.w << "' y2='" << y
            << "' stroke='#dddddd'/>\n";
        out << "<text x='" << g.x0 - 6 << "' y='" << y + 4
            << "' text-anchor='end' font-size='10'>1e" << d << "</text>\n";
    }
    out << "<text x='" << g.x0 + g.w << "' y='" << g.y0 + g.h + 16
        << "' text-anchor='end' font-size='10'>" << fmt(xmax)
        << (use_seconds ? " s" : " flops") << "</text>\n";

    std::size_t color = 0;
    for (const auto& t : traces) {
        if (t.points.empty()) continue;
        out << "<polyline fill='none' stroke='" << kPalette[color % 8] << "' points='";
        for (const auto& p : t.points)
            out << sx(use_seconds ? p.seconds : p.flops) << ',' << sy(p.residual) << ' ';
        out << "'/>\n";
        ++color;
    }
}

} // namespace

void write_svg(const std::vector<ConvergenceTrace>& traces, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "<svg xmlns='http://www.w3.org/2000/svg' version='1.1' width='980' height='520' "
           "viewBox='0 0 980 520'>\n";
    out << "<rect width='980' height='520' fill='white'/>\n";
    emit_panel(out, traces, {60, 40, 400, 400}, true, "relative residual vs seconds");
    emit_panel(out, traces, {540, 40, 400, 400}, false, "relative residual vs flops");
    // legend
    std::size_t color = 0;
    double y = 475.0;
    double x = 60.0;
    for (const auto& t : traces) {
        std::string label = t.method;
        if (t.trial > 0) label += "#" + std::to_string(t.trial);
        label += " [" + t.status + "]";
        out << "<rect x='" << x << "' y='" << y - 9 << "' width='12' height='12' fill='"
            << kPalette[color % 8] << "'/>\n";
        out << "<text x='" << x + 16 << "' y='" << y + 2 << "' font-size='11'>" << label
            << "</text>\n";
        ++color;
        x += 180.0;
        if (x > 900.0) {
            x = 60.0;
            y += 18.0;
        }
    }
    out << "</svg>\n";
    if (!out) throw IoError("failed writing " + path);
}

} // namespace stochinv
