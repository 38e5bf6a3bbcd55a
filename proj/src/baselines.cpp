#include "stochinv/baselines.hpp"

#include "stochinv/errors.hpp"
#include "stochinv/flops.hpp"
#include "stochinv/linalg.hpp"

#include <chrono>
#include <cmath>

namespace stochinv {

Matrix newton_schulz_step(const Matrix& x, const Matrix& a) {
    return 2.0 * x - x * (a * x);
}

Matrix newton_schulz_init(const Matrix& a, std::uint64_t seed) {
    const double s = spectral_norm_estimate(a, 100, seed);
    if (s <= 0.0) throw ConfigError("newton_schulz_init: zero matrix");
    return (0.99 / (s * s)) * a.transpose();
}

MrStep mr_step_cached(const Matrix& x, const Matrix& r, const Matrix& a) {
    MrStep out;
    const Matrix xr = x * r;
    const Matrix axr = a * xr;
    const double denom = axr.squaredNorm();
    if (denom == 0.0) {
        out.x = x;
        out.r = r;
        out.stagnated = true;
        return out;
    }
    out.alpha = r.cwiseProduct(axr).sum() / denom; // Tr(R^T A X R) / ||A X R||^2
    out.x = x + out.alpha * xr;
    out.r = r - out.alpha * axr;
    return out;
}

Matrix mr_step(const Matrix& x, const Matrix& a) {
    const Index n = x.rows();
    const Matrix r = Matrix::Identity(n, n) - a * x;
    return mr_step_cached(x, r, a).x;
}

Matrix mr_init(const Matrix& a) {
    const double denom = (a * a.transpose()).trace();
    if (denom == 0.0) throw ConfigError("mr_init: zero matrix");
    const Index n = a.rows();
    return (a.trace() / denom) * Matrix::Identity(n, n);
}

RunResult run_baseline(const BaselineConfig& config) {
    if (config.tol < 0.0) throw ConfigError("run_baseline: tol must be >= 0");
    if (config.max_iters < 1) throw ConfigError("run_baseline: max_iters must be >= 1");
    const Index n = config.a.n();
    const Matrix& a = config.a.data();
    const bool ns = config.method == BaselineMethod::newton_schulz;
    const std::string label = ns ? "newton-schulz" : "mr";

    RunResult result;
    InverterState& state = result.state;
    if (config.x0) {
        if (config.x0->rows() != n || config.x0->cols() != n)
            throw ConfigError("run_baseline: x0 dimension mismatch");
        state.x = *config.x0;
    } else {
        state.x = ns ? newton_schulz_init(a, config.seed) : mr_init(a);
    }

    Matrix r = Matrix::Identity(n, n) - a * state.x;
    const double base = r.norm();
    const auto record = [&](double rel) {
        state.history.push_back({state.k, rel, state.flops.total(), state.seconds});
    };
    if (base == 0.0) {
        record(0.0);
        result.termination = Termination::tol_reached;
        return result;
    }
    record(1.0);

    for (state.k = 1; state.k <= config.max_iters; ++state.k) {
        const auto start = std::chrono::steady_clock::now();
        bool stagnated = false;
        Matrix next;
        if (ns) {
            next = newton_schulz_step(state.x, a);
        } else {
            MrStep step = mr_step_cached(state.x, r, a);
            stagnated = step.stagnated;
            next = std::move(step.x);
            r = std::move(step.r);
        }
        const auto stop = std::chrono::steady_clock::now();
        if (config.track.wall_time)
            state.seconds += std::chrono::duration<double>(stop - start).count();
        if (config.track.flops)
            state.flops.add(label, ns ? flops::newton_schulz(n) : flops::minimal_residual(n));

        if (!next.allFinite()) {
            result.termination = Termination::error;
            result.message = "diverged: non-finite entries at iteration " +
                             std::to_string(state.k);
            return result; // state.x keeps the last finite iterate
        }
        state.x = std::move(next);

        if (stagnated) {
            const double rel = r.norm() / base;
            record(rel);
            result.termination = rel <= config.tol ? Termination::tol_reached
                                                   : Termination::error;
            if (result.termination == Termination::error)
                result.message = "minimal residual stagnated (zero step denominator) at "
                                 "iteration " + std::to_string(state.k);
            return result;
        }

        if (state.k == 1 || state.k == config.max_iters ||
            state.k % config.track.residual_every_k == 0) {
            if (ns) {
                r = Matrix::Identity(n, n) - a * state.x;
            } else {
                // revalidate then replace the carried residual
                const Matrix full = Matrix::Identity(n, n) - a * state.x;
                r = full;
            }
            const double rel = r.norm() / base;
            record(rel);
            if (!std::isfinite(rel)) {
                result.termination = Termination::error;
                result.message = "diverged: residual overflow at iteration " +
                                 std::to_string(state.k);
                return result;
            }
            if (rel <= config.tol) {
                result.termination = Termination::tol_reached;
                return result;
            }
            if (config.time_budget_seconds > 0.0 &&
                state.seconds > config.time_budget_seconds) {
                result.termination = Termination::max_iters;
                result.message = "time budget exhausted";
                return result;
            }
        }
    }
    state.k = config.max_iters;
    result.termination = Termination::max_iters;
    return result;
}

} // namespace stochinv
