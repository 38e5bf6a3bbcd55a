#include "stochinv/adarbfgs.hpp"

#include "stochinv/errors.hpp"
#include "stochinv/flops.hpp"
#include "stochinv/linalg.hpp"

#include <chrono>
#include <cmath>

namespace stochinv {

Matrix adarbfgs_update_factor(const Matrix& l, const Matrix& a, const Matrix& stilde) {
    const Matrix s = l * stilde;
    const Matrix as = a * s;
    const Matrix gram = s.transpose() * as;        // S^T A S
    const Matrix r = sym_inv_sqrt(gram);           // throws on floor hit
    const Matrix g2 = stilde.transpose() * stilde; // Stilde^T Stilde
    const Matrix term = sym_inv_sqrt(g2) * stilde.transpose();
    const Matrix asl = as.transpose() * l;         // S^T A L
    return l + s * (r * (term - r * asl));         // R symmetric
}

Vector adaptive_block_probabilities(const Matrix& l, const Matrix& a,
                                    const std::vector<std::vector<Index>>& blocks) {
    const Matrix al = a * l; // column j gives l_j^T A l_j via the dot below
    Vector p(static_cast<Index>(blocks.size()));
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        double trace = 0.0;
        for (Index j : blocks[i]) trace += al.col(j).dot(l.col(j));
        p[static_cast<Index>(i)] = trace;
    }
    if (p.minCoeff() <= 0.0)
        throw NumericalError("adaptive_block_probabilities: non-positive block trace; "
                             "the factor has degenerated");
    return p / p.sum();
}

namespace {

Matrix coordinate_block_member(Index n, const std::vector<Index>& block) {
    Matrix s = Matrix::Zero(n, static_cast<Index>(block.size()));
    for (std::size_t j = 0; j < block.size(); ++j)
        s(block[j], static_cast<Index>(j)) = 1.0;
    return s;
}

} // namespace

FactoredState adarbfgs_step(const FactoredState& state, const ProblemMatrix& a,
                            const SketchRule& rule, RngStream& rng, int max_redraws) {
    if (!rule.is_adaptive())
        throw ConfigError("adarbfgs_step: rule must be adaptive-factor-cols or -gauss");
    a.validate_spd();
    const Index n = a.n();
    const bool cols = rule.kind == SketchKind::adaptive_factor_cols;

    Vector p;
    if (cols) p = adaptive_block_probabilities(state.l, a.data(), rule.blocks);

    FactoredState next = state;
    for (int attempt = 0; attempt <= max_redraws; ++attempt) {
        const Matrix stilde =
            cols ? coordinate_block_member(n, rule.blocks[static_cast<std::size_t>(
                       rng.categorical(p))])
                 : rng.gaussian_matrix(n, rule.q);
        try {
            next.l = adarbfgs_update_factor(state.l, a.data(), stilde);
        } catch (const NumericalError&) {
            continue;
        }
        next.k = state.k + 1;
        return next;
    }
    throw NumericalError("adarbfgs_step: rejection limit exceeded for " + rule.describe());
}

double one_step_rate_bound(const Matrix& x, const Matrix& a) {
    const Matrix ax = a * x;
    // A X is similar to the SPD matrix A^{1/2} X A^{1/2}; its eigenvalues
    // are those of the symmetric conjugate X^{1/2} A X^{1/2}
    const Matrix conj = 0.5 * (ax + ax.transpose());
    const Matrix x_sqrt = sym_sqrt(0.5 * (x + x.transpose()));
    const double lam_min = smallest_eigenvalue(x_sqrt * a * x_sqrt);
    if (lam_min <= 0.0) throw NumericalError("one_step_rate_bound: inputs are not SPD");
    const double trace = conj.trace();
    return 1.0 - lam_min / trace;
}

Matrix reconstruct(const FactoredState& state) { return state.l * state.l.transpose(); }

RunResult run_adarbfgs(const AdaConfig& config) {
    config.rule.validate(config.a.n());
    if (!config.rule.is_adaptive())
        throw ConfigError("run_adarbfgs: rule must be adaptive");
    if (config.tol < 0.0) throw ConfigError("run_adarbfgs: tol must be >= 0");
    if (config.max_iters < 1) throw ConfigError("run_adarbfgs: max_iters must be >= 1");
    config.a.validate_spd();

    const Index n = config.a.n();
    const Matrix& a = config.a.data();
    const bool cols = config.rule.kind == SketchKind::adaptive_factor_cols;
    const std::string label = cols ? "adarbfgs-cols" : "adarbfgs-gauss";

    FactoredState fs;
    fs.l = config.l0.value_or(Matrix::Identity(n, n));
    if (fs.l.rows() != n || fs.l.cols() != n)
        throw ConfigError("run_adarbfgs: l0 dimension mismatch");

    RunResult result;
    InverterState& state = result.state;

    const auto residual = [&]() {
        // ||I - A L L^T||_F without forming X: two n x n by n x n products
        return (Matrix::Identity(n, n) - (a * fs.l) * fs.l.transpose()).norm();
    };
    const auto finish = [&]() {
        if (n <= 256) { // cond(L) diagnostic; too costly beyond desk scale
            const EigenDecomposition dec = jacobi_eigendecomposition(fs.l.transpose() * fs.l);
            if (dec.values.minCoeff() > 0.0)
                fs.condition_estimate = std::sqrt(dec.values.maxCoeff() / dec.values.minCoeff());
        }
        state.x = reconstruct(fs);
        state.flops = fs.flops;
        state.seconds = fs.seconds;
    };
    const double base = residual();
    const auto record = [&](double rel) {
        state.history.push_back({state.k, rel, fs.flops.total(), fs.seconds});
    };
    if (base == 0.0) {
        record(0.0);
        finish();
        result.termination = Termination::tol_reached;
        return result;
    }
    record(1.0);

    RngStream rng(config.seed);
    for (state.k = 1; state.k <= config.max_iters; ++state.k) {
        Vector p;
        Matrix next_l;
        bool stepped = false;
        const auto start = std::chrono::steady_clock::now();
        if (cols) p = adaptive_block_probabilities(fs.l, a, config.rule.blocks);
        for (int attempt = 0; attempt <= config.max_redraws && !stepped; ++attempt) {
            const Matrix stilde =
                cols ? coordinate_block_member(
                           n, config.rule.blocks[static_cast<std::size_t>(rng.categorical(p))])
                     : rng.gaussian_matrix(n, config.rule.q);
            try {
                next_l = adarbfgs_update_factor(fs.l, a, stilde);
                stepped = true;
            } catch (const NumericalError&) {
            }
        }
        const auto stop = std::chrono::steady_clock::now();
        if (!stepped) {
            result.termination = Termination::error;
            result.message = "sketch rejection limit exceeded for " + config.rule.describe() +
                             " at iteration " + std::to_string(state.k);
            finish();
            return result;
        }
        if (config.track.wall_time)
            fs.seconds += std::chrono::duration<double>(stop - start).count();
        if (config.track.flops) {
            fs.flops.add(label, flops::adarbfgs(n, config.rule.q));
            if (cols) fs.flops.add("adaptive-probabilities", flops::gemm(n, n, n));
        }
        if (!next_l.allFinite()) {
            result.termination = Termination::error;
            result.message = "diverged: non-finite factor at iteration " + std::to_string(state.k);
            finish();
            return result;
        }
        fs.l = std::move(next_l);
        fs.k = state.k;

        if (state.k == 1 || state.k == config.max_iters ||
            state.k % config.track.residual_every_k == 0) {
            const double rel = residual() / base;
            record(rel);
            if (rel <= config.tol) {
                result.termination = Termination::tol_reached;
                finish();
                return result;
            }
            if (config.time_budget_seconds > 0.0 && fs.seconds > config.time_budget_seconds) {
                result.termination = Termination::max_iters;
                result.message = "time budget exhausted";
                finish();
                return result;
            }
        }
    }
    state.k = config.max_iters;
    finish();
    result.termination = Termination::max_iters;
    return result;
}

} // namespace stochinv
