#include "stochinv/simi.hpp"

#include "stochinv/errors.hpp"
#include "stochinv/linalg.hpp"
#include "stochinv/rng.hpp"

#include <Eigen/Cholesky>

#include <chrono>
#include <cmath>

namespace stochinv {

namespace {

Eigen::LLT<Matrix> gram_llt(const Matrix& gram, const char* kernel) {
    Eigen::LLT<Matrix> llt(gram);
    if (llt.info() != Eigen::Success)
        throw GramRankDeficientError(std::string(kernel) +
                                     ": sketched Gram matrix is not positive definite");
    return llt;
}

} // namespace

Matrix step_row(const Matrix& x, const Matrix& a, const Matrix& s, const Matrix* w) {
    if (w == nullptr) return kaczmarz_step(x, a, s);
    const Matrix as = a.transpose() * s;
    const Matrix was = (*w) * as;
    const Matrix gram = as.transpose() * was; // S^T A W A^T S
    const Matrix rhs = s.transpose() - as.transpose() * x;
    return x + was * gram_llt(gram, "step_row").solve(rhs);
}

Matrix step_col(const Matrix& x, const Matrix& a, const Matrix& s, const Matrix* w) {
    if (w == nullptr) return bad_broyden_step_block(x, a, s);
    const Matrix as = a * s;
    const Matrix was = (*w) * as;
    const Matrix gram = as.transpose() * was; // S^T A^T W A S
    const Matrix left = s - x * as;           // (I - X A) S
    return x + left * gram_llt(gram, "step_col").solve(was.transpose());
}

Matrix step_sym(const Matrix& x, const Matrix& a, const Matrix& s, const Matrix* w) {
    if (w == nullptr) return psb_step(x, a, s);
    const Matrix as = a * s;
    const Matrix was = (*w) * as;
    const Matrix gram = as.transpose() * was;                        // S^T A W A S
    const Matrix t = gram_llt(gram, "step_sym").solve(was.transpose()); // so Theta = S t
    const Matrix u = x * as - s;                                     // (X A - I) S
    const Matrix mtheta = u * t;
    const Matrix c = as.transpose() * u; // S^T (A X A - A) S
    return x - mtheta - mtheta.transpose() + t.transpose() * (c * t);
}

Matrix step_sym_alt(const Matrix& x, const Matrix& a, const Matrix& s, const Matrix& w) {
    const Index n = x.rows();
    const Matrix as = a * s;
    const Matrix gram = s.transpose() * a * w * as; // S^T A W A S
    const Matrix lambda = gram_llt(gram, "step_sym_alt")
                              .solve(Matrix::Identity(gram.rows(), gram.cols()));
    const Matrix i_n = Matrix::Identity(n, n);
    // X+ = X - (X A - I) S L S^T A W + W A S L S^T (A X - I)(A S L S^T A W - I)
    return x - (x * a - i_n) * s * lambda * s.transpose() * a * w +
           w * a * s * lambda * s.transpose() * (a * x - i_n) *
               (a * s * lambda * s.transpose() * a * w - i_n);
}

std::string MethodSpec::label() const {
    switch (kind) {
        case VariantKind::generic_row: return "row";
        case VariantKind::generic_col: return "col";
        case VariantKind::generic_sym: return "sym";
        case VariantKind::named: return to_string(name);
    }
    return "?";
}

bool MethodSpec::symmetric_iterates() const {
    if (kind == VariantKind::generic_sym) return true;
    if (kind != VariantKind::named) return false;
    return name == UpdateName::psb || name == UpdateName::bfgs || name == UpdateName::dfp;
}

bool MethodSpec::tracks_inverse_iterate() const {
    return kind == VariantKind::named && named_update(name).tracks_inverse_iterate;
}

namespace {

/// p_i proportional to Tr(S_i^T M S_i), shared by the AIP/BFGS/DFP
/// probability shortcuts.
Vector trace_probabilities(const std::vector<Matrix>& members, const auto& apply) {
    Vector p(static_cast<Index>(members.size()));
    for (std::size_t i = 0; i < members.size(); ++i) {
        const Matrix& s = members[i];
        p[static_cast<Index>(i)] = (apply(s).cwiseProduct(s)).sum();
    }
    if (p.minCoeff() <= 0.0)
        throw ConfigError("trace probabilities: member with non-positive sketched trace");
    return p / p.sum();
}

} // namespace

Vector method_probabilities(const InverterConfig& config, const std::vector<Matrix>& members,
                            const Matrix* proxy) {
    const ProblemMatrix& a = config.a;
    const SketchRule& rule = config.rule;

    if (config.method.kind != VariantKind::named) {
        const SketchSide side = (config.method.kind == VariantKind::generic_col)
                                    ? SketchSide::col
                                    : SketchSide::row;
        return resolve_probabilities(rule, members, a, config.w, side, proxy);
    }

    if (rule.probabilities == ProbabilityRule::uniform ||
        rule.probabilities == ProbabilityRule::explicit_p)
        return resolve_probabilities(rule, members, a, WeightSpec::identity(), SketchSide::row,
                                     proxy);

    const WeightSpec identity = WeightSpec::identity();
    switch (config.method.name) {
        case UpdateName::kaczmarz:
            return resolve_probabilities(rule, members, a, identity, SketchSide::row, proxy);
        case UpdateName::bad_broyden:
        case UpdateName::psb:
            return resolve_probabilities(rule, members, a, identity, SketchSide::col, proxy);
        case UpdateName::column:
            // members are the V_i; convenient p_i ~ ||A^T V_i||_F^2
            if (rule.probabilities == ProbabilityRule::convenient)
                return convenient_probabilities(members, a, identity, SketchSide::row);
            throw ConfigError("column update supports uniform and convenient probabilities only");
        case UpdateName::aip:
        case UpdateName::bfgs:
            // implied W = A^{-1}: convenient p_i ~ Tr(S_i^T A S_i), no W^{1/2} needed
            if (rule.probabilities == ProbabilityRule::convenient)
                return trace_probabilities(members,
                                           [&](const Matrix& s) { return a.data() * s; });
            return resolve_probabilities(rule, members, a, WeightSpec::inverse_of_a(),
                                         SketchSide::row, proxy);
        case UpdateName::dfp: {
            // the DFP iterates target A; convenient p_i ~ Tr(S_i^T A^{-1} S_i)
            if (rule.probabilities != ProbabilityRule::convenient)
                throw ConfigError("dfp supports uniform and convenient probabilities only");
            a.validate_spd();
            Eigen::LLT<Matrix> llt(a.data());
            return trace_probabilities(members, [&](const Matrix& s) { return llt.solve(s); });
        }
        case UpdateName::good_broyden:
            throw ConfigError("good-broyden supports uniform probabilities only");
    }
    throw ConfigError("method_probabilities: unknown method");
}

namespace {

double step_flop_tally(const MethodSpec& method, bool identity_w, Index n, Index q) {
    switch (method.kind) {
        case VariantKind::generic_row:
        case VariantKind::generic_col:
            return identity_w ? flops::kaczmarz(n, q)
                              : (method.kind == VariantKind::generic_row
                                     ? flops::generic_row(n, q)
                                     : flops::generic_col(n, q));
        case VariantKind::generic_sym:
            return identity_w ? flops::psb(n, q) : flops::generic_sym(n, q);
        case VariantKind::named:
            switch (method.name) {
                case UpdateName::kaczmarz: return flops::kaczmarz(n, q);
                case UpdateName::bad_broyden: return flops::bad_broyden(n, q);
                case UpdateName::psb: return flops::psb(n, q);
                case UpdateName::good_broyden: return flops::good_broyden(n);
                case UpdateName::aip: return flops::aip(n, q);
                case UpdateName::dfp: return flops::dfp(n, q);
                case UpdateName::bfgs: return flops::bfgs(n, q);
                case UpdateName::column: return flops::column_update(n, q, false);
            }
            break;
    }
    throw ConfigError("step_flop_tally: unknown method");
}

void validate_config(const InverterConfig& config) {
    const Index n = config.a.n();
    config.rule.validate(n);
    if (config.rule.is_adaptive())
        throw ConfigError("run_inverter: adaptive sketch rules belong to the adarbfgs driver");
    if (config.tol < 0.0) throw ConfigError("run_inverter: tol must be >= 0");
    if (config.max_iters < 1) throw ConfigError("run_inverter: max_iters must be >= 1");
    if (config.max_redraws < 0) throw ConfigError("run_inverter: max_redraws must be >= 0");
    if (config.track.residual_every_k < 1)
        throw ConfigError("run_inverter: residual_every_k must be >= 1");

    if (config.method.kind == VariantKind::generic_sym && !config.a.is_symmetric())
        throw ConfigError("run_inverter: sym variant requires a symmetric matrix");
    if (config.method.kind == VariantKind::named) {
        validate_update(config.method.name, config.a);
        if (config.method.name == UpdateName::good_broyden &&
            config.rule.kind != SketchKind::coordinate)
            throw ConfigError("good-broyden requires coordinate sketches");
    }

    if (config.x0) {
        if (config.x0->rows() != n || config.x0->cols() != n)
            throw ConfigError("run_inverter: x0 dimension mismatch");
        if (config.method.symmetric_iterates() &&
            (*config.x0 - config.x0->transpose()).norm() >
                1e-10 * std::max(1.0, config.x0->norm()))
            throw ConfigError("run_inverter: this method requires a symmetric x0");
    }
}

} // namespace

RunResult run_inverter(const InverterConfig& config) {
    validate_config(config);
    const Index n = config.a.n();
    const Matrix& a = config.a.data();
    const MethodSpec& method = config.method;
    const bool named = method.kind == VariantKind::named;
    const bool tracks_inverse = method.tracks_inverse_iterate();
    const bool symmetric = method.symmetric_iterates();

    RunResult result;
    InverterState& state = result.state;
    state.x = config.x0.value_or(Matrix::Identity(n, n));
    if (tracks_inverse)
        state.x_inv = config.x0 ? lu_inverse(*config.x0) : Matrix::Identity(n, n);

    // Generic variants materialize W once per run; identity stays implicit
    // so the shared named-kernel path is used.
    std::optional<Matrix> w_mat;
    const bool identity_w = config.w.kind() == WeightKind::identity;
    if (!named && !identity_w) w_mat = config.w.resolve(config.a);
    const Matrix* w_ptr = w_mat ? &*w_mat : nullptr;

    const auto tracked = [&]() -> const Matrix& {
        return tracks_inverse ? *state.x_inv : state.x;
    };
    const auto residual = [&]() {
        return (Matrix::Identity(n, n) - a * tracked()).norm();
    };

    const double base = residual();
    const auto record = [&](double rel) {
        state.history.push_back({state.k, rel, state.flops.total(), state.seconds});
    };
    if (base == 0.0) { // x0 is already the inverse
        record(0.0);
        result.termination = Termination::tol_reached;
        return result;
    }
    record(1.0);

    // Data-dependent probabilities resolve once up front; the heuristic
    // rule re-resolves each iteration from the current iterate.
    const bool discrete = config.rule.is_discrete();
    const bool heuristic = config.rule.probabilities == ProbabilityRule::optimized_heuristic;
    std::vector<Matrix> members;
    Vector p;
    bool have_p = false;
    if (discrete) {
        members = discrete_members(config.rule, n);
        if (config.rule.probabilities == ProbabilityRule::convenient ||
            config.rule.probabilities == ProbabilityRule::optimized_exact) {
            p = method_probabilities(config, members);
            have_p = true;
        }
    } else if (heuristic) {
        throw ConfigError("run_inverter: heuristic probabilities need a discrete rule");
    }

    RngStream rng(config.seed);
    const std::string label = method.label();

    for (state.k = 1; state.k <= config.max_iters; ++state.k) {
        if (heuristic) {
            p = method_probabilities(config, members, &tracked());
            have_p = true;
        }

        Matrix next;
        Matrix next_inv;
        bool stepped = false;
        for (int failures = 0; !stepped; ++failures) {
            if (failures > config.max_redraws) {
                result.termination = Termination::error;
                result.message = "sketch rejection limit exceeded for " +
                                 config.rule.describe() + " at iteration " +
                                 std::to_string(state.k);
                return result;
            }
            const SketchSample sample =
                draw_sketch_n(config.rule, n, rng, nullptr, have_p ? &p : nullptr);
            const Matrix& s = sample.matrix;
            const auto start = std::chrono::steady_clock::now();
            try {
                if (!named) {
                    switch (method.kind) {
                        case VariantKind::generic_row: next = step_row(state.x, a, s, w_ptr); break;
                        case VariantKind::generic_col: next = step_col(state.x, a, s, w_ptr); break;
                        default: next = step_sym(state.x, a, s, w_ptr); break;
                    }
                } else {
                    switch (method.name) {
                        case UpdateName::kaczmarz: next = kaczmarz_step(state.x, a, s); break;
                        case UpdateName::bad_broyden: next = bad_broyden_step(state.x, a, s); break;
                        case UpdateName::psb: next = psb_step(state.x, a, s); break;
                        case UpdateName::good_broyden: {
                            const IteratePair pair =
                                good_broyden_step(state.x, *state.x_inv, a, *sample.outcome);
                            next = pair.primal;
                            next_inv = pair.inverse;
                            break;
                        }
                        case UpdateName::aip: next = aip_step(state.x, a, s); break;
                        case UpdateName::dfp: {
                            const IteratePair pair = dfp_step(state.x, *state.x_inv, a, s);
                            next = pair.primal;
                            next_inv = pair.inverse;
                            break;
                        }
                        case UpdateName::bfgs: next = bfgs_step(state.x, a, s); break;
                        case UpdateName::column:
                            next = column_update_step(state.x, a, s, false);
                            break;
                    }
                }
            } catch (const NumericalError&) {
                continue; // rank-deficient Gram or degenerate pivot: redraw
            }
            const auto stop = std::chrono::steady_clock::now();
            if (config.track.wall_time)
                state.seconds += std::chrono::duration<double>(stop - start).count();
            if (config.track.flops)
                state.flops.add(label, step_flop_tally(method, identity_w, n, s.cols()));
            stepped = true;
        }

        if (!next.allFinite() || (tracks_inverse && !next_inv.allFinite())) {
            result.termination = Termination::error;
            result.message = "diverged: non-finite entries at iteration " +
                             std::to_string(state.k);
            return result; // state.x keeps the last finite iterate
        }
        state.x = std::move(next);
        if (tracks_inverse) state.x_inv = std::move(next_inv);

        if (symmetric) {
            const double drift = (state.x - state.x.transpose()).norm();
            state.max_symmetry_drift = std::max(state.max_symmetry_drift, drift);
            state.x = 0.5 * (state.x + state.x.transpose()).eval();
            if (tracks_inverse)
                state.x_inv = 0.5 * (*state.x_inv + state.x_inv->transpose()).eval();
        }

        // Residual checks are O(n^3); the k=1 check makes one-step rules
        // (full sketches) terminate immediately.
        if (state.k == 1 || state.k == config.max_iters ||
            state.k % config.track.residual_every_k == 0) {
            const double rel = residual() / base;
            record(rel);
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
