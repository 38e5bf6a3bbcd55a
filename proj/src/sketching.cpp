#include "stochinv/sketching.hpp"

#include "stochinv/errors.hpp"
#include "stochinv/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace stochinv {

SketchRule SketchRule::coordinate(ProbabilityRule prob) {
    SketchRule r;
    r.kind = SketchKind::coordinate;
    r.q = 1;
    r.probabilities = prob;
    return r;
}

SketchRule SketchRule::coordinate_block(Index n, Index q, ProbabilityRule prob) {
    SketchRule r;
    r.kind = SketchKind::coordinate_block;
    r.q = q;
    r.blocks = contiguous_partition(n, q);
    r.probabilities = prob;
    return r;
}

SketchRule SketchRule::gaussian(Index q) {
    SketchRule r;
    r.kind = SketchKind::gaussian_dense;
    r.q = q;
    r.probabilities = ProbabilityRule::none;
    return r;
}

SketchRule SketchRule::fixed(std::vector<Matrix> family, ProbabilityRule prob) {
    SketchRule r;
    r.kind = SketchKind::fixed_family;
    r.family = std::move(family);
    r.q = r.family.empty() ? 0 : r.family.front().cols();
    r.probabilities = prob;
    return r;
}

SketchRule SketchRule::adaptive_cols(Index n, Index q) {
    SketchRule r;
    r.kind = SketchKind::adaptive_factor_cols;
    r.q = q;
    r.blocks = contiguous_partition(n, q);
    r.probabilities = ProbabilityRule::uniform;
    return r;
}

SketchRule SketchRule::adaptive_gauss(Index q) {
    SketchRule r;
    r.kind = SketchKind::adaptive_factor_gauss;
    r.q = q;
    r.probabilities = ProbabilityRule::none;
    return r;
}

std::string SketchRule::describe() const {
    std::ostringstream os;
    switch (kind) {
        case SketchKind::coordinate: os << "coordinate"; break;
        case SketchKind::coordinate_block: os << "coordinate-block"; break;
        case SketchKind::gaussian_dense: os << "gaussian"; break;
        case SketchKind::fixed_family: os << "fixed-family"; break;
        case SketchKind::adaptive_factor_cols: os << "adaptive-factor-cols"; break;
        case SketchKind::adaptive_factor_gauss: os << "adaptive-factor-gauss"; break;
    }
    os << "(q=" << q << ")";
    return os.str();
}

void SketchRule::validate(Index n) const {
    if (q < 1 || q > n) throw ConfigError("SketchRule: q must satisfy 1 <= q <= n");
    const bool gaussian_kind =
        kind == SketchKind::gaussian_dense || kind == SketchKind::adaptive_factor_gauss;
    if (gaussian_kind && probabilities != ProbabilityRule::none)
        throw ConfigError("SketchRule: probability rules do not apply to gaussian sketches");
    if (!gaussian_kind && probabilities == ProbabilityRule::none)
        throw ConfigError("SketchRule: discrete rules need a probability setting");
    if (kind == SketchKind::coordinate_block || kind == SketchKind::adaptive_factor_cols) {
        std::set<Index> seen;
        for (const auto& block : blocks) {
            if (block.empty()) throw ConfigError("SketchRule: empty partition block");
            for (Index i : block) {
                if (i < 0 || i >= n) throw ConfigError("SketchRule: partition index out of range");
                if (!seen.insert(i).second)
                    throw ConfigError("SketchRule: partition blocks overlap");
            }
        }
        if (static_cast<Index>(seen.size()) != n)
            throw ConfigError("SketchRule: partition does not cover {1..n}");
    }
    if (probabilities == ProbabilityRule::explicit_p) {
        if (explicit_p.size() == 0) throw ConfigError("SketchRule: explicit probabilities missing");
        if (std::abs(explicit_p.sum() - 1.0) > 1e-12 || explicit_p.minCoeff() <= 0.0)
            throw ConfigError("SketchRule: explicit probabilities must be positive and sum to 1");
    }
}

std::vector<std::vector<Index>> contiguous_partition(Index n, Index q) {
    if (q < 1 || q > n) throw ConfigError("contiguous_partition: need 1 <= q <= n");
    std::vector<std::vector<Index>> blocks;
    for (Index start = 0; start < n; start += q) {
        std::vector<Index> block;
        for (Index i = start; i < std::min(start + q, n); ++i) block.push_back(i);
        blocks.push_back(std::move(block));
    }
    return blocks;
}

Matrix DiscreteSampling::stacked() const {
    const Index n = members.empty() ? 0 : members.front().rows();
    Matrix s(n, total_width());
    Index col = 0;
    for (const auto& m : members) {
        s.middleCols(col, m.cols()) = m;
        col += m.cols();
    }
    return s;
}

Index DiscreteSampling::total_width() const {
    Index w = 0;
    for (const auto& m : members) w += m.cols();
    return w;
}

double DiscreteSampling::expected_width() const {
    double w = 0.0;
    for (std::size_t i = 0; i < members.size(); ++i)
        w += probabilities[static_cast<Index>(i)] * static_cast<double>(members[i].cols());
    return w;
}

bool DiscreteSampling::is_complete(double tol) const {
    const Matrix s = stacked();
    const Matrix gram = s * s.transpose();
    const EigenDecomposition dec = jacobi_eigendecomposition(gram);
    const double lam_max = dec.values.cwiseAbs().maxCoeff();
    return dec.values.minCoeff() > tol * lam_max;
}

void DiscreteSampling::validate() const {
    if (members.empty()) throw ConfigError("DiscreteSampling: empty family");
    if (probabilities.size() != static_cast<Index>(members.size()))
        throw ConfigError("DiscreteSampling: probability count mismatch");
    if (std::abs(probabilities.sum() - 1.0) > 1e-12 || probabilities.minCoeff() <= 0.0)
        throw ConfigError("DiscreteSampling: probabilities must be positive and sum to 1");
    for (const auto& m : members) {
        if (sym_pinv(m.transpose() * m).dropped != 0)
            throw ConfigError("DiscreteSampling: member without full column rank");
    }
    if (!is_complete())
        throw ConfigError(
            "DiscreteSampling: stacked family lacks full row rank (sampling not complete)");
}

std::vector<Matrix> discrete_members(const SketchRule& rule, Index n) {
    std::vector<Matrix> members;
    switch (rule.kind) {
        case SketchKind::coordinate:
            for (Index i = 0; i < n; ++i) {
                Matrix e = Matrix::Zero(n, 1);
                e(i, 0) = 1.0;
                members.push_back(std::move(e));
            }
            break;
        case SketchKind::coordinate_block:
            for (const auto& block : rule.blocks) {
                Matrix s = Matrix::Zero(n, static_cast<Index>(block.size()));
                for (std::size_t j = 0; j < block.size(); ++j)
                    s(block[j], static_cast<Index>(j)) = 1.0;
                members.push_back(std::move(s));
            }
            break;
        case SketchKind::fixed_family:
            members = rule.family;
            break;
        default:
            throw ConfigError("discrete_members: rule is not a discrete family");
    }
    return members;
}

Vector convenient_probabilities(const std::vector<Matrix>& family, const ProblemMatrix& a,
                                const WeightSpec& w, SketchSide side) {
    if (family.empty()) throw ConfigError("convenient_probabilities: empty family");
    const Matrix w_sqrt = w.resolve_sqrt(a);
    const Matrix base = (side == SketchSide::row) ? Matrix(w_sqrt * a.data().transpose())
                                                  : Matrix(w_sqrt * a.data());
    Vector p(static_cast<Index>(family.size()));
    for (std::size_t i = 0; i < family.size(); ++i)
        p[static_cast<Index>(i)] = (base * family[i]).squaredNorm();
    const double total = p.sum();
    if (p.minCoeff() <= 0.0)
        throw ConfigError("convenient_probabilities: family member with zero sketched norm");
    return p / total;
}

OptimizedProbabilities optimized_probabilities(const std::vector<Matrix>& family,
                                               const ProblemMatrix& a, const WeightSpec& w,
                                               InverseSource source, const Matrix* proxy) {
    if (family.empty()) throw ConfigError("optimized_probabilities: empty family");
    const Index n = a.n();
    Index width = 0;
    for (const auto& m : family) width += m.cols();
    if (width != n)
        throw ConfigError("optimized probabilities require square complete sampling");

    Matrix stacked(n, n);
    Index col = 0;
    for (const auto& m : family) {
        stacked.middleCols(col, m.cols()) = m;
        col += m.cols();
    }
    Eigen::FullPivLU<Matrix> lu(stacked);
    if (!lu.isInvertible())
        throw ConfigError("optimized probabilities require square complete sampling");
    const Matrix stacked_inv_t = lu.inverse().transpose();

    Matrix inverse_estimate;
    if (source == InverseSource::exact) {
        inverse_estimate = lu_inverse(a.data());
    } else {
        if (proxy == nullptr)
            throw ConfigError("optimized_probabilities: proxy source needs an iterate");
        inverse_estimate = *proxy;
    }

    const Matrix w_sqrt = w.resolve_sqrt(a);
    const Matrix w_inv_sqrt = w.resolve_inv_sqrt(a);
    const Matrix left = w_sqrt * inverse_estimate;
    const Matrix right = a.data() * w_inv_sqrt;

    Vector norms(static_cast<Index>(family.size()));
    col = 0;
    for (std::size_t i = 0; i < family.size(); ++i) {
        const Index qi = family[i].cols();
        const Matrix sbar = stacked_inv_t.middleCols(col, qi);
        norms[static_cast<Index>(i)] = (left * sbar * family[i].transpose() * right).norm();
        col += qi;
    }
    if (norms.minCoeff() <= 0.0)
        throw ConfigError("optimized_probabilities: family member with zero norm term");

    OptimizedProbabilities out;
    const double total = norms.sum();
    out.p = norms / total;
    // at the optimum, sum_i norms_i^2 / p_i = (sum_i norms_i)^2
    out.gamma = 1.0 - 1.0 / (total * total);
    return out;
}

Vector resolve_probabilities(const SketchRule& rule, const std::vector<Matrix>& members,
                             const ProblemMatrix& a, const WeightSpec& w, SketchSide side,
                             const Matrix* proxy) {
    const Index r = static_cast<Index>(members.size());
    switch (rule.probabilities) {
        case ProbabilityRule::uniform:
            return Vector::Constant(r, 1.0 / static_cast<double>(r));
        case ProbabilityRule::explicit_p:
            if (rule.explicit_p.size() != r)
                throw ConfigError("resolve_probabilities: explicit p size mismatch");
            return rule.explicit_p;
        case ProbabilityRule::convenient:
            return convenient_probabilities(members, a, w, side);
        case ProbabilityRule::optimized_exact:
            return optimized_probabilities(members, a, w, InverseSource::exact).p;
        case ProbabilityRule::optimized_heuristic:
            return optimized_probabilities(members, a, w, InverseSource::proxy, proxy).p;
        case ProbabilityRule::none:
            throw ConfigError("resolve_probabilities: rule has no discrete probabilities");
    }
    throw ConfigError("resolve_probabilities: unknown probability rule");
}

SketchSample draw_sketch_n(const SketchRule& rule, Index n, RngStream& rng, const Matrix* factor,
                           const Vector* resolved_p) {
    SketchSample sample;
    const bool adaptive = rule.is_adaptive();
    if (adaptive && factor == nullptr)
        throw ConfigError("draw_sketch: adaptive rule requires the current factor L_k");
    if (!adaptive && factor != nullptr)
        throw ConfigError("draw_sketch: non-adaptive rule forbids a factor context");

    switch (rule.kind) {
        case SketchKind::coordinate:
        case SketchKind::coordinate_block:
        case SketchKind::fixed_family: {
            const std::vector<Matrix> members = discrete_members(rule, n);
            Vector p;
            if (resolved_p != nullptr) {
                p = *resolved_p;
            } else if (rule.probabilities == ProbabilityRule::explicit_p) {
                p = rule.explicit_p;
            } else if (rule.probabilities == ProbabilityRule::uniform) {
                p = Vector::Constant(static_cast<Index>(members.size()),
                                     1.0 / static_cast<double>(members.size()));
            } else {
                throw ConfigError("draw_sketch: data-dependent probabilities must be resolved "
                                  "before drawing");
            }
            if (p.size() != static_cast<Index>(members.size()))
                throw ConfigError("draw_sketch: probability vector size mismatch");
            const Index i = rng.categorical(p);
            sample.matrix = members[static_cast<std::size_t>(i)];
            sample.outcome = i;
            break;
        }
        case SketchKind::gaussian_dense:
            sample.matrix = rng.gaussian_matrix(n, rule.q);
            break;
        case SketchKind::adaptive_factor_cols: {
            Vector p;
            if (resolved_p != nullptr) {
                p = *resolved_p;
            } else {
                p = Vector::Constant(static_cast<Index>(rule.blocks.size()),
                                     1.0 / static_cast<double>(rule.blocks.size()));
            }
            const Index i = rng.categorical(p);
            const auto& block = rule.blocks[static_cast<std::size_t>(i)];
            Matrix s(n, static_cast<Index>(block.size()));
            for (std::size_t j = 0; j < block.size(); ++j)
                s.col(static_cast<Index>(j)) = factor->col(block[j]);
            sample.matrix = std::move(s);
            sample.outcome = i;
            break;
        }
        case SketchKind::adaptive_factor_gauss:
            sample.matrix = (*factor) * rng.gaussian_matrix(n, rule.q);
            break;
    }
    return sample;
}

SketchSample draw_sketch(const SketchRule& rule, RngStream& rng, const Matrix* factor,
                         const std::function<bool(const Matrix&)>& accept, int max_redraws) {
    Index n;
    if (factor != nullptr) {
        n = factor->rows();
    } else if (rule.kind == SketchKind::coordinate || rule.kind == SketchKind::coordinate_block) {
        if (rule.kind == SketchKind::coordinate) {
            n = rule.explicit_p.size();
            if (n == 0)
                throw ConfigError("draw_sketch: coordinate rule needs explicit probabilities or "
                                  "blocks to fix the dimension");
        } else {
            n = 0;
            for (const auto& b : rule.blocks) n += static_cast<Index>(b.size());
        }
    } else if (rule.kind == SketchKind::fixed_family) {
        if (rule.family.empty()) throw ConfigError("draw_sketch: empty fixed family");
        n = rule.family.front().rows();
    } else {
        throw ConfigError("draw_sketch: cannot infer dimension for this rule; "
                          "use draw_sketch_n");
    }

    for (int attempt = 0; attempt <= max_redraws; ++attempt) {
        SketchSample sample = draw_sketch_n(rule, n, rng, factor, nullptr);
        if (!accept || accept(sample.matrix)) return sample;
    }
    throw NumericalError("draw_sketch: rejection limit exceeded for rule " + rule.describe());
}

Matrix sketch_outcome(const SketchRule& rule, Index n, Index outcome, const Matrix* factor) {
    switch (rule.kind) {
        case SketchKind::coordinate:
        case SketchKind::coordinate_block:
        case SketchKind::fixed_family: {
            const std::vector<Matrix> members = discrete_members(rule, n);
            if (outcome < 0 || outcome >= static_cast<Index>(members.size()))
                throw ConfigError("sketch_outcome: outcome index out of range");
            return members[static_cast<std::size_t>(outcome)];
        }
        case SketchKind::adaptive_factor_cols: {
            if (factor == nullptr)
                throw ConfigError("sketch_outcome: adaptive rule requires the factor L_k");
            if (outcome < 0 || outcome >= static_cast<Index>(rule.blocks.size()))
                throw ConfigError("sketch_outcome: outcome index out of range");
            const auto& block = rule.blocks[static_cast<std::size_t>(outcome)];
            Matrix s(n, static_cast<Index>(block.size()));
            for (std::size_t j = 0; j < block.size(); ++j)
                s.col(static_cast<Index>(j)) = factor->col(block[j]);
            return s;
        }
        default:
            throw ConfigError("sketch_outcome: rule has no discrete outcomes");
    }
}

} // namespace stochinv
