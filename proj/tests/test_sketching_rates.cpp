#include "stochinv/errors.hpp"
#include "stochinv/linalg.hpp"
#include "stochinv/rates.hpp"
#include "stochinv/sketching.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <cmath>

using namespace stochinv;
using testutil::random_general;
using testutil::random_spd;

namespace {

ProblemMatrix fixture_2x2() {
    Matrix a(2, 2);
    a << 2, 1, 1, 2;
    return ProblemMatrix(a, Symmetry::spd);
}

DiscreteSampling coordinate_sampling(const ProblemMatrix& a, ProbabilityRule prob) {
    const SketchRule rule = SketchRule::coordinate(prob);
    DiscreteSampling sampling;
    sampling.members = discrete_members(rule, a.n());
    sampling.probabilities =
        resolve_probabilities(rule, sampling.members, a, WeightSpec::identity(), SketchSide::row);
    return sampling;
}

} // namespace

TEST_CASE("contiguous partition and discrete members") {
    const auto blocks = contiguous_partition(7, 3);
    REQUIRE(blocks.size() == 3);
    CHECK(blocks[0] == std::vector<Index>{0, 1, 2});
    CHECK(blocks[2] == std::vector<Index>{6});

    const auto members = discrete_members(SketchRule::coordinate(), 3);
    REQUIRE(members.size() == 3);
    CHECK(members[2](2, 0) == 1.0);
    CHECK(members[2].col(0).sum() == 1.0);

    CHECK_THROWS_AS((void)contiguous_partition(3, 5), ConfigError);
}

TEST_CASE("sketch rule validation") {
    SketchRule rule = SketchRule::coordinate_block(4, 2);
    CHECK_NOTHROW(rule.validate(4));

    rule.blocks[1] = {1, 3}; // overlaps block 0's index 1
    CHECK_THROWS_AS(rule.validate(4), ConfigError);

    SketchRule gauss = SketchRule::gaussian(2);
    CHECK_NOTHROW(gauss.validate(4));
    gauss.probabilities = ProbabilityRule::convenient;
    CHECK_THROWS_AS(gauss.validate(4), ConfigError);
}

TEST_CASE("convenient probabilities fixtures") {
    const ProblemMatrix a = fixture_2x2();
    const auto members = discrete_members(SketchRule::coordinate(), 2);
    const Vector p = convenient_probabilities(members, a, WeightSpec::identity(), SketchSide::row);
    CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-12));

    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 1.0;
    d(1, 1) = 3.0;
    const ProblemMatrix diag(d, Symmetry::spd);
    const Vector pd =
        convenient_probabilities(members, diag, WeightSpec::identity(), SketchSide::row);
    CHECK(pd[0] == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(pd[1] == doctest::Approx(0.9).epsilon(1e-12));
}

TEST_CASE("optimized probabilities fixtures") {
    const ProblemMatrix a = fixture_2x2();
    const auto members = discrete_members(SketchRule::coordinate(), 2);
    const OptimizedProbabilities opt =
        optimized_probabilities(members, a, WeightSpec::identity(), InverseSource::exact);
    CHECK(opt.p[0] == doctest::Approx(0.5).epsilon(1e-12));

    // proxy equal to the true inverse reproduces the exact mode
    const Matrix a_inv = lu_inverse(a.data());
    const OptimizedProbabilities proxied = optimized_probabilities(
        members, a, WeightSpec::identity(), InverseSource::proxy, &a_inv);
    CHECK((proxied.p - opt.p).norm() <= 1e-12);

    // non-square stacked family is rejected
    const std::vector<Matrix> partial{members[0]};
    CHECK_THROWS_AS(
        (void)optimized_probabilities(partial, a, WeightSpec::identity(), InverseSource::exact),
        ConfigError);
}

TEST_CASE("projector Z fixtures") {
    const ProblemMatrix a = fixture_2x2();
    Matrix e1 = Matrix::Zero(2, 1);
    e1(0, 0) = 1.0;
    const Matrix z = projector_z(a, WeightSpec::identity(), e1, SketchSide::row);
    Matrix expected(2, 2);
    expected << 4, 2, 2, 1;
    CHECK((z - expected / 5.0).norm() <= 1e-12);
    CHECK(z.trace() == doctest::Approx(1.0).epsilon(1e-12)); // projector rank q
}

TEST_CASE("rate fixture on [[2,1],[1,2]]") {
    const ProblemMatrix a = fixture_2x2();
    const DiscreteSampling sampling = coordinate_sampling(a, ProbabilityRule::convenient);

    Matrix expected(2, 2);
    expected << 0.5, 0.4, 0.4, 0.5;
    const Matrix ez = expected_z_discrete(a, WeightSpec::identity(), sampling, SketchSide::row);
    CHECK((ez - expected).norm() <= 1e-12);

    const RateReport report = rho(a, WeightSpec::identity(), sampling, SketchSide::row);
    CHECK(report.rho == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(report.lower_bound == doctest::Approx(0.5).epsilon(1e-12));

    // kappa path of the same rate: rho = 1 - 1/kappa^2
    const double kappa = kappa_2f(a.data());
    CHECK(kappa * kappa == doctest::Approx(10.0).epsilon(1e-10));
    CHECK(1.0 - 1.0 / (kappa * kappa) == doctest::Approx(report.rho).epsilon(1e-10));
}

TEST_CASE("expected Z equals brute-force outcome enumeration") {
    RngStream rng(21);
    const ProblemMatrix a(random_general(4, rng), Symmetry::general);
    const SketchRule rule = SketchRule::coordinate_block(4, 2);
    DiscreteSampling sampling;
    sampling.members = discrete_members(rule, 4);
    Vector p(2);
    p << 0.3, 0.7;
    sampling.probabilities = p;

    Matrix brute = Matrix::Zero(4, 4);
    const WeightSpec w = WeightSpec::gram_inverse_right();
    for (std::size_t i = 0; i < sampling.members.size(); ++i)
        brute += p[static_cast<Index>(i)] *
                 projector_z(a, w, sampling.members[i], SketchSide::row);
    const Matrix ez = expected_z_discrete(a, w, sampling, SketchSide::row);
    CHECK((ez - brute).norm() <= 1e-10 * std::max(1.0, brute.norm()));
}

TEST_CASE("identity fixtures: rho, gamma, one-step sampling") {
    const ProblemMatrix eye(Matrix::Identity(4, 4), Symmetry::spd);
    const DiscreteSampling sampling = coordinate_sampling(eye, ProbabilityRule::uniform);
    const RateReport report = rho(eye, WeightSpec::identity(), sampling, SketchSide::row);
    CHECK(report.rho == doctest::Approx(0.75).epsilon(1e-12)); // 1 - 1/n

    const double gamma = gamma_upper_bound(eye, WeightSpec::identity(), sampling,
                                           sampling.probabilities, SketchSide::row);
    CHECK(gamma == doctest::Approx(1.0 - 1.0 / 16.0).epsilon(1e-10)); // 1 - 1/n^2
    CHECK(gamma >= report.rho - 1e-10);

    // single full-sketch outcome: one-step convergence, rho = 0
    DiscreteSampling full;
    full.members = {Matrix::Identity(4, 4)};
    full.probabilities = Vector::Ones(1);
    CHECK(rho(eye, WeightSpec::identity(), full, SketchSide::row).rho ==
          doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("gamma bound dominates rho on the running example") {
    const ProblemMatrix a = fixture_2x2();
    const DiscreteSampling sampling = coordinate_sampling(a, ProbabilityRule::convenient);
    const RateReport report = rho(a, WeightSpec::identity(), sampling, SketchSide::row);
    const double gamma = gamma_upper_bound(a, WeightSpec::identity(), sampling,
                                           sampling.probabilities, SketchSide::row);
    CHECK(gamma >= report.rho - 1e-10);

    // the optimized p minimizes gamma over the simplex
    const auto members = discrete_members(SketchRule::coordinate(), 2);
    const OptimizedProbabilities opt =
        optimized_probabilities(members, a, WeightSpec::identity(), InverseSource::exact);
    const double gamma_opt =
        gamma_upper_bound(a, WeightSpec::identity(), sampling, opt.p, SketchSide::row);
    CHECK(gamma_opt <= gamma + 1e-12);
    CHECK(opt.gamma == doctest::Approx(gamma_opt).epsilon(1e-8));
}

TEST_CASE("fracsum optimizer matches the grid-search oracle") {
    Vector a(2);
    a << 1.0, 4.0;
    const FracsumResult res = fracsum_optimal_p(a);
    CHECK(res.p[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(res.p[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(res.value == doctest::Approx(9.0).epsilon(1e-12));

    double best = std::numeric_limits<double>::infinity();
    for (double p = 1e-4; p < 1.0; p += 1e-4)
        best = std::min(best, 1.0 / p + 4.0 / (1.0 - p));
    CHECK(std::abs(best - 9.0) <= 1e-6);

    Vector ones(2);
    ones << 1.0, 1.0;
    CHECK(fracsum_optimal_p(ones).value == doctest::Approx(4.0));
    Vector single(1);
    single << 9.0;
    CHECK(fracsum_optimal_p(single).value == doctest::Approx(9.0));
    CHECK(fracsum_optimal_p(single).p[0] == doctest::Approx(1.0));

    Vector bad(2);
    bad << 1.0, 0.0;
    CHECK_THROWS_AS((void)fracsum_optimal_p(bad), ConfigError);
}

TEST_CASE("iteration complexity formulas") {
    CHECK(iteration_complexity(1e-2, 0.9) == 47); // ceil(log(100)/0.1)
    CHECK(iteration_complexity_halved(1e-2, 0.9) == 24);
    CHECK_THROWS_AS((void)iteration_complexity(1e-2, 1.0), ConfigError);
    CHECK_THROWS_AS((void)iteration_complexity(2.0, 0.5), ConfigError);
}

TEST_CASE("kappa_2f fixtures") {
    CHECK(kappa_2f(Matrix::Identity(2, 2)) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 1.0;
    d(1, 1) = 3.0;
    CHECK(kappa_2f(d) == doctest::Approx(std::sqrt(10.0)).epsilon(1e-10));
    CHECK_THROWS_AS((void)kappa_2f(Matrix::Ones(2, 2)), NumericalError);
}

TEST_CASE("categorical sampling matches probabilities (multinomial bound)") {
    Vector p(3);
    p << 0.2, 0.3, 0.5;
    RngStream rng(123);
    const int draws = 100000;
    Vector counts = Vector::Zero(3);
    for (int i = 0; i < draws; ++i) counts[rng.categorical(p)] += 1.0;
    for (Index i = 0; i < 3; ++i) {
        const double freq = counts[i] / draws;
        const double sigma = std::sqrt(p[i] * (1.0 - p[i]) / draws);
        CHECK(std::abs(freq - p[i]) <= 4.0 * sigma);
    }
}

TEST_CASE("draw_sketch determinism and rejection") {
    const SketchRule rule = SketchRule::coordinate_block(6, 2);
    RngStream r1(42), r2(42);
    const SketchSample s1 = draw_sketch_n(rule, 6, r1);
    const SketchSample s2 = draw_sketch_n(rule, 6, r2);
    CHECK(*s1.outcome == *s2.outcome);
    CHECK((s1.matrix - s2.matrix).norm() == 0.0);

    RngStream r3(7);
    CHECK_THROWS_AS(
        (void)draw_sketch(rule, r3, nullptr, [](const Matrix&) { return false; }, 5),
        NumericalError);

    // rejection that accepts everything leaves outcome frequencies alone
    RngStream r4(9);
    const SketchSample s4 = draw_sketch(rule, r4, nullptr, [](const Matrix&) { return true; });
    CHECK(s4.outcome.has_value());
}

TEST_CASE("sketch_outcome fixtures") {
    const Matrix e2 = sketch_outcome(SketchRule::coordinate(), 3, 2);
    CHECK(e2(2, 0) == 1.0);

    SketchRule ada = SketchRule::adaptive_cols(2, 1);
    const Matrix l = 2.0 * Matrix::Identity(2, 2);
    const Matrix s = sketch_outcome(ada, 2, 0, &l);
    CHECK(s(0, 0) == 2.0);
    CHECK(s(1, 0) == 0.0);
}

TEST_CASE("complete sampling invariants") {
    const ProblemMatrix a = fixture_2x2();
    DiscreteSampling sampling = coordinate_sampling(a, ProbabilityRule::uniform);
    CHECK(sampling.is_complete());
    CHECK_NOTHROW(sampling.validate());
    CHECK(sampling.expected_width() == doctest::Approx(1.0));
    CHECK(sampling.stacked().isIdentity(1e-14));

    sampling.members.pop_back(); // loses row coverage
    sampling.probabilities = Vector::Ones(1);
    CHECK_THROWS_AS(sampling.validate(), ConfigError);
}

TEST_CASE("probability vectors live on the simplex") {
    RngStream rng(31);
    const ProblemMatrix a(random_spd(5, rng), Symmetry::spd);
    const auto members = discrete_members(SketchRule::coordinate(), 5);
    for (const WeightSpec& w :
         {WeightSpec::identity(), WeightSpec::inverse_of_a(), WeightSpec::a_squared()}) {
        const Vector p = convenient_probabilities(members, a, w, SketchSide::row);
        CHECK(std::abs(p.sum() - 1.0) <= 1e-12);
        CHECK(p.minCoeff() > 0.0);
    }
    const Vector po =
        optimized_probabilities(members, a, WeightSpec::identity(), InverseSource::exact).p;
    CHECK(std::abs(po.sum() - 1.0) <= 1e-12);
}
