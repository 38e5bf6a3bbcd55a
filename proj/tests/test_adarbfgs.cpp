#include "stochinv/adarbfgs.hpp"
#include "stochinv/errors.hpp"
#include "stochinv/linalg.hpp"
#include "stochinv/qn_updates.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <cmath>

using namespace stochinv;
using testutil::random_spd;

TEST_CASE("scalar factored update fixture") {
    Matrix a(1, 1), l(1, 1), stilde(1, 1);
    a << 4.0;
    l << 1.0;
    stilde << 1.0;
    const Matrix next = adarbfgs_update_factor(l, a, stilde);
    CHECK(next(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK((next * next.transpose())(0, 0) == doctest::Approx(0.25).epsilon(1e-12)); // = A^{-1}
}

TEST_CASE("factored update equals the BFGS step on the reconstructed iterate") {
    RngStream rng(73);
    const Matrix a = random_spd(6, rng);
    Matrix l = Matrix::Identity(6, 6) + 0.1 * rng.gaussian_matrix(6, 6);
    const Matrix x = l * l.transpose();

    const Matrix stilde = rng.gaussian_matrix(6, 2);
    const Matrix next_l = adarbfgs_update_factor(l, a, stilde);
    const Matrix direct = bfgs_step(x, a, Matrix(l * stilde)); // same S = L Stilde
    CHECK((next_l * next_l.transpose() - direct).norm() <= 1e-8 * std::max(1.0, direct.norm()));
}

TEST_CASE("adaptive block probabilities match the direct traces") {
    RngStream rng(79);
    const Matrix a = random_spd(6, rng);
    const Matrix l = Matrix::Identity(6, 6) + 0.2 * rng.gaussian_matrix(6, 6);
    const auto blocks = contiguous_partition(6, 2);

    const Vector p = adaptive_block_probabilities(l, a, blocks);
    const Matrix x = l * l.transpose();
    const double total = (a * x).trace();
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        double tr = 0.0;
        for (Index j : blocks[i]) tr += l.col(j).dot(a * l.col(j));
        CHECK(p[static_cast<Index>(i)] == doctest::Approx(tr / total).epsilon(1e-10));
    }
    CHECK(std::abs(p.sum() - 1.0) <= 1e-12);
}

TEST_CASE("one-step rate bound fixtures") {
    Matrix a(2, 2);
    a << 2, 1, 1, 2;
    CHECK(one_step_rate_bound(Matrix::Identity(2, 2), a) == doctest::Approx(0.75).epsilon(1e-10));

    // at X = A^{-1} the bound collapses to 1 - 1/n
    const Matrix a_inv = lu_inverse(a);
    CHECK(one_step_rate_bound(a_inv, a) == doctest::Approx(0.5).epsilon(1e-10));

    RngStream rng(83);
    for (Index n : {3, 5, 8}) {
        const Matrix m = random_spd(n, rng);
        CHECK(one_step_rate_bound(lu_inverse(m), m) ==
              doctest::Approx(1.0 - 1.0 / static_cast<double>(n)).epsilon(1e-8));
    }

    CHECK_THROWS_AS((void)one_step_rate_bound(-Matrix::Identity(2, 2), a), NumericalError);
}

TEST_CASE("degenerate sketches trigger the resample contract") {
    Matrix a(2, 2);
    a << 2, 1, 1, 2;
    const Matrix l = Matrix::Identity(2, 2);
    CHECK_THROWS_AS((void)adarbfgs_update_factor(l, a, Matrix(Matrix::Zero(2, 1))),
                    NumericalError);

    // step-level driver redraws and eventually succeeds with gaussians
    FactoredState fs;
    fs.l = l;
    RngStream rng(87);
    const FactoredState next =
        adarbfgs_step(fs, ProblemMatrix(a, Symmetry::spd), SketchRule::adaptive_gauss(1), rng);
    CHECK(next.k == 1);
    CHECK(next.l.allFinite());

    CHECK_THROWS_AS((void)adarbfgs_step(fs, ProblemMatrix(a, Symmetry::spd),
                                        SketchRule::coordinate(), rng),
                    ConfigError);
}

TEST_CASE("adarbfgs runs converge and keep the iterate positive definite") {
    RngStream rng(89);
    const Matrix a = random_spd(10, rng);

    for (const SketchRule& rule :
         {SketchRule::adaptive_cols(10, 2), SketchRule::adaptive_gauss(2)}) {
        AdaConfig config{ProblemMatrix(a, Symmetry::spd)};
        config.rule = rule;
        config.tol = 1e-6;
        config.max_iters = 4000;
        config.seed = 5;
        config.track.residual_every_k = 20;
        const RunResult result = run_adarbfgs(config);
        CHECK(result.termination == Termination::tol_reached);
        CHECK((a * result.state.x - Matrix::Identity(10, 10)).norm() <= 1e-5 * a.norm() * 10);
        CHECK(jacobi_eigendecomposition(result.state.x).values[0] > 0.0);
        CHECK(result.state.history.front().residual == 1.0);
    }
}

TEST_CASE("adarbfgs config validation") {
    Matrix a(2, 2);
    a << 2, 1, 1, 2;
    AdaConfig config{ProblemMatrix(a, Symmetry::spd)};
    config.rule = SketchRule::coordinate();
    CHECK_THROWS_AS((void)run_adarbfgs(config), ConfigError);

    config.rule = SketchRule::adaptive_gauss(1);
    config.tol = -1.0;
    CHECK_THROWS_AS((void)run_adarbfgs(config), ConfigError);

    config.tol = 1e-2;
    config.l0 = Matrix::Identity(3, 3);
    CHECK_THROWS_AS((void)run_adarbfgs(config), ConfigError);

    const ProblemMatrix gen(Matrix(Matrix::Ones(2, 2)), Symmetry::general);
    AdaConfig bad{gen};
    bad.rule = SketchRule::adaptive_gauss(1);
    CHECK_THROWS(run_adarbfgs(bad));
}
