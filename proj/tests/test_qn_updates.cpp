#include "stochinv/errors.hpp"
#include "stochinv/linalg.hpp"
#include "stochinv/qn_updates.hpp"
#include "stochinv/simi.hpp"

#include "helpers.hpp"

#include <doctest.h>

using namespace stochinv;
using testutil::random_general;
using testutil::random_spd;

namespace {

Matrix fixture_a() {
    Matrix a(2, 2);
    a << 2, 1, 1, 2;
    return a;
}

Matrix coordinate_sketch(Index n, std::initializer_list<Index> idx) {
    Matrix s = Matrix::Zero(n, static_cast<Index>(idx.size()));
    Index j = 0;
    for (Index i : idx) s(i, j++) = 1.0;
    return s;
}

} // namespace

TEST_CASE("named update table metadata") {
    const NamedUpdate& kz = named_update(UpdateName::kaczmarz);
    CHECK(kz.implied_w == WeightKind::identity);
    CHECK(kz.implied_equation == InverseEquation::ax_eq_i);
    CHECK_FALSE(kz.tracks_inverse_iterate);

    const NamedUpdate& bb = named_update(UpdateName::bad_broyden);
    CHECK(bb.implied_equation == InverseEquation::xa_eq_i);

    const NamedUpdate& psb = named_update(UpdateName::psb);
    CHECK(psb.requires_symmetry == Symmetry::symmetric);

    const NamedUpdate& gb = named_update(UpdateName::good_broyden);
    CHECK(gb.implied_equation == InverseEquation::x_ainv_eq_i);
    CHECK(gb.tracks_inverse_iterate);

    const NamedUpdate& aip = named_update(UpdateName::aip);
    CHECK(aip.implied_w == WeightKind::inverse_of_a);
    CHECK(aip.requires_symmetry == Symmetry::spd);

    const NamedUpdate& dfp = named_update(UpdateName::dfp);
    CHECK(dfp.implied_w == WeightKind::matrix_a);
    CHECK(dfp.tracks_inverse_iterate);

    const NamedUpdate& bfgs = named_update(UpdateName::bfgs);
    CHECK(bfgs.implied_w == WeightKind::inverse_of_a);

    const NamedUpdate& col = named_update(UpdateName::column);
    CHECK(col.implied_w == WeightKind::gram_inverse_left);
    CHECK(col.sketch_premultiplied_by_a);

    for (const char* s :
         {"kaczmarz", "bad-broyden", "psb", "good-broyden", "aip", "dfp", "bfgs", "column"})
        CHECK(to_string(update_name_from_string(s)) == s);
    CHECK_THROWS_AS((void)update_name_from_string("newton"), ConfigError);
}

TEST_CASE("validate_update enforces symmetry requirements") {
    RngStream rng(13);
    const ProblemMatrix gen(random_general(3, rng), Symmetry::general);
    CHECK_NOTHROW(validate_update(UpdateName::kaczmarz, gen));
    CHECK_THROWS_AS(validate_update(UpdateName::psb, gen), ConfigError);
    CHECK_THROWS(validate_update(UpdateName::bfgs, gen));

    const ProblemMatrix spd(random_spd(3, rng), Symmetry::spd);
    CHECK_NOTHROW(validate_update(UpdateName::bfgs, spd));
    CHECK_NOTHROW(validate_update(UpdateName::dfp, spd));
}

TEST_CASE("kaczmarz matches the row projection oracle and step_row") {
    RngStream rng(17);
    const Matrix a = random_general(4, rng);
    const Matrix x = random_general(4, rng);
    const Matrix s = coordinate_sketch(4, {1, 3});

    const Matrix stepped = kaczmarz_step(x, a, s);
    const Matrix oracle = testutil::row_oracle(x, a, s, Matrix::Identity(4, 4));
    CHECK((stepped - oracle).norm() <= 1e-8 * std::max(1.0, oracle.norm()));

    // postcondition S^T A X+ = S^T
    CHECK((s.transpose() * a * stepped - s.transpose()).norm() <= 1e-10);

    // identity-weight generic path delegates to the same arithmetic
    const Matrix generic = step_row(x, a, s);
    CHECK((stepped - generic).norm() == 0.0);
}

TEST_CASE("bad Broyden matches the column oracle; rank-one equals block") {
    RngStream rng(19);
    const Matrix a = random_general(4, rng);
    const Matrix x = random_general(4, rng);
    const Matrix s = coordinate_sketch(4, {0, 2});

    const Matrix stepped = bad_broyden_step(x, a, s);
    const Matrix oracle = testutil::col_oracle(x, a, s, Matrix::Identity(4, 4));
    CHECK((stepped - oracle).norm() <= 1e-8 * std::max(1.0, oracle.norm()));
    CHECK((stepped * a * s - s).norm() <= 1e-10);

    const Matrix single = coordinate_sketch(4, {2});
    CHECK((bad_broyden_step_rank_one(x, a, single.col(0)) -
           bad_broyden_step_block(x, a, single))
              .norm() <= 1e-12);

    // identity-weight generic path shares the block kernel exactly
    const Matrix generic = step_col(x, a, single);
    CHECK((bad_broyden_step_block(x, a, single) - generic).norm() == 0.0);
}

TEST_CASE("PSB matches the symmetric oracle and preserves symmetry") {
    RngStream rng(23);
    const Matrix a = testutil::random_symmetric(4, rng);
    Matrix x = testutil::random_symmetric(4, rng);
    const Matrix s = coordinate_sketch(4, {1, 2});

    const Matrix stepped = psb_step(x, a, s);
    const Matrix oracle = testutil::sym_oracle(x, a, s, Matrix::Identity(4, 4));
    CHECK((stepped - oracle).norm() <= 1e-8 * std::max(1.0, oracle.norm()));
    CHECK((stepped - stepped.transpose()).norm() <= 1e-10);
    CHECK((stepped * a * s - s).norm() <= 1e-9);

    CHECK((psb_step(x, a, s) - step_sym(x, a, s)).norm() == 0.0);
}

TEST_CASE("good Broyden replaces columns and maintains the Woodbury pair") {
    RngStream rng(29);
    const Matrix a = random_general(4, rng) + 4.0 * Matrix::Identity(4, 4);
    Matrix x = Matrix::Identity(4, 4);
    Matrix x_inv = Matrix::Identity(4, 4);

    const IteratePair first = good_broyden_step(x, x_inv, a, 2);
    CHECK((first.primal.col(2) - a.col(2)).norm() == 0.0);
    CHECK((first.primal.col(0) - x.col(0)).norm() == 0.0);
    CHECK((first.inverse * first.primal - Matrix::Identity(4, 4)).norm() <= 1e-10);

    // one cyclic sweep lands exactly on A
    for (Index i = 0; i < 4; ++i) {
        const IteratePair next = good_broyden_step(x, x_inv, a, i);
        x = next.primal;
        x_inv = next.inverse;
    }
    CHECK((x - a).norm() <= 1e-12);
    CHECK((x_inv * a - Matrix::Identity(4, 4)).norm() <= 1e-8);

    Matrix swap(2, 2);
    swap << 0, 1, 1, 0; // X^{-1} A e_0 has zero pivot at X = I
    CHECK_THROWS_AS((void)good_broyden_step(Matrix::Identity(2, 2), Matrix::Identity(2, 2), swap, 0),
                    NumericalError);
}

TEST_CASE("AIP equals the row update with W = A^{-1}") {
    RngStream rng(31);
    const Matrix a = random_spd(4, rng);
    const Matrix x = testutil::random_symmetric(4, rng);
    const Matrix s = coordinate_sketch(4, {0, 3});

    const Matrix stepped = aip_step(x, a, s);
    const Matrix a_inv = lu_inverse(a);
    const Matrix generic = step_row(x, a, s, &a_inv);
    CHECK((stepped - generic).norm() <= 1e-9 * std::max(1.0, stepped.norm()));

    const Matrix oracle = testutil::row_oracle(x, a, s, a_inv);
    CHECK((stepped - oracle).norm() <= 1e-7 * std::max(1.0, oracle.norm()));
    CHECK((s.transpose() * a * stepped - s.transpose()).norm() <= 1e-9);
}

TEST_CASE("DFP converges with S = I, satisfies its recurrence, pairs via Woodbury") {
    RngStream rng(37);
    const Matrix a = random_spd(4, rng);
    Matrix x = Matrix::Identity(4, 4);
    Matrix x_inv = Matrix::Identity(4, 4);

    const IteratePair full = dfp_step(x, x_inv, a, Matrix::Identity(4, 4));
    CHECK((full.primal - a).norm() <= 1e-9 * a.norm());
    CHECK((full.inverse * a - Matrix::Identity(4, 4)).norm() <= 1e-8);

    const Matrix s = coordinate_sketch(4, {1, 2});
    const IteratePair next = dfp_step(x, x_inv, a, s);

    // X+ - A = (I - A Omega)(X - A)(I - Omega A), Omega = S (S^T A S)^{-1} S^T
    const Matrix omega = s * lu_inverse(Matrix(s.transpose() * a * s)) * s.transpose();
    const Matrix eye = Matrix::Identity(4, 4);
    const Matrix expected = a + (eye - a * omega) * (x - a) * (eye - omega * a);
    CHECK((next.primal - expected).norm() <= 1e-9 * std::max(1.0, expected.norm()));

    CHECK((next.primal - next.primal.transpose()).norm() <= 1e-10);
    CHECK((next.inverse - lu_inverse(next.primal)).norm() <= 1e-8);
}

TEST_CASE("BFGS hand fixture, oracle agreement, PD preservation") {
    const Matrix a = fixture_a();
    const Matrix x = Matrix::Identity(2, 2);
    const Matrix s = coordinate_sketch(2, {0});

    Matrix expected(2, 2);
    expected << 0.75, -0.5, -0.5, 1.0;
    const Matrix stepped = bfgs_step(x, a, s);
    CHECK((stepped - expected).norm() <= 1e-12);

    // BFGS is the symmetric update weighted by W = A^{-1}
    const Matrix oracle = testutil::sym_oracle(x, a, s, lu_inverse(a));
    CHECK((stepped - oracle).norm() <= 1e-8);

    // recurrence X+ = P + (I - P A) X (I - A P), P = S (S^T A S)^{-1} S^T
    RngStream rng(41);
    const Matrix big = random_spd(5, rng);
    const Matrix xs = random_spd(5, rng);
    const Matrix sk = coordinate_sketch(5, {0, 3});
    const Matrix p = sk * lu_inverse(Matrix(sk.transpose() * big * sk)) * sk.transpose();
    const Matrix eye = Matrix::Identity(5, 5);
    const Matrix rec = p + (eye - p * big) * xs * (eye - big * p);
    const Matrix step5 = bfgs_step(xs, big, sk);
    CHECK((step5 - rec).norm() <= 1e-9 * std::max(1.0, rec.norm()));

    // positive definiteness survives the step when X is SPD
    CHECK((step5 - step5.transpose()).norm() <= 1e-10);
    CHECK(jacobi_eigendecomposition(step5).values[0] > 0.0);

    CHECK((bfgs_step(xs, big, Matrix(eye)) - lu_inverse(big)).norm() <= 1e-8);
}

TEST_CASE("column update reduces to weighted generic steps under S = A V") {
    RngStream rng(43);
    const Matrix a = random_general(4, rng);
    const Matrix x = random_general(4, rng);
    const Matrix v = coordinate_sketch(4, {1, 3});

    const Matrix gram_left = lu_inverse(Matrix(a.transpose() * a));
    const Matrix nonsym = column_update_step(x, a, v, false);
    const Matrix via_row = step_row(x, a, Matrix(a * v), &gram_left);
    CHECK((nonsym - via_row).norm() <= 1e-8 * std::max(1.0, nonsym.norm()));
    CHECK((v.transpose() * a.transpose() * a * nonsym - v.transpose() * a.transpose()).norm() <=
          1e-8);

    const Matrix sym_a = random_spd(4, rng);
    const Matrix xs = testutil::random_symmetric(4, rng);
    const Matrix w = lu_inverse(Matrix(sym_a * sym_a));
    const Matrix sym = column_update_step(xs, sym_a, v, true);
    const Matrix via_sym = step_sym(xs, sym_a, Matrix(sym_a * v), &w);
    CHECK((sym - via_sym).norm() <= 1e-8 * std::max(1.0, sym.norm()));
    CHECK((sym - sym.transpose()).norm() <= 1e-10);
}

TEST_CASE("rank-deficient sketched Grams raise the resample signal") {
    RngStream rng(47);
    const Matrix a = random_general(3, rng);
    const Matrix x = Matrix::Identity(3, 3);
    const Matrix zero = Matrix::Zero(3, 1);

    CHECK_THROWS_AS((void)kaczmarz_step(x, a, zero), GramRankDeficientError);
    CHECK_THROWS_AS((void)bad_broyden_step(x, a, zero), GramRankDeficientError);
    CHECK_THROWS_AS((void)psb_step(x, a, zero), GramRankDeficientError);
    CHECK_THROWS_AS((void)column_update_step(x, a, zero, false), GramRankDeficientError);

    Matrix repeated(3, 2); // duplicate columns make the Gram singular
    repeated.col(0) = Vector::Ones(3);
    repeated.col(1) = Vector::Ones(3);
    CHECK_THROWS_AS((void)kaczmarz_step(x, a, repeated), GramRankDeficientError);
}
