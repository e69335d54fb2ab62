#include "helpers.hpp"

#include <doctest.h>

using namespace stdg;
using stdg::test::term;

TEST_CASE("trefftz_dim examples")
{
    CHECK(trefftz_dim(1, 1) == 3);
    CHECK(trefftz_dim(3, 2) == 16);
    CHECK(trefftz_dim(3, 3) == 30);
    CHECK(trefftz_dim(0, 2) == 1);
    CHECK_THROWS(trefftz_dim(-1, 1));
    CHECK_THROWS(trefftz_dim(2, 4));
}

TEST_CASE("full_dim")
{
    CHECK(full_dim(1, 1) == 3);
    CHECK(full_dim(2, 1) == 6);
    CHECK(full_dim(3, 2) == 20);
}

TEST_CASE("generated Trefftz bases have the predicted dimension")
{
    for (int d = 1; d <= 2; ++d)
        for (int p = 0; p <= 6; ++p)
            CHECK(make_trefftz_reference(p, d, 1.0)->size() == trefftz_dim(p, d));
    for (int p = 0; p <= 4; ++p)
        CHECK(make_trefftz_reference(p, 3, 1.0)->size() == trefftz_dim(p, 3));
}

TEST_CASE("every basis function solves the wave equation")
{
    // Shape-regular space-time elements: tau / h between 1/4 and 4.
    std::mt19937 rng(21);
    std::uniform_real_distribution<double> u(0.01, 0.5), ratio(std::log(0.25), std::log(4.0));
    for (double a : {0.25, 1.0, 4.0})
        for (int d = 1; d <= 2; ++d)
            for (int p = 0; p <= 6; ++p)
            {
                const std::array<double, 3> c{u(rng), u(rng), u(rng)};
                const double hx = u(rng);
                const ElementFrame f = ElementFrame::make(d, c, hx, u(rng), hx * std::exp(ratio(rng)));
                const LocalBasis b = build_trefftz_basis(p, d, a, f);
                CHECK(verify_trefftz(b) < 1e-12);
            }
}

TEST_CASE("the sixteen classical p = 3, d = 2 Trefftz functions lie in the generated space")
{
    for (double a : {0.5, 1.0, 3.0})
    {
        const auto ref = make_trefftz_reference(3, 2, a);
        const int d = 2;
        const Polynomial x = term(d, {1, 0, 0}), y = term(d, {0, 1, 0}), t = term(d, {0, 0, 1});
        const std::vector<Polynomial> fs{
            Polynomial::constant(d, 1.0), t, x, y, t * x, t * y, x * y,
            a * t * t + x * x, a * t * t + y * y, x * y * t,
            a * t * t * t + 3.0 * x * x * t, x * x * x + 3.0 * a * t * t * x, y * y * y + 3.0 * a * t * t * y,
            (a * t * t + x * x) * y, (a * t * t + y * y) * x, (x * x - y * y) * t};
        REQUIRE(fs.size() == 16);
        for (const auto& f : fs)
        {
            CHECK(wave_operator(f, a).max_abs_coefficient() < 1e-14);
            CHECK(span_residual(*ref, f) < 1e-12);
        }
    }
}

TEST_CASE("small-degree spans")
{
    // p = 1: every linear function
    for (int d = 1; d <= 3; ++d)
    {
        const auto tr = make_trefftz_reference(1, d, 1.0);
        const auto full = make_full_reference(1, d);
        CHECK(tr->size() == full->size());
        for (const auto& f : full->funcs)
            CHECK(span_residual(*tr, f) < 1e-12);
        for (const auto& f : tr->funcs)
            CHECK(span_residual(*full, f) < 1e-12);
    }
    // p = 2, d = 1, a = 4 contains 4 t^2 + x^2
    const Polynomial g = term(1, {0, 2}, 4.0) + term(1, {2, 0});
    CHECK(wave_operator(g, 4.0).is_zero());
    CHECK(span_residual(*make_trefftz_reference(2, 1, 4.0), g) < 1e-12);
    // ... but not t^2 + x^2
    CHECK(span_residual(*make_trefftz_reference(2, 1, 4.0), term(1, {0, 2}) + term(1, {2, 0})) > 1e-3);
}

TEST_CASE("full basis examples")
{
    const LocalBasis b = build_full_basis(1, 1, ElementFrame::identity(1));
    CHECK(b.size() == 3);
    CHECK(build_full_basis(3, 2, ElementFrame::identity(2)).size() == 20);
    CHECK(build_full_basis(2, 1, ElementFrame::identity(1)).size() == 6);
}

TEST_CASE("verify_trefftz detects a non-solution")
{
    LocalBasis b = build_trefftz_basis(0, 1, 1.0, ElementFrame::identity(1));
    CHECK(verify_trefftz(b) == 0.0);
    auto ref = std::make_shared<ReferenceBasis>(*b.ref);
    ref->funcs.push_back(term(1, {2, 0}));
    b.ref = ref;
    // L(x^2) = -2 against max coefficient 1
    CHECK(verify_trefftz(b) >= 2.0);
    CHECK_THROWS(verify_trefftz(build_full_basis(2, 1, ElementFrame::identity(1))));
}

TEST_CASE("Trefftz space nests in the full space and has orthonormal coefficients")
{
    for (int d = 1; d <= 2; ++d)
        for (int p = 0; p <= 6; ++p)
        {
            const auto tr = make_trefftz_reference(p, d, 0.7);
            const auto full = make_full_reference(p, d);
            for (const auto& f : tr->funcs)
                CHECK(span_residual(*full, f) < 1e-12);
            const Eigen::MatrixXd G = tr->coeffs * tr->coeffs.transpose();
            CHECK((G - Eigen::MatrixXd::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff() < 1e-12);
        }
}

TEST_CASE("derivative tables agree with symbolic derivatives")
{
    const auto ref = make_trefftz_reference(4, 2, 1.3);
    for (int k = 0; k < ref->size(); ++k)
    {
        const auto ct = poly_diff(ref->funcs[k], 2).coefficients(ref->monomials);
        const auto cx = poly_diff(ref->funcs[k], 0).coefficients(ref->monomials);
        const auto cxt = poly_diff(poly_diff(ref->funcs[k], 0), 2).coefficients(ref->monomials);
        for (int m = 0; m < ref->n_monomials(); ++m)
        {
            CHECK(ref->coeffs_t(k, m) == doctest::Approx(ct[m]).epsilon(1e-13));
            CHECK(ref->coeffs_x[0](k, m) == doctest::Approx(cx[m]).epsilon(1e-13));
            CHECK(ref->coeffs_xt[0](k, m) == doctest::Approx(cxt[m]).epsilon(1e-13));
        }
    }
}

TEST_CASE("space kind names")
{
    CHECK(space_kind_from_string("trefftz") == SpaceKind::Trefftz);
    CHECK(space_kind_from_string("full") == SpaceKind::FullPolynomial);
    CHECK_THROWS_AS(space_kind_from_string("legendre"), std::invalid_argument);
    CHECK(std::string(to_string(SpaceKind::FullPolynomial)) == "full");
}
