#include "helpers.hpp"

#include <doctest.h>

using namespace stdg;

namespace
{
    MarchResult march_gaussian(SpaceKind kind, int p, int n, bool reuse = true, double T = 0.25)
    {
        MarchOptions opts;
        opts.reuse_factorization = reuse;
        return time_march(test::mesh_1d(n), build_time_partition(T, static_cast<int>(std::lround(n * T))), {kind, p},
                          PenaltyConfig{}, exact_1d_gaussian(kDelta0).initial(), opts);
    }
} // namespace

TEST_CASE("sparse LU against a dense reference")
{
    std::mt19937 rng(41);
    const SlabSpace space(test::random_mesh_2d(rng, 3), {SpaceKind::Trefftz, 3}, 0.0, 0.2);
    const SparseMatrix A = assemble_an(space, PenaltyConfig{});
    const Eigen::VectorXd b = test::random_vector(rng, space.n_dofs());
    const Eigen::VectorXd x = solve_slab(A, b);
    const Eigen::VectorXd ref = Eigen::MatrixXd(A).partialPivLu().solve(b);
    CHECK((x - ref).norm() < 1e-8 * ref.norm());

    const SlabSolver solver(A);
    double r = 1.0;
    CHECK(solver.solve(Eigen::VectorXd::Zero(space.n_dofs()), &r).norm() == 0.0);
    solver.solve(b, &r);
    CHECK(r < kResidualGate);
    CHECK(std::isfinite(solver.condition_estimate()));
    CHECK(solver.condition_estimate() >= 1.0);
}

TEST_CASE("singular matrices are reported")
{
    SparseMatrix A(3, 3);
    A.insert(0, 0) = 1.0;
    A.insert(1, 1) = 1.0;
    A.makeCompressed();
    CHECK_THROWS_AS(solve_slab(A, Eigen::VectorXd::Ones(3), 4), SolveError);
}

TEST_CASE("zero initial data gives the zero solution")
{
    const InitialData zero = [](const Point&) { return FieldValue{}; };
    const MarchResult r = time_march(test::mesh_1d(5), build_time_partition(0.4, 4), {SpaceKind::Trefftz, 2},
                                     PenaltyConfig{}, zero);
    REQUIRE(r.report.ok);
    for (int n = 0; n < r.solution.n_solved(); ++n)
        CHECK(r.solution.coeffs(n).norm() == 0.0);
    CHECK(r.solution.eval({0.3, 0, 0}, 0.2).u == 0.0);
}

TEST_CASE("discrete energy is nonincreasing")
{
    for (SpaceKind kind : {SpaceKind::Trefftz, SpaceKind::FullPolynomial})
        for (int p = 1; p <= 3; ++p)
        {
            const MarchResult r = march_gaussian(kind, p, 40);
            REQUIRE(r.report.ok);
            const auto& s = r.report.slabs;
            REQUIRE(s.size() == 10);
            for (std::size_t n = 1; n < s.size(); ++n)
            {
                CHECK(s[n].energy_end <= s[n - 1].energy_end + 1e-10 * s[0].energy_end);
                CHECK(s[n].residual < kResidualGate);
            }
        }
}

TEST_CASE("factorization reuse matches per-slab factorization")
{
    const MarchResult a = march_gaussian(SpaceKind::Trefftz, 3, 20, true);
    const MarchResult b = march_gaussian(SpaceKind::Trefftz, 3, 20, false);
    REQUIRE(a.solution.n_solved() == b.solution.n_solved());
    int factorized = 0;
    for (const auto& s : a.report.slabs)
        factorized += s.factorized ? 1 : 0;
    // slab 0 and slab 1 differ only in the right-hand side, so one factorization serves all
    CHECK(factorized == 1);
    for (int n = 0; n < a.solution.n_solved(); ++n)
        CHECK((a.solution.coeffs(n) - b.solution.coeffs(n)).norm() <= 1e-12 * b.solution.coeffs(n).norm());
}

TEST_CASE("skeleton and volume marches agree")
{
    MarchOptions vol;
    vol.form = FormChoice::Volume;
    const auto mesh = test::mesh_1d(10);
    const TimePartition tp = build_time_partition(0.2, 2);
    const InitialData init = exact_1d_gaussian(kDelta0).initial();
    const MarchResult a = time_march(mesh, tp, {SpaceKind::Trefftz, 3}, PenaltyConfig{}, init);
    const MarchResult b = time_march(mesh, tp, {SpaceKind::Trefftz, 3}, PenaltyConfig{}, init, vol);
    CHECK(a.report.form == "skeleton");
    CHECK(b.report.form == "volume");
    for (int n = 0; n < 2; ++n)
        CHECK((a.solution.coeffs(n) - b.solution.coeffs(n)).norm() < 1e-9 * b.solution.coeffs(n).norm());
}

TEST_CASE("solution evaluation")
{
    const MarchResult r = march_gaussian(SpaceKind::Trefftz, 2, 10);
    const DiscreteSolution& s = r.solution;
    CHECK(s.degree() == 2);
    CHECK_THROWS(s.eval({2.0, 0, 0}, 0.1));
    // one-sided traces at a knot come from different slabs
    const double t1 = s.partition().t(1);
    const FieldValue left = s.eval({0.55, 0, 0}, t1, Side::Left);
    const FieldValue right = s.eval({0.55, 0, 0}, t1, Side::Right);
    CHECK(left.u != right.u);
    CHECK(std::abs(left.u - right.u) < 0.1);

    const auto j = r.report.to_json();
    CHECK(j.contains("slabs"));
    CHECK(j["slabs"].size() == s.n_solved());
    CHECK(j.contains("backend"));
}
