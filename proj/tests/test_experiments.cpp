#include "helpers.hpp"

#include "stdg/experiments.hpp"

#include <doctest.h>

using namespace stdg;

TEST_CASE("config validation")
{
    ExperimentConfig c;
    c.N = {10, 5};
    CHECK_THROWS_AS(c.resolved(), ConfigError);
    c.N = {5, 10};
    CHECK_NOTHROW(c.resolved());
    c.experiment = ExperimentKind::Linear1d;
    c.p = {2};
    CHECK_THROWS_AS(c.resolved(), ConfigError);
    c.experiment = ExperimentKind::Convergence1d;
    c.p = {0};
    CHECK_THROWS_AS(c.resolved(), ConfigError);
    c.p = {2};
    c.penalty.C_sigma0 = -1.0;
    CHECK_THROWS_AS(c.resolved(), ConfigError);
    c.penalty.C_sigma0 = 3.0;
    c.delta = 0.1;
    CHECK_THROWS_AS(c.resolved(), ConfigError);
    c.delta = 0.0;
    c.mesh_file = "/nonexistent.mesh";
    CHECK_THROWS_AS(c.resolved(), ConfigError);
    CHECK_THROWS_AS(experiment_from_string("table-9"), ConfigError);
    CHECK(experiment_from_string("p-refine-1d") == ExperimentKind::PRefine1d);
}

TEST_CASE("defaults follow the experiment")
{
    ExperimentConfig c;
    c.experiment = ExperimentKind::Convergence1d;
    const ExperimentConfig r = c.resolved();
    CHECK(r.T == 0.25);
    CHECK(r.delta == kDelta0);
    CHECK(r.N.front() == 5);
    CHECK(r.N.back() == 160);

    CHECK(r.p == std::vector<int>{2, 3, 4, 5});

    c.experiment = ExperimentKind::Energy1d;
    const ExperimentConfig e = c.resolved();
    CHECK(e.T == 5.0);
    CHECK(e.delta == doctest::Approx(kDelta0 / 4));
    CHECK(e.p.size() == 4);
}

TEST_CASE("config JSON round trip")
{
    ExperimentConfig c;
    c.experiment = ExperimentKind::Highfreq1d;
    c.p = {4};
    c.N = {10, 20};
    c.T = 1.0;
    c.penalty.sigma2_enabled = false;
    ExperimentConfig d;
    d.merge_json(c.to_json());
    CHECK(d.to_json() == c.to_json());
    ExperimentConfig e;
    e.merge_json(nlohmann::json{{"T", 2.0}});
    CHECK(e.T == 2.0);
    CHECK(e.p.empty());
    CHECK_THROWS_AS(e.merge_json(nlohmann::json{{"space", "legendre"}}), ConfigError);
}

TEST_CASE("basis-info table")
{
    ExperimentConfig c;
    c.experiment = ExperimentKind::BasisInfo;
    const ExperimentResult r = run_experiment(c);
    REQUIRE(r.ok);
    std::vector<int> d2;
    for (const auto& row : r.basis)
    {
        CHECK(row.trefftz_dim == trefftz_dim(row.p, row.d));
        if (row.d <= 2)
            CHECK(row.generated == row.trefftz_dim);
        if (row.d == 2)
            d2.push_back(row.trefftz_dim);
    }
    REQUIRE(d2.size() >= 5);
    CHECK(std::vector<int>(d2.begin(), d2.begin() + 5) == std::vector<int>{1, 4, 9, 16, 25});
}

TEST_CASE("convergence runs are deterministic")
{
    ExperimentConfig c;
    c.experiment = ExperimentKind::Convergence1d;
    c.p = {2};
    c.N = {5, 10};
    c.threads = 2;
    const ExperimentResult a = run_experiment(c), b = run_experiment(c);
    REQUIRE(a.ok);
    REQUIRE(a.artifacts.size() == b.artifacts.size());
    for (std::size_t i = 0; i < a.artifacts.size(); ++i)
        CHECK(a.artifacts[i].content == b.artifacts[i].content);
    REQUIRE(a.convergence.size() == 2);
    CHECK(std::isnan(a.convergence[0].order));
    CHECK(a.convergence[1].error < a.convergence[0].error);
    CHECK(a.summary.contains("config"));
    CHECK(a.artifacts[0].content.rfind("N,h,dofs,error,order", 0) == 0);
}

TEST_CASE("CSV formats")
{
    CHECK(energy_csv({{0.0, 1.0, 1.0}}).rfind("t,E,E_h\n", 0) == 0);
    CHECK(highfreq_csv({}).rfind("delta,h,h_over_delta,error_delta", 0) == 0);
    CHECK(elements_for_step(0.025) == 40);
    CHECK(elements_for_step(3.0) == 1);
}
