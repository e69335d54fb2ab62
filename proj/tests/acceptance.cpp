// Acceptance suite: one line per criterion, nonzero exit if any fails.
// Usage: stdg_acceptance [output-dir]   (writes the experiment CSV/JSON artifacts when given)

#include "helpers.hpp"

#include "stdg/experiments.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>

using namespace stdg;

namespace
{
    struct Outcome
    {
        bool pass = false;
        std::string detail;
    };

    std::string out_dir;
    double worst_energy_increase = 0.0;
    int experiment_runs = 0;

    std::string fixed(double v, int digits = 2)
    {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.*f", digits, v);
        return buf;
    }

    std::string sci(double v)
    {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.2e", v);
        return buf;
    }

    ExperimentResult run(ExperimentConfig c)
    {
        c.out_dir = out_dir;
        const ExperimentResult r = run_experiment(c);
        if (!out_dir.empty())
            write_artifacts(c.resolved(), r);
        worst_energy_increase = std::max(worst_energy_increase, r.max_energy_increase);
        ++experiment_runs;
        return r;
    }

    /// Order recorded on the row with the given N of the ladder for degree p.
    double order_at(const ExperimentResult& r, const std::vector<int>& ps, int n_rows, int p, int N)
    {
        for (std::size_t ip = 0; ip < ps.size(); ++ip)
            if (ps[ip] == p)
                for (int k = 0; k < n_rows; ++k)
                {
                    const auto& row = r.convergence[ip * n_rows + k];
                    if (row.N == N)
                        return row.order;
                }
        return std::numeric_limits<double>::quiet_NaN();
    }

    std::shared_ptr<const SpatialMesh> random_mesh(std::mt19937& rng, int dim)
    {
        return dim == 1 ? test::random_mesh_1d(rng, 7) : test::random_mesh_2d(rng, 3);
    }

    // ---------------------------------------------------------------- criteria

    Outcome trefftz_dimensions()
    {
        // dim P_p(R^d) + dim P_{p-1}(R^d): Cauchy data u(., 0) and u_t(., 0)
        auto binom = [](int n, int k) {
            long r = 1;
            for (int i = 1; i <= k; ++i)
                r = r * (n - k + i) / i;
            return static_cast<int>(r);
        };
        int checked = 0, bad = 0;
        for (int d = 1; d <= 3; ++d)
            for (int p = 0; p <= 6; ++p)
            {
                const int expect = binom(p + d, d) + (p > 0 ? binom(p - 1 + d, d) : 0);
                bad += trefftz_dim(p, d) != expect;
                if (d <= 2)
                    bad += make_trefftz_reference(p, d, 1.0)->size() != expect;
                ++checked;
            }
        return {bad == 0, std::to_string(checked) + " (p, d) pairs, " + std::to_string(bad) + " mismatches"};
    }

    Outcome pde_annihilation()
    {
        std::mt19937 rng(101);
        std::uniform_real_distribution<double> u(0.01, 0.5), ratio(std::log(0.25), std::log(4.0));
        double worst = 0.0;
        for (double a : {0.25, 1.0, 4.0})
            for (int d = 1; d <= 2; ++d)
                for (int p = 0; p <= 6; ++p)
                    for (int k = 0; k < 4; ++k)
                    {
                        const std::array<double, 3> c{u(rng), u(rng), u(rng)};
                        const double hx = u(rng);
                        const ElementFrame f = ElementFrame::make(d, c, hx, u(rng), hx * std::exp(ratio(rng)));
                        worst = std::max(worst, verify_trefftz(build_trefftz_basis(p, d, a, f)));
                    }
        return {worst < 1e-12, "max relative residual " + sci(worst) + " (limit 1e-12)"};
    }

    Outcome classical_span()
    {
        double worst = 0.0;
        for (double a : {0.3, 1.0, 2.5})
        {
            const int d = 2;
            const auto ref = make_trefftz_reference(3, d, a);
            const Polynomial x = test::term(d, {1, 0, 0}), y = test::term(d, {0, 1, 0}), t = test::term(d, {0, 0, 1});
            const std::vector<Polynomial> fs{
                Polynomial::constant(d, 1.0), t, x, y, t * x, t * y, x * y,
                a * t * t + x * x, a * t * t + y * y, x * y * t,
                a * t * t * t + 3.0 * x * x * t, x * x * x + 3.0 * a * t * t * x, y * y * y + 3.0 * a * t * t * y,
                (a * t * t + x * x) * y, (a * t * t + y * y) * x, (x * x - y * y) * t};
            for (const auto& f : fs)
                worst = std::max(worst, span_residual(*ref, f));
        }
        return {worst < 1e-12, "16 functions, max projection residual " + sci(worst) + " (limit 1e-12)"};
    }

    Outcome form_identity()
    {
        std::mt19937 rng(102);
        std::uniform_real_distribution<double> u(0.05, 0.3);
        double worst = 0.0;
        int vectors = 0;
        for (int dim = 1; dim <= 2; ++dim)
            for (SpaceKind kind : {SpaceKind::Trefftz, SpaceKind::FullPolynomial})
                for (int p = 1; p <= 5; ++p)
                {
                    const auto mesh = random_mesh(rng, dim);
                    const double t0 = u(rng), t1 = t0 + u(rng);
                    const SlabSpace space(mesh, {kind, p}, t0, t1);
                    const PenaltyConfig cfg{};
                    const SparseMatrix A = assemble_an(space, cfg);
                    const int qd = assembly_degree(p);
                    for (int k = 0; k < 10; ++k, ++vectors)
                    {
                        const Eigen::VectorXd v = test::random_vector(rng, space.n_dofs());
                        const DiscreteSlabFunction w(space, {v.data(), static_cast<std::size_t>(v.size())});
                        const FaceTimeTerms ft = face_time_terms(w, *mesh, p, t0, t1, cfg, qd);
                        const double terms = discrete_energy(w, space, t1, qd, cfg) +
                                             discrete_energy(w, space, t0, qd, cfg) + ft.sigma1_jump +
                                             ft.sigma2_flux_jump;
                        worst = std::max(worst, test::rel_diff(v.dot(A * v), terms));
                    }
                }
        return {worst < 1e-10, std::to_string(vectors) + " vectors, max relative discrepancy " + sci(worst)};
    }

    Outcome skeleton_volume()
    {
        std::mt19937 rng(103);
        double worst = 0.0;
        for (int dim = 1; dim <= 2; ++dim)
            for (int p = 1; p <= (dim == 1 ? 5 : 4); ++p)
                for (int k = 0; k < 2; ++k)
                {
                    const auto mesh = random_mesh(rng, dim);
                    const SlabSpace space(mesh, {SpaceKind::Trefftz, p}, 0.2, 0.2 + mesh->h_max());
                    const Eigen::MatrixXd Av(assemble_an(space, PenaltyConfig{}));
                    const Eigen::MatrixXd As(assemble_an_skeleton(space, PenaltyConfig{}));
                    worst = std::max(worst, (Av - As).cwiseAbs().maxCoeff() / Av.cwiseAbs().maxCoeff());
                }
        return {worst < 1e-10, "max entrywise relative difference " + sci(worst) + " (limit 1e-10)"};
    }

    Outcome exact_energy()
    {
        const ExactSolution g = exact_1d_gaussian(kDelta0);
        std::vector<double> x, w;
        gauss_legendre(24, x, w);
        double E = 0.0;
        const int n = 200;
        for (int e = 0; e < n; ++e)
            for (std::size_t k = 0; k < x.size(); ++k)
            {
                const FieldValue f = g({(e + 0.5 * (x[k] + 1.0)) / n, 0, 0}, 0.0);
                E += 0.5 * w[k] / n * 0.5 * (f.ut * f.ut + f.grad[0] * f.grad[0]);
            }
        const double rel = test::rel_diff(E, exact_energy_gaussian(kDelta0));
        return {rel < 1e-8, "quadrature " + fixed(E, 10) + ", closed form " + fixed(exact_energy_gaussian(kDelta0), 10) +
                                ", relative difference " + sci(rel)};
    }

    Outcome dg_orders(SpaceKind space, const std::array<double, 4>& target, double tol)
    {
        ExperimentConfig c;
        c.experiment = ExperimentKind::Convergence1d;
        c.space = space;
        c.p = {2, 3, 4, 5};
        const ExperimentConfig rc = c.resolved();
        const ExperimentResult r = run(c);
        if (!r.ok)
            return {false, "run failed: " + r.error};
        // A tabulated row N holds log2(e(N) / e(2N)); our CSV stores that order on row 2N.
        bool pass = true;
        std::ostringstream s;
        for (int i = 0; i < 4; ++i)
        {
            const int p = c.p[i];
            const double o = order_at(r, c.p, static_cast<int>(rc.N.size()), p, 80);
            const bool ok = std::abs(o - target[i]) <= tol;
            pass = pass && ok;
            s << "p=" << p << ": " << fixed(o) << " vs " << fixed(target[i]) << (ok ? "" : " [out]") << "; ";
        }
        s << "tolerance " << fixed(tol);
        return {pass, s.str()};
    }

    Outcome linear_stagnation()
    {
        ExperimentConfig c;
        c.experiment = ExperimentKind::Linear1d;
        const ExperimentConfig rc = c.resolved();
        const ExperimentResult r = run(c);
        if (!r.ok)
            return {false, "run failed: " + r.error};
        std::vector<double> orders;
        std::ostringstream s;
        s << "orders";
        for (const auto& row : r.convergence)
            if (!std::isnan(row.order))
            {
                orders.push_back(row.order);
                s << " " << fixed(row.order);
            }
        bool monotone = true;
        for (std::size_t k = 1; k < orders.size(); ++k)
            monotone = monotone && orders[k] > orders[k - 1];
        // tabulated row 1280 = our row 2560
        const double o = order_at(r, {1}, static_cast<int>(rc.N.size()), 1, 2560);
        const bool near = std::abs(o - 0.38) <= 0.15;
        s << "; at 1280: " << fixed(o) << " vs 0.38 +- 0.15" << (near ? "" : " [out]")
          << (monotone ? "; monotone" : "; NOT monotone");
        return {near && monotone, s.str()};
    }

    Outcome final_energy_orders_2d()
    {
        ExperimentConfig c;
        c.experiment = ExperimentKind::Convergence2d;
        c.p = {2, 4};
        c.N = {10, 20, 40};
        const ExperimentResult r = run(c);
        if (!r.ok)
            return {false, "run failed: " + r.error};
        const std::array<double, 2> target{1.99, 3.98};
        bool pass = true;
        std::ostringstream s;
        for (int i = 0; i < 2; ++i)
        {
            const double o = order_at(r, c.p, 3, c.p[i], 40);
            const bool ok = std::abs(o - target[i]) <= 0.3;
            pass = pass && ok;
            s << "p=" << c.p[i] << ": " << fixed(o) << " vs " << fixed(target[i]) << (ok ? "" : " [out]")
              << " (10->20: " << fixed(order_at(r, c.p, 3, c.p[i], 20)) << "); ";
        }
        s << "tolerance 0.30";
        return {pass, s.str()};
    }

    Outcome energy_conservation()
    {
        ExperimentConfig c;
        c.experiment = ExperimentKind::Energy1d;
        c.p = {1, 2, 3};
        const ExperimentResult r = run(c);
        if (!r.ok)
            return {false, "run failed: " + r.error};
        // E is the physical energy 1/2|u_h'|^2 + 1/2|grad u_h|^2 at left traces, checked over every knot.
        // E_h (n >= 1) is what the stability theory controls; it is printed for comparison only.
        bool pass = true;
        std::ostringstream s;
        double prev = -1.0;
        for (std::size_t i = 0; i < r.energy.size(); ++i)
        {
            const auto& e = r.energy[i];
            double rise = 0.0, rise_h = 0.0;
            for (std::size_t k = 1; k < e.size(); ++k)
            {
                rise = std::max(rise, (e[k].E - e[k - 1].E) / e[0].E);
                if (k >= 2)
                    rise_h = std::max(rise_h, (e[k].E_h - e[k - 1].E_h) / e[1].E_h);
            }
            const double frac = e.back().E / e.front().E;
            const bool ok = rise <= 1e-10 && frac > prev;
            pass = pass && ok;
            prev = frac;
            s << "p=" << c.p[i] << ": E(T)/E(0) " << fixed(frac, 4) << ", max rise of E " << sci(rise) << " (E_h "
              << sci(rise_h) << ")" << (ok ? "" : " [fail]") << "; ";
        }
        return {pass, s.str()};
    }

    Outcome high_frequency()
    {
        ExperimentConfig c;
        c.experiment = ExperimentKind::Highfreq1d;
        const ExperimentResult r = run(c);
        if (!r.ok)
            return {false, "run failed: " + r.error};
        // rows come in triples (delta0, delta0/2, delta0/4) at fixed h / delta
        bool pass = true;
        std::ostringstream s;
        for (std::size_t i = 0; i + 2 < r.highfreq.size(); i += 3)
        {
            double lo = 1e300, hi = 0.0;
            for (std::size_t k = i; k < i + 3; ++k)
            {
                lo = std::min(lo, r.highfreq[k].error_delta);
                hi = std::max(hi, r.highfreq[k].error_delta);
            }
            const bool ok = hi <= 2.0 * lo;
            pass = pass && ok;
            s << "h/delta=" << fixed(r.highfreq[i].h_over_delta, 3) << ": max/min " << fixed(hi / lo, 3)
              << (ok ? "" : " [out]") << "; ";
        }
        return {pass, s.str()};
    }

    Outcome p_refinement()
    {
        ExperimentConfig c;
        c.experiment = ExperimentKind::PRefine1d;
        const ExperimentResult r = run(c);
        if (!r.ok)
            return {false, "run failed: " + r.error};
        const auto& rows = r.prefine;
        bool decreasing = true, ratios_decreasing = true;
        std::ostringstream s;
        s << "h=" << fixed(r.summary.value("h", 0.0), 4) << "; errors";
        for (const auto& row : rows)
            s << " " << sci(row.error);
        s << "; ratios";
        double prev_ratio = 1e300;
        for (std::size_t k = 1; k < rows.size(); ++k)
        {
            const double ratio = rows[k].error / rows[k - 1].error;
            decreasing = decreasing && ratio < 1.0;
            ratios_decreasing = ratios_decreasing && ratio < prev_ratio;
            prev_ratio = ratio;
            s << " " << fixed(ratio, 3);
        }
        s << (decreasing ? "; errors decrease" : "; errors NOT decreasing")
          << (ratios_decreasing ? "; ratios decrease" : "; ratios NOT decreasing");
        return {decreasing && ratios_decreasing, s.str()};
    }

    Outcome projection_oracle()
    {
        const double T = 0.25;
        const ExactSolution u = exact_1d_gaussian(kDelta0);
        bool pass = true;
        std::ostringstream s;
        double worst_res = 0.0;
        for (int p : {2, 3, 4})
        {
            std::vector<double> h, e;
            for (int N : {10, 20, 40, 80})
            {
                const auto mesh = std::make_shared<const SpatialMesh>(build_mesh_1d(elements_for_step(T / N)));
                double res = 1.0;
                const DiscreteSolution pi = trefftz_projection_1d(u, mesh, build_time_partition(T, N), p, 1.0, &res);
                worst_res = std::max(worst_res, res);
                h.push_back(T / N);
                e.push_back(error_dg(pi, u, PenaltyConfig{kExperimentCsigma0}));
            }
            const auto o = convergence_orders(h, e);
            const bool ok = o.back() >= p - 0.5;
            pass = pass && ok;
            s << "p=" << p << ": orders " << fixed(o[1]) << " " << fixed(o[2]) << " " << fixed(o[3]) << " vs "
              << fixed(p - 0.5) << (ok ? "" : " [below]") << "; ";
        }
        s << "max Trefftz residual " << sci(worst_res);
        return {pass && worst_res < 1e-10, s.str()};
    }

    // Runs after the experiment criteria so that every march above is covered.
    Outcome stability()
    {
        std::mt19937 rng(104);
        double worst = 1e300;
        int vectors = 0;
        for (int dim = 1; dim <= 2; ++dim)
            for (SpaceKind kind : {SpaceKind::Trefftz, SpaceKind::FullPolynomial})
                for (int p = 1; p <= 5; ++p)
                {
                    const auto mesh = dim == 1 ? test::mesh_1d(10) : test::mesh_2d(3);
                    const SlabSpace space(mesh, {kind, p}, 0.5, 0.5 + mesh->h_max());
                    const SparseMatrix A = assemble_an(space, PenaltyConfig{});
                    const SliceQuadrature q(*mesh, assembly_degree(p));
                    for (int k = 0; k < 10; ++k, ++vectors)
                    {
                        const Eigen::VectorXd v = test::random_vector(rng, space.n_dofs());
                        const TraceData d =
                            trace_data(DiscreteSlabFunction(space, {v.data(), static_cast<std::size_t>(v.size())}),
                                       *mesh, q, space.t1());
                        double floor = 0.0;
                        for (int e = 0; e < mesh->n_elements(); ++e)
                            for (int j = q.elem_start[e]; j < q.elem_start[e + 1]; ++j)
                            {
                                double g2 = 0.0;
                                for (int i = 0; i < dim; ++i)
                                    g2 += d.grad[j * dim + i] * d.grad[j * dim + i];
                                floor += q.elem_w[j] * (0.5 * d.ut[j] * d.ut[j] + 0.25 * mesh->elements[e].a * g2);
                            }
                        worst = std::min(worst, v.dot(A * v) / floor);
                    }
                }
        const bool coercive = worst >= 1.0;
        const bool dissipative = worst_energy_increase <= 1e-10;
        return {coercive && dissipative,
                "min v'Av / floor over " + std::to_string(vectors) + " vectors " + fixed(worst, 3) +
                    "; largest relative E_h rise over " + std::to_string(experiment_runs) + " experiment runs " +
                    sci(worst_energy_increase)};
    }
} // namespace

int main(int argc, char** argv)
{
    if (argc > 1)
        out_dir = argv[1];

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"trefftz-dimensions", trefftz_dimensions},
        {"pde-annihilation", pde_annihilation},
        {"classical-basis-span", classical_span},
        {"form-energy-identity", form_identity},
        {"skeleton-volume-equivalence", skeleton_volume},
        {"exact-energy-formula", exact_energy},
        {"dg-orders-trefftz", [] { return dg_orders(SpaceKind::Trefftz, {1.46, 2.42, 3.51, 4.76}, 0.25); }},
        {"dg-orders-full", [] { return dg_orders(SpaceKind::FullPolynomial, {1.44, 2.38, 3.41, 4.91}, 0.3); }},
        {"linear-stagnation", linear_stagnation},
        {"final-energy-orders-2d", final_energy_orders_2d},
        {"energy-conservation", energy_conservation},
        {"high-frequency", high_frequency},
        {"p-refinement", p_refinement},
        {"projection-oracle", projection_oracle},
        {"stability", stability},
    };

    int failed = 0;
    for (const auto& [name, fn] : criteria)
    {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try
        {
            o = fn();
        }
        catch (const std::exception& e)
        {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failed += !o.pass;
        std::printf("[%s] %-28s (%7.1f s) %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), sec, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
