#include "stdg/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <thread>

namespace stdg
{
    namespace
    {
        constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

        const std::map<std::string, ExperimentKind>& experiment_names()
        {
            static const std::map<std::string, ExperimentKind> names{
                {"convergence-1d", ExperimentKind::Convergence1d}, {"linear-1d", ExperimentKind::Linear1d},
                {"p-refine-1d", ExperimentKind::PRefine1d},       {"energy-1d", ExperimentKind::Energy1d},
                {"highfreq-1d", ExperimentKind::Highfreq1d},      {"convergence-2d", ExperimentKind::Convergence2d},
                {"basis-info", ExperimentKind::BasisInfo},        {"solve", ExperimentKind::Solve}};
            return names;
        }

        // Runs fn(0..n-1) on a small pool; the first exception is rethrown after all workers stop.
        void parallel_for(int n, int threads, const std::function<void(int)>& fn)
        {
            const int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
            const int nt = std::clamp(threads > 0 ? threads : hw, 1, std::max(1, n));
            std::atomic<int> next{0};
            std::exception_ptr failure;
            std::mutex m;
            auto worker = [&] {
                for (int i = next++; i < n; i = next++)
                {
                    try
                    {
                        fn(i);
                    }
                    catch (...)
                    {
                        std::lock_guard lock(m);
                        if (!failure)
                            failure = std::current_exception();
                    }
                }
            };
            {
                std::vector<std::jthread> pool;
                for (int t = 1; t < nt; ++t)
                    pool.emplace_back(worker);
                worker();
            }
            if (failure)
                std::rethrow_exception(failure);
        }

        std::string fmt(double v)
        {
            if (std::isnan(v))
                return "nan";
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.10e", v);
            return buf;
        }

        std::string stem(const ExperimentConfig& c)
        {
            std::string s = to_string(c.experiment);
            std::replace(s.begin(), s.end(), '-', '_');
            if (c.experiment != ExperimentKind::BasisInfo)
                s += std::string("_") + to_string(c.space);
            return s;
        }

        std::string with_p(const std::string& s, int p) { return s + "_p" + std::to_string(p); }

        struct Run
        {
            MarchResult march;
            double seconds = 0.0;
        };

        Run march_1d(const ExperimentConfig& c, int p, int N, double T, const ExactSolution& exact)
        {
            const auto t0 = std::chrono::steady_clock::now();
            const double h = T / N;
            auto mesh = std::make_shared<const SpatialMesh>(build_mesh_1d(elements_for_step(h)));
            Run r{time_march(mesh, build_time_partition(T, N), {c.space, p}, c.penalty, exact.initial()), 0.0};
            r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            return r;
        }

        std::shared_ptr<const SpatialMesh> mesh_2d(const ExperimentConfig& c, int N)
        {
            if (!c.mesh_file.empty())
                return std::make_shared<const SpatialMesh>(read_mesh_2d_file(c.mesh_file));
            return std::make_shared<const SpatialMesh>(build_mesh_2d_unit_square(N));
        }

        void fill_orders(std::vector<ConvergenceRow>& rows)
        {
            for (std::size_t k = 0; k < rows.size(); ++k)
            {
                rows[k].order = kNaN;
                if (k == 0)
                    continue;
                const auto& a = rows[k - 1];
                const auto& b = rows[k];
                if (a.error > 0.0 && b.error > 0.0)
                    rows[k].order = std::log(a.error / b.error) / std::log(a.h / b.h);
            }
        }

        nlohmann::json rows_json(const std::vector<ConvergenceRow>& rows)
        {
            auto arr = nlohmann::json::array();
            for (const auto& r : rows)
                arr.push_back({{"N", r.N},
                               {"h", r.h},
                               {"dofs", r.dofs},
                               {"error", std::isnan(r.error) ? nlohmann::json() : nlohmann::json(r.error)},
                               {"order", std::isnan(r.order) ? nlohmann::json() : nlohmann::json(r.order)},
                               {"seconds", r.seconds}});
            return arr;
        }

        void record_failure(ExperimentResult& res, const std::string& what)
        {
            if (res.ok)
            {
                res.ok = false;
                res.error = what;
            }
        }

        void record_increase(ExperimentResult& res, const std::vector<double>& inc)
        {
            for (double v : inc)
                res.max_energy_increase = std::max(res.max_energy_increase, v);
            res.summary["max_energy_increase"] = res.max_energy_increase;
        }

        // convergence-1d, linear-1d and convergence-2d: one ladder per p.
        void run_convergence(const ExperimentConfig& c, ExperimentResult& res)
        {
            const bool two_d = c.experiment == ExperimentKind::Convergence2d;
            const ExactSolution exact = two_d ? exact_2d_mode() : exact_1d_gaussian(c.delta);
            const int np = static_cast<int>(c.p.size()), nn = static_cast<int>(c.N.size());
            std::vector<ConvergenceRow> rows(np * nn);
            std::vector<std::string> failures(np * nn);
            std::vector<double> increase(np * nn, 0.0);

            parallel_for(np * nn, c.threads, [&](int i) {
                const int p = c.p[i / nn], N = c.N[i % nn];
                ConvergenceRow& row = rows[i];
                row.N = N;
                const auto t0 = std::chrono::steady_clock::now();
                MarchResult m = [&] {
                    if (!two_d)
                        return march_1d(c, p, N, c.T, exact).march;
                    return time_march(mesh_2d(c, N), build_time_partition(c.T, N), {c.space, p}, c.penalty,
                                      exact.initial());
                }();
                row.h = two_d ? 1.0 / N : c.T / N;
                if (two_d && !c.mesh_file.empty())
                    row.h = m.solution.mesh().h_max();
                row.dofs = m.report.dofs_per_slab;
                increase[i] = energy_increase(m.report);
                if (m.report.ok)
                    row.error = two_d ? error_final_energy(m.solution, exact) : error_dg(m.solution, exact, c.penalty);
                else
                {
                    row.error = kNaN;
                    failures[i] = "p=" + std::to_string(p) + " N=" + std::to_string(N) + ": " + m.report.error;
                }
                row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            });

            const std::string base = stem(c);
            auto per_p = nlohmann::json::array();
            for (int ip = 0; ip < np; ++ip)
            {
                std::vector<ConvergenceRow> ladder(rows.begin() + ip * nn, rows.begin() + (ip + 1) * nn);
                fill_orders(ladder);
                res.convergence.insert(res.convergence.end(), ladder.begin(), ladder.end());
                res.artifacts.push_back({with_p(base, c.p[ip]) + ".csv", convergence_csv(ladder)});
                per_p.push_back({{"p", c.p[ip]}, {"rows", rows_json(ladder)}});
            }
            for (const auto& f : failures)
                if (!f.empty())
                    record_failure(res, f);
            record_increase(res, increase);
            res.summary["results"] = per_p;
            res.summary["error_measure"] = two_d ? "final-time energy error" : "dG norm";
            res.summary["error_quadrature_degree"] = "2p+6";
        }

        void run_prefine(const ExperimentConfig& c, ExperimentResult& res)
        {
            const ExactSolution exact = exact_1d_gaussian(c.delta);
            const int N = c.N.front(), np = static_cast<int>(c.p.size());
            res.prefine.resize(np);
            std::vector<std::string> failures(np);
            std::vector<double> increase(np, 0.0);
            parallel_for(np, c.threads, [&](int i) {
                const Run r = march_1d(c, c.p[i], N, c.T, exact);
                increase[i] = energy_increase(r.march.report);
                PRefineRow& row = res.prefine[i];
                row.p = c.p[i];
                row.dofs = r.march.report.dofs_per_slab;
                row.error = r.march.report.ok ? error_dg(r.march.solution, exact, c.penalty) : kNaN;
                if (!r.march.report.ok)
                    failures[i] = "p=" + std::to_string(c.p[i]) + ": " + r.march.report.error;
            });
            for (const auto& f : failures)
                if (!f.empty())
                    record_failure(res, f);
            record_increase(res, increase);
            res.artifacts.push_back({stem(c) + ".csv", prefine_csv(res.prefine)});
            auto arr = nlohmann::json::array();
            for (const auto& r : res.prefine)
                arr.push_back({{"p", r.p}, {"dofs", r.dofs}, {"error", std::isnan(r.error) ? nlohmann::json() : nlohmann::json(r.error)}});
            res.summary["results"] = arr;
            res.summary["h"] = c.T / N;
        }

        void run_energy(const ExperimentConfig& c, ExperimentResult& res)
        {
            const ExactSolution exact = exact_1d_gaussian(c.delta);
            const int N = c.N.front(), np = static_cast<int>(c.p.size());
            res.energy.resize(np);
            std::vector<std::string> failures(np);
            std::vector<double> increase(np, 0.0);
            parallel_for(np, c.threads, [&](int i) {
                const Run r = march_1d(c, c.p[i], N, c.T, exact);
                increase[i] = energy_increase(r.march.report);
                for (const auto& s : energy_trace(r.march.solution, c.penalty))
                    res.energy[i].push_back({s.t, s.E, s.E_h});
                if (!r.march.report.ok)
                    failures[i] = "p=" + std::to_string(c.p[i]) + ": " + r.march.report.error;
            });
            for (const auto& f : failures)
                if (!f.empty())
                    record_failure(res, f);
            record_increase(res, increase);
            auto arr = nlohmann::json::array();
            for (int i = 0; i < np; ++i)
            {
                const auto& s = res.energy[i];
                res.artifacts.push_back({with_p(stem(c), c.p[i]) + ".csv", energy_csv(s)});
                nlohmann::json e{{"p", c.p[i]}};
                if (!s.empty())
                {
                    e["E_initial"] = s.front().E;
                    e["E_final"] = s.back().E;
                    e["retained_fraction"] = s.back().E / s.front().E;
                }
                arr.push_back(e);
            }
            res.summary["results"] = arr;
            res.summary["exact_energy"] = exact_energy_gaussian(c.delta);
            res.summary["h"] = c.T / N;
        }

        // error_delta with h / delta fixed along each ladder entry: delta_k = delta / 2^k, N_k = N 2^k.
        void run_highfreq(const ExperimentConfig& c, ExperimentResult& res)
        {
            constexpr int kHalvings = 3;
            const int p = c.p.front(), nn = static_cast<int>(c.N.size());
            res.highfreq.resize(nn * kHalvings);
            std::vector<std::string> failures(nn * kHalvings);
            std::vector<double> increase(nn * kHalvings, 0.0);
            parallel_for(nn * kHalvings, c.threads, [&](int i) {
                const int k = i % kHalvings;
                const double delta = c.delta / (1 << k);
                const int N = c.N[i / kHalvings] << k;
                const ExactSolution exact = exact_1d_gaussian(delta);
                const Run r = march_1d(c, p, N, c.T, exact);
                increase[i] = energy_increase(r.march.report);
                HighfreqRow& row = res.highfreq[i];
                row.delta = delta;
                row.h = c.T / N;
                row.h_over_delta = row.h / delta;
                row.error_delta = r.march.report.ok ? error_delta(r.march.solution, exact, delta) : kNaN;
                if (!r.march.report.ok)
                    failures[i] = "N=" + std::to_string(N) + ": " + r.march.report.error;
            });
            for (const auto& f : failures)
                if (!f.empty())
                    record_failure(res, f);
            record_increase(res, increase);
            res.artifacts.push_back({with_p(stem(c), p) + ".csv", highfreq_csv(res.highfreq)});
            auto arr = nlohmann::json::array();
            for (const auto& r : res.highfreq)
                arr.push_back({{"delta", r.delta},
                               {"h", r.h},
                               {"h_over_delta", r.h_over_delta},
                               {"error_delta", std::isnan(r.error_delta) ? nlohmann::json() : nlohmann::json(r.error_delta)}});
            res.summary["results"] = arr;
        }

        void run_basis_info(const ExperimentConfig& c, ExperimentResult& res)
        {
            for (int d = 1; d <= 3; ++d)
                for (int p = 0; p <= 6; ++p)
                    res.basis.push_back(
                        {p, d, trefftz_dim(p, d), full_dim(p, d), make_trefftz_reference(p, d, 1.0)->size()});
            res.artifacts.push_back({stem(c) + ".csv", basis_info_csv(res.basis)});
            auto arr = nlohmann::json::array();
            for (const auto& r : res.basis)
                arr.push_back({{"p", r.p},
                               {"d", r.d},
                               {"trefftz_dim", r.trefftz_dim},
                               {"full_dim", r.full_dim},
                               {"generated", r.generated}});
            res.summary["results"] = arr;
        }

        // One march with the full report, its energy series and error.
        void run_solve(const ExperimentConfig& c, ExperimentResult& res)
        {
            const int p = c.p.front(), N = c.N.front();
            const bool two_d = c.dim == 2;
            const ExactSolution exact = two_d ? exact_2d_mode() : exact_1d_gaussian(c.delta);
            MarchResult m = two_d ? time_march(mesh_2d(c, N), build_time_partition(c.T, N), {c.space, p}, c.penalty,
                                               exact.initial())
                                  : march_1d(c, p, N, c.T, exact).march;
            res.energy.emplace_back();
            for (const auto& s : energy_trace(m.solution, c.penalty))
                res.energy.back().push_back({s.t, s.E, s.E_h});
            res.artifacts.push_back({with_p(stem(c), p) + "_energy.csv", energy_csv(res.energy.back())});
            record_increase(res, {energy_increase(m.report)});
            res.summary["report"] = m.report.to_json();
            res.summary["mesh"] = nlohmann::json::parse(m.solution.mesh().summary_json());
            if (m.report.ok)
            {
                res.summary["error_dg"] = error_dg(m.solution, exact, c.penalty);
                res.summary["error_final_energy"] = error_final_energy(m.solution, exact);
            }
            else
                record_failure(res, m.report.error);
            res.reports.push_back(std::move(m.report));
        }

        template <class Row, class F>
        std::string csv(const char* header, const std::vector<Row>& rows, F line)
        {
            std::string s = header;
            s += '\n';
            for (const auto& r : rows)
            {
                s += line(r);
                s += '\n';
            }
            return s;
        }
    } // namespace

    const char* to_string(ExperimentKind kind)
    {
        for (const auto& [name, k] : experiment_names())
            if (k == kind)
                return name.c_str();
        return "unknown";
    }

    ExperimentKind experiment_from_string(const std::string& name)
    {
        const auto it = experiment_names().find(name);
        if (it == experiment_names().end())
            throw ConfigError("unknown experiment: " + name);
        return it->second;
    }

    double energy_increase(const SolveReport& report)
    {
        const auto& s = report.slabs;
        if (s.empty() || !(s[0].energy_end > 0.0))
            return 0.0;
        double worst = 0.0;
        for (std::size_t n = 1; n < s.size(); ++n)
            worst = std::max(worst, (s[n].energy_end - s[n - 1].energy_end) / s[0].energy_end);
        return worst;
    }

    int elements_for_step(double h)
    {
        if (!(h > 0.0))
            throw ConfigError("mesh width must be positive");
        return std::max(1, static_cast<int>(std::lround(1.0 / h)));
    }

    ExperimentConfig ExperimentConfig::resolved() const
    {
        ExperimentConfig c = *this;
        using K = ExperimentKind;
        if (c.experiment == K::Convergence2d)
            c.dim = 2;
        if (c.dim != 1 && c.dim != 2)
            throw ConfigError("dim must be 1 or 2");
        if (c.dim == 2 && c.experiment != K::Convergence2d && c.experiment != K::Solve && c.experiment != K::BasisInfo)
            throw ConfigError(std::string(to_string(c.experiment)) + " is one-dimensional");
        if (c.experiment == K::Linear1d && !c.p.empty() && c.p != std::vector<int>{1})
            throw ConfigError("linear-1d runs p = 1 only");
        if (c.p.empty())
        {
            switch (c.experiment)
            {
            case K::Convergence1d: c.p = {2, 3, 4, 5}; break;
            case K::Linear1d: c.p = {1}; break;
            case K::PRefine1d: c.p = {1, 2, 3, 4, 5}; break;
            case K::Energy1d: c.p = {1, 2, 3, 4}; break;
            case K::Highfreq1d: c.p = {4}; break;
            case K::Convergence2d: c.p = {2, 4}; break;
            case K::Solve:
            case K::BasisInfo: c.p = {2}; break;
            }
        }

        if (c.T <= 0.0)
        {
            switch (c.experiment)
            {
            case K::Energy1d: c.T = 5.0; break;
            case K::Highfreq1d:
            case K::Convergence2d: c.T = 1.0; break;
            case K::Solve: c.T = c.dim == 2 ? 1.0 : 0.25; break;
            default: c.T = 0.25; break;
            }
        }
        if (c.delta <= 0.0)
            c.delta = c.experiment == K::Energy1d ? kDelta0 / 4 : kDelta0;

        if (c.N.empty())
        {
            switch (c.experiment)
            {
            case K::Convergence1d: c.N = {5, 10, 20, 40, 80, 160}; break;
            case K::Linear1d: c.N = {80, 160, 320, 640, 1280, 2560, 5120}; break;
            case K::PRefine1d: c.N = {static_cast<int>(std::lround(c.T * 40))}; break;
            case K::Energy1d: c.N = {static_cast<int>(std::lround(c.T * 320))}; break;
            case K::Highfreq1d: c.N = {10, 20, 40}; break;
            case K::Convergence2d: c.N = {10, 20, 40}; break;
            case K::Solve: c.N = {c.dim == 2 ? 10 : 40}; break;
            case K::BasisInfo: break;
            }
        }

        if (c.experiment == K::BasisInfo)
            return c;
        for (std::size_t i = 0; i < c.N.size(); ++i)
        {
            if (c.N[i] < 1)
                throw ConfigError("N must be positive");
            if (i > 0 && c.N[i] <= c.N[i - 1])
                throw ConfigError("N list must be strictly increasing");
        }
        for (int p : c.p)
            if (p < 1 || p > 8)
                throw ConfigError("p must lie in 1..8");
        if (!(c.penalty.C_sigma0 > 0.0))
            throw ConfigError("C_sigma0 must be positive");
        if (c.dim == 1 && c.delta > kDelta0)
            throw ConfigError("delta must not exceed 7.5e-2");
        if (!c.mesh_file.empty() && c.dim != 2)
            throw ConfigError("--mesh applies to 2D runs only");
        if (!c.mesh_file.empty() && c.N.size() > 1)
            throw ConfigError("a mesh file fixes the spatial resolution; give a single N");
        if (!c.mesh_file.empty() && !std::filesystem::exists(c.mesh_file))
            throw ConfigError("mesh file not found: " + c.mesh_file);
        return c;
    }

    nlohmann::json ExperimentConfig::to_json() const
    {
        return {{"experiment", to_string(experiment)},
                {"space", to_string(space)},
                {"dim", dim},
                {"p", p},
                {"N", N},
                {"T", T},
                {"delta", delta},
                {"C_sigma0", penalty.C_sigma0},
                {"sigma1", penalty.sigma1_enabled},
                {"sigma2", penalty.sigma2_enabled},
                {"mesh", mesh_file},
                {"seed", seed},
                {"assembly_quadrature_degree", "2p+2"},
                {"error_quadrature_degree", "2p+6"},
                {"exact_solution_images", "adaptive, |x - x_image| <= 38 delta"},
                {"solver", "eigen-sparselu"}};
    }

    void ExperimentConfig::merge_json(const nlohmann::json& j)
    {
        try
        {
            if (j.contains("experiment"))
                experiment = experiment_from_string(j.at("experiment").get<std::string>());
            if (j.contains("space"))
                space = space_kind_from_string(j.at("space").get<std::string>());
            if (j.contains("dim"))
                dim = j.at("dim").get<int>();
            if (j.contains("p"))
                p = j.at("p").is_array() ? j.at("p").get<std::vector<int>>() : std::vector<int>{j.at("p").get<int>()};
            if (j.contains("N"))
                N = j.at("N").is_array() ? j.at("N").get<std::vector<int>>() : std::vector<int>{j.at("N").get<int>()};
            if (j.contains("T"))
                T = j.at("T").get<double>();
            if (j.contains("delta"))
                delta = j.at("delta").get<double>();
            if (j.contains("C_sigma0"))
                penalty.C_sigma0 = j.at("C_sigma0").get<double>();
            if (j.contains("sigma1"))
                penalty.sigma1_enabled = j.at("sigma1").get<bool>();
            if (j.contains("sigma2"))
                penalty.sigma2_enabled = j.at("sigma2").get<bool>();
            if (j.contains("mesh"))
                mesh_file = j.at("mesh").get<std::string>();
            if (j.contains("out"))
                out_dir = j.at("out").get<std::string>();
            if (j.contains("seed"))
                seed = j.at("seed").get<unsigned>();
            if (j.contains("threads"))
                threads = j.at("threads").get<int>();
        }
        catch (const nlohmann::json::exception& e)
        {
            throw ConfigError(std::string("config: ") + e.what());
        }
        catch (const std::invalid_argument& e)
        {
            throw ConfigError(e.what());
        }
    }

    ExperimentResult run_experiment(const ExperimentConfig& raw)
    {
        const ExperimentConfig c = raw.resolved();
        const auto t0 = std::chrono::steady_clock::now();
        ExperimentResult res;
        switch (c.experiment)
        {
        case ExperimentKind::Convergence1d:
        case ExperimentKind::Linear1d:
        case ExperimentKind::Convergence2d: run_convergence(c, res); break;
        case ExperimentKind::PRefine1d: run_prefine(c, res); break;
        case ExperimentKind::Energy1d: run_energy(c, res); break;
        case ExperimentKind::Highfreq1d: run_highfreq(c, res); break;
        case ExperimentKind::BasisInfo: run_basis_info(c, res); break;
        case ExperimentKind::Solve: run_solve(c, res); break;
        }
        res.summary["config"] = c.to_json();
        res.summary["ok"] = res.ok;
        if (!res.ok)
        {
            res.summary["error"] = res.error;
            res.summary["partial"] = true;
        }
        res.summary["seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return res;
    }

    void write_artifacts(const ExperimentConfig& raw, const ExperimentResult& result)
    {
        const ExperimentConfig c = raw.resolved();
        if (c.out_dir.empty())
            return;
        namespace fs = std::filesystem;
        fs::create_directories(c.out_dir);
        auto put = [&](const std::string& name, const std::string& content) {
            std::ofstream out(fs::path(c.out_dir) / name, std::ios::binary);
            if (!out)
                throw std::runtime_error("cannot write " + name);
            out << content;
        };
        for (const auto& a : result.artifacts)
            put(a.name, a.content);
        put(stem(c) + ".json", result.summary.dump(2) + "\n");
    }

    std::string convergence_csv(const std::vector<ConvergenceRow>& rows)
    {
        return csv("N,h,dofs,error,order", rows, [](const ConvergenceRow& r) {
            return std::to_string(r.N) + "," + fmt(r.h) + "," + std::to_string(r.dofs) + "," + fmt(r.error) + "," +
                   fmt(r.order);
        });
    }

    std::string energy_csv(const std::vector<EnergyRow>& rows)
    {
        return csv("t,E,E_h", rows,
                   [](const EnergyRow& r) { return fmt(r.t) + "," + fmt(r.E) + "," + fmt(r.E_h); });
    }

    std::string highfreq_csv(const std::vector<HighfreqRow>& rows)
    {
        return csv("delta,h,h_over_delta,error_delta", rows, [](const HighfreqRow& r) {
            return fmt(r.delta) + "," + fmt(r.h) + "," + fmt(r.h_over_delta) + "," + fmt(r.error_delta);
        });
    }

    std::string prefine_csv(const std::vector<PRefineRow>& rows)
    {
        return csv("p,dofs,error", rows, [](const PRefineRow& r) {
            return std::to_string(r.p) + "," + std::to_string(r.dofs) + "," + fmt(r.error);
        });
    }

    std::string basis_info_csv(const std::vector<BasisInfoRow>& rows)
    {
        return csv("p,d,trefftz_dim,full_dim,generated", rows, [](const BasisInfoRow& r) {
            return std::to_string(r.p) + "," + std::to_string(r.d) + "," + std::to_string(r.trefftz_dim) + "," +
                   std::to_string(r.full_dim) + "," + std::to_string(r.generated);
        });
    }
} // namespace stdg
