// Command-line runner for the space-time dG experiments.
#include "stdg/experiments.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace
{
    constexpr int kExitConfig = 2;
    constexpr int kExitSolver = 3;

    std::vector<int> parse_list(const std::string& s)
    {
        std::vector<int> out;
        std::stringstream ss(s);
        std::string item;
        while (std::getline(ss, item, ','))
        {
            std::size_t used = 0;
            int v = 0;
            try
            {
                v = std::stoi(item, &used);
            }
            catch (const std::exception&)
            {
                throw stdg::ConfigError("not an integer list: " + s);
            }
            if (used != item.size())
                throw stdg::ConfigError("not an integer list: " + s);
            out.push_back(v);
        }
        if (out.empty())
            throw stdg::ConfigError("empty list");
        return out;
    }

    struct Flags
    {
        std::string space, p, N, mesh, out, config;
        double T = 0.0, delta = 0.0, csigma0 = 0.0;
        bool no_sigma1 = false, no_sigma2 = false;
        int dim = 0, threads = -1;
    };

    void add_common(CLI::App* cmd, Flags& f)
    {
        cmd->add_option("--space", f.space, "trefftz or full")->check(CLI::IsMember({"trefftz", "full"}));
        cmd->add_option("--p", f.p, "polynomial degree(s), comma separated");
        cmd->add_option("--N", f.N, "time steps, comma separated and increasing");
        cmd->add_option("--T", f.T, "final time");
        cmd->add_option("--delta", f.delta, "Gaussian width");
        cmd->add_option("--csigma0", f.csigma0, "penalty constant C_sigma0");
        cmd->add_flag("--no-sigma1", f.no_sigma1, "drop the sigma1 face-time penalty");
        cmd->add_flag("--no-sigma2", f.no_sigma2, "drop the sigma2 face-time penalty");
        cmd->add_option("--dim", f.dim, "spatial dimension (1 or 2)");
        cmd->add_option("--out", f.out, "output directory");
        cmd->add_option("--config", f.config, "JSON config; flags override it");
        cmd->add_option("--mesh", f.mesh, "2D mesh file ('v x y' / 'e i j k' lines)");
        cmd->add_option("--threads", f.threads, "worker threads (0: all cores)");
    }

    stdg::ExperimentConfig make_config(stdg::ExperimentKind kind, const Flags& f)
    {
        stdg::ExperimentConfig c;
        c.experiment = kind;
        if (!f.config.empty())
        {
            std::ifstream in(f.config);
            if (!in)
                throw stdg::ConfigError("cannot read config file " + f.config);
            nlohmann::json j;
            try
            {
                in >> j;
            }
            catch (const nlohmann::json::exception& e)
            {
                throw stdg::ConfigError(std::string("config file: ") + e.what());
            }
            c.merge_json(j);
        }
        if (!f.space.empty())
            c.space = stdg::space_kind_from_string(f.space);
        if (!f.p.empty())
            c.p = parse_list(f.p);
        if (!f.N.empty())
            c.N = parse_list(f.N);
        if (f.T != 0.0)
            c.T = f.T;
        if (f.delta != 0.0)
            c.delta = f.delta;
        if (f.csigma0 != 0.0)
            c.penalty.C_sigma0 = f.csigma0;
        if (f.no_sigma1)
            c.penalty.sigma1_enabled = false;
        if (f.no_sigma2)
            c.penalty.sigma2_enabled = false;
        if (f.dim != 0)
            c.dim = f.dim;
        if (!f.mesh.empty())
            c.mesh_file = f.mesh;
        if (!f.out.empty())
            c.out_dir = f.out;
        if (f.threads >= 0)
            c.threads = f.threads;
        // The convergence verb covers the 1D ladders (linear-1d for p = 1) and the 2D one.
        if (c.experiment == stdg::ExperimentKind::Convergence1d)
        {
            if (c.dim == 2)
                c.experiment = stdg::ExperimentKind::Convergence2d;
            else if (c.p == std::vector<int>{1})
                c.experiment = stdg::ExperimentKind::Linear1d;
        }
        return c;
    }

    void print_result(const stdg::ExperimentResult& r)
    {
        using stdg::ExperimentKind;
        const auto& cfg = r.summary["config"];
        std::printf("%s (%s)\n", cfg["experiment"].get<std::string>().c_str(), cfg["space"].get<std::string>().c_str());
        if (!r.convergence.empty())
        {
            std::printf("%8s %12s %8s %14s %8s\n", "N", "h", "dofs", "error", "order");
            for (const auto& row : r.convergence)
                std::printf("%8d %12.5e %8d %14.6e %8.3f\n", row.N, row.h, row.dofs, row.error, row.order);
        }
        for (const auto& row : r.prefine)
            std::printf("p=%d dofs=%d error=%.6e\n", row.p, row.dofs, row.error);
        for (const auto& row : r.highfreq)
            std::printf("delta=%.5e h=%.5e h/delta=%.4f error_delta=%.6e\n", row.delta, row.h, row.h_over_delta,
                        row.error_delta);
        if (cfg["experiment"] == "energy-1d")
            for (const auto& e : r.summary["results"])
                if (e.contains("retained_fraction"))
                    std::printf("p=%d E(0)=%.8f E(T)=%.8f retained=%.6f\n", e["p"].get<int>(), e["E_initial"].get<double>(),
                                e["E_final"].get<double>(), e["retained_fraction"].get<double>());
        for (const auto& row : r.basis)
            std::printf("p=%d d=%d trefftz=%d full=%d generated=%d\n", row.p, row.d, row.trefftz_dim, row.full_dim,
                        row.generated);
        if (r.summary.contains("error_dg"))
            std::printf("error_dg=%.6e error_final_energy=%.6e\n", r.summary["error_dg"].get<double>(),
                        r.summary["error_final_energy"].get<double>());
        if (!r.ok)
            std::printf("FAILED: %s\n", r.error.c_str());
    }
} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Space-time interior-penalty dG for the wave equation"};
    app.require_subcommand(1);

    Flags flags;
    const std::vector<std::pair<std::string, stdg::ExperimentKind>> verbs{
        {"solve", stdg::ExperimentKind::Solve},
        {"convergence", stdg::ExperimentKind::Convergence1d},
        {"energy", stdg::ExperimentKind::Energy1d},
        {"highfreq", stdg::ExperimentKind::Highfreq1d},
        {"p-refine", stdg::ExperimentKind::PRefine1d},
        {"basis-info", stdg::ExperimentKind::BasisInfo}};
    std::vector<CLI::App*> cmds;
    for (const auto& [name, kind] : verbs)
    {
        auto* cmd = app.add_subcommand(name, std::string("run the ") + stdg::to_string(kind) + " experiment");
        add_common(cmd, flags);
        cmds.push_back(cmd);
    }

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp& e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError& e)
    {
        app.exit(e);
        return kExitConfig;
    }

    stdg::ExperimentKind kind = stdg::ExperimentKind::Solve;
    for (std::size_t i = 0; i < cmds.size(); ++i)
        if (cmds[i]->parsed())
            kind = verbs[i].second;

    try
    {
        const stdg::ExperimentConfig cfg = make_config(kind, flags);
        const stdg::ExperimentResult result = stdg::run_experiment(cfg);
        stdg::write_artifacts(cfg, result);
        print_result(result);
        return result.ok ? 0 : kExitSolver;
    }
    catch (const stdg::ConfigError& e)
    {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    }
    catch (const stdg::SolveError& e)
    {
        std::fprintf(stderr, "solver failure: %s\n", e.what());
        return kExitSolver;
    }
    catch (const std::invalid_argument& e)
    {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    }
}
