#ifndef STDG_EXPERIMENTS_HPP
#define STDG_EXPERIMENTS_HPP

#include "stdg/analysis.hpp"

#include <json.hpp>

#include <stdexcept>
#include <string>
#include <vector>

namespace stdg
{
    enum class ExperimentKind
    {
        Convergence1d,
        Linear1d,
        PRefine1d,
        Energy1d,
        Highfreq1d,
        Convergence2d,
        BasisInfo,
        Solve
    };

    const char* to_string(ExperimentKind kind);
    ExperimentKind experiment_from_string(const std::string& name);

    /// Rejected configuration; reported before any solve.
    class ConfigError : public std::invalid_argument
    {
    public:
        using std::invalid_argument::invalid_argument;
    };

    /// Penalty constant used by the experiment runner. The stability bound for d = 1 asks for
    /// C_sigma0 >= 2 (p + 1) / p, which 3 satisfies for every p >= 2.
    inline constexpr double kExperimentCsigma0 = 3.0;

    struct ExperimentConfig
    {
        ExperimentKind experiment = ExperimentKind::Convergence1d;
        SpaceKind space = SpaceKind::Trefftz;
        int dim = 1;
        std::vector<int> p;             // empty: the experiment's default degrees
        std::vector<int> N;             // empty: the experiment's default ladder
        double T = 0.0;                 // <= 0: the experiment's default
        double delta = 0.0;             // <= 0: the experiment's default
        PenaltyConfig penalty{kExperimentCsigma0, true, true};
        std::string mesh_file;          // 2D only; replaces the structured unit-square mesh
        std::string out_dir;            // empty: nothing written
        unsigned seed = 0;              // reserved; nothing in the pipeline is random
        int threads = 0;                // 0: hardware concurrency

        /// Fills experiment defaults, then validates. Throws ConfigError.
        ExperimentConfig resolved() const;

        nlohmann::json to_json() const;
        /// Missing keys keep their current values.
        void merge_json(const nlohmann::json& j);
    };

    struct ConvergenceRow
    {
        int N = 0;
        double h = 0.0;
        int dofs = 0;        // per slab
        double error = 0.0;  // NaN if the run failed
        double order = 0.0;  // against the previous row; NaN on the first
        double seconds = 0.0;
    };

    struct EnergyRow
    {
        double t = 0.0;
        double E = 0.0;
        double E_h = 0.0;
    };

    struct HighfreqRow
    {
        double delta = 0.0;
        double h = 0.0;
        double h_over_delta = 0.0;
        double error_delta = 0.0;
    };

    struct PRefineRow
    {
        int p = 0;
        int dofs = 0;
        double error = 0.0;
    };

    struct BasisInfoRow
    {
        int p = 0;
        int d = 0;
        int trefftz_dim = 0;
        int full_dim = 0;
        int generated = 0;
    };

    /// One CSV table of the run, already formatted.
    struct Artifact
    {
        std::string name;     // file name inside the output directory
        std::string content;
    };

    struct ExperimentResult
    {
        bool ok = true;
        std::string error;
        std::vector<ConvergenceRow> convergence;       // per p, concatenated in p order
        std::vector<std::vector<EnergyRow>> energy;    // one series per p
        std::vector<HighfreqRow> highfreq;
        std::vector<PRefineRow> prefine;
        std::vector<BasisInfoRow> basis;
        std::vector<SolveReport> reports;              // solve verb only
        std::vector<Artifact> artifacts;
        nlohmann::json summary;
        /// Largest E_h(t_{n+1}^-) - E_h(t_n^-), n >= 1, over all marches, relative to E_h(t_1^-).
        double max_energy_increase = 0.0;
    };

    /// The dissipation defect of one march (see ExperimentResult::max_energy_increase).
    double energy_increase(const SolveReport& report);

    /// Runs the experiment; independent (p, N) runs execute concurrently. Throws ConfigError.
    ExperimentResult run_experiment(const ExperimentConfig& cfg);

    /// Writes the CSV artifacts and `<stem>.json` into cfg.out_dir.
    void write_artifacts(const ExperimentConfig& cfg, const ExperimentResult& result);

    std::string convergence_csv(const std::vector<ConvergenceRow>& rows);
    std::string energy_csv(const std::vector<EnergyRow>& rows);
    std::string highfreq_csv(const std::vector<HighfreqRow>& rows);
    std::string prefine_csv(const std::vector<PRefineRow>& rows);
    std::string basis_info_csv(const std::vector<BasisInfoRow>& rows);

    /// Element count and step for the 1D ladders: h = tau = T / N on round(1/h) intervals.
    int elements_for_step(double h);
} // namespace stdg

#endif
