#ifndef STDG_SOLVER_HPP
#define STDG_SOLVER_HPP

#include "stdg/forms.hpp"

#include <json.hpp>

#include <memory>
#include <stdexcept>
#include <string>

namespace stdg
{
    /// Slab solve failure; `slab` is -1 when no slab context applies.
    class SolveError : public std::runtime_error
    {
    public:
        SolveError(int slab, const std::string& what) : std::runtime_error(what), slab_(slab) {}
        int slab() const { return slab_; }

    private:
        int slab_;
    };

    /// Relative residual accepted for a slab solve.
    inline constexpr double kResidualGate = 1e-8;

    /// @brief Pivoted sparse LU of one slab matrix, reusable for many right-hand sides.
    class SlabSolver
    {
    public:
        explicit SlabSolver(const SparseMatrix& A);
        ~SlabSolver();
        SlabSolver(const SlabSolver&) = delete;
        SlabSolver& operator=(const SlabSolver&) = delete;

        /// Throws SolveError if the relative residual exceeds the gate.
        Eigen::VectorXd solve(const Eigen::VectorXd& rhs, double* residual = nullptr) const;
        /// Estimate of the 1-norm condition number (infinite if unavailable).
        double condition_estimate() const { return condition_; }
        const char* backend() const;

    private:
        struct Impl;
        std::unique_ptr<Impl> impl_;
        double condition_ = 0.0;
    };

    /// One-shot factorize-and-solve.
    Eigen::VectorXd solve_slab(const SparseMatrix& A, const Eigen::VectorXd& rhs, int slab = -1);

    enum class Side
    {
        Left,  // t_n^-
        Right  // t_n^+
    };

    /// @brief Per-slab coefficient vectors with their spaces; evaluable anywhere in Omega x [0, T].
    class DiscreteSolution : public SpaceTimeField
    {
    public:
        DiscreteSolution(std::shared_ptr<const SpatialMesh> mesh, TimePartition partition);

        void append(SlabSpace space, Eigen::VectorXd coeffs);

        const SpatialMesh& mesh() const { return *mesh_; }
        const std::shared_ptr<const SpatialMesh>& mesh_ptr() const { return mesh_; }
        const TimePartition& partition() const { return partition_; }
        /// Number of slabs solved so far (less than partition().n_slabs() after a failure).
        int n_solved() const { return static_cast<int>(coeffs_.size()); }
        int degree() const { return spaces_.empty() ? 0 : spaces_.front().degree(); }
        const SlabSpace& space(int n) const { return spaces_.at(n); }
        const Eigen::VectorXd& coeffs(int n) const { return coeffs_.at(n); }

        std::unique_ptr<SlabFunction> on_slab(int slab) const override;

        /// Value, time derivative and gradient at (x, t); `side` selects the slab at a knot.
        FieldValue eval(const Point& x, double t, Side side = Side::Left) const;

    private:
        std::shared_ptr<const SpatialMesh> mesh_;
        TimePartition partition_;
        std::vector<SlabSpace> spaces_;
        std::vector<Eigen::VectorXd> coeffs_;
    };

    FieldValue eval_solution(const DiscreteSolution& sol, const Point& x, double t, Side side = Side::Left);

    struct SlabReport
    {
        int slab = 0;
        bool factorized = false;      // a new factorization was computed for this slab
        double residual = 0.0;
        double energy_start = 0.0;    // E_h(t_n^+)
        double energy_end = 0.0;      // E_h(t_{n+1}^-)
        double physical_end = 0.0;    // 1/2|ut|^2 + 1/2 a|grad|^2 at t_{n+1}^-
        double condition = 0.0;
        double seconds = 0.0;
    };

    struct SolveReport
    {
        bool ok = true;
        std::string error;
        int failed_slab = -1;
        std::string backend;
        std::string form;             // "volume" or "skeleton"
        int dofs_per_slab = 0;
        double energy_initial = 0.0;  // E_h(t_0^+)
        double assembly_seconds = 0.0;
        double total_seconds = 0.0;
        std::vector<SlabReport> slabs;

        nlohmann::json to_json() const;
    };

    enum class FormChoice
    {
        Auto,     // skeleton for Trefftz spaces, volume otherwise
        Volume,
        Skeleton
    };

    struct MarchOptions
    {
        FormChoice form = FormChoice::Auto;
        bool reuse_factorization = true;
        int quad_degree = -1;         // assembly degree; -1 selects 2p + 2
    };

    struct MarchResult
    {
        DiscreteSolution solution;
        SolveReport report;
    };

    /// Slab-by-slab time stepping. A failing slab stops the march; the slabs solved
    /// before it are kept and the report carries the error.
    MarchResult time_march(std::shared_ptr<const SpatialMesh> mesh, const TimePartition& partition, SpaceConfig space,
                           const PenaltyConfig& cfg, const InitialData& init, const MarchOptions& opts = {});
} // namespace stdg

#endif
