#include "stdg/solver.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace stdg
{
    namespace
    {
        using Clock = std::chrono::steady_clock;

        double seconds_since(Clock::time_point t0)
        {
            return std::chrono::duration<double>(Clock::now() - t0).count();
        }
    } // namespace

    struct SlabSolver::Impl
    {
        SparseMatrix A;
        Eigen::VectorXd scale;  // symmetric diagonal equilibration
        SparseMatrix As;
        mutable Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;

        Eigen::VectorXd inv(const Eigen::VectorXd& b) const
        {
            return scale.cwiseProduct(lu.solve(Eigen::VectorXd(scale.cwiseProduct(b))));
        }
        Eigen::VectorXd inv_transpose(const Eigen::VectorXd& b) const
        {
            return scale.cwiseProduct(lu.transpose().solve(Eigen::VectorXd(scale.cwiseProduct(b))));
        }
    };

    SlabSolver::SlabSolver(const SparseMatrix& A) : impl_(std::make_unique<Impl>())
    {
        if (A.rows() != A.cols())
            throw std::invalid_argument("SlabSolver: matrix must be square");
        impl_->A = A;
        impl_->A.makeCompressed();
        const int n = static_cast<int>(A.rows());
        if (n == 0)
            return;
        // Penalty and trace terms scale very differently with h, tau and p.
        impl_->scale = Eigen::VectorXd::Ones(n);
        for (int j = 0; j < n; ++j)
        {
            const double d = std::abs(impl_->A.coeff(j, j));
            if (d > 0.0)
                impl_->scale[j] = 1.0 / std::sqrt(d);
        }
        impl_->As = impl_->scale.asDiagonal() * impl_->A * impl_->scale.asDiagonal();
        impl_->As.makeCompressed();
        impl_->lu.compute(impl_->As);
        if (impl_->lu.info() != Eigen::Success)
            throw SolveError(-1, "sparse LU failed: " + impl_->lu.lastErrorMessage());

        // Hager's 1-norm estimate of the inverse, times the exact 1-norm of A.
        double norm1 = 0.0;
        for (int j = 0; j < n; ++j)
            norm1 = std::max(norm1, impl_->A.col(j).cwiseAbs().sum());
        Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / n);
        double est = 0.0;
        for (int it = 0; it < 5; ++it)
        {
            const Eigen::VectorXd y = impl_->inv(x);
            est = y.lpNorm<1>();
            const Eigen::VectorXd xi = y.unaryExpr([](double v) { return v >= 0.0 ? 1.0 : -1.0; });
            const Eigen::VectorXd z = impl_->inv_transpose(xi);
            Eigen::Index j = 0;
            const double zmax = z.cwiseAbs().maxCoeff(&j);
            if (zmax <= z.dot(x))
                break;
            x.setZero();
            x[j] = 1.0;
        }
        condition_ = std::isfinite(est) ? norm1 * est : std::numeric_limits<double>::infinity();
    }

    SlabSolver::~SlabSolver() = default;

    const char* SlabSolver::backend() const { return "eigen-sparselu"; }

    Eigen::VectorXd SlabSolver::solve(const Eigen::VectorXd& rhs, double* residual) const
    {
        if (rhs.size() != impl_->A.rows())
            throw std::invalid_argument("SlabSolver::solve: rhs has wrong length");
        const double bnorm = rhs.norm();
        if (bnorm == 0.0)
        {
            if (residual)
                *residual = 0.0;
            return Eigen::VectorXd::Zero(rhs.size());
        }
        Eigen::VectorXd x = impl_->inv(rhs);
        double r = (impl_->A * x - rhs).norm() / bnorm;
        if (std::isfinite(r) && r > 1e-14)
        {
            // one step of iterative refinement
            x -= impl_->inv(impl_->A * x - rhs);
            r = (impl_->A * x - rhs).norm() / bnorm;
        }
        if (residual)
            *residual = r;
        if (!(r < kResidualGate))
            throw SolveError(-1, "relative residual " + std::to_string(r) + " above the acceptance gate");
        return x;
    }

    Eigen::VectorXd solve_slab(const SparseMatrix& A, const Eigen::VectorXd& rhs, int slab)
    {
        try
        {
            return SlabSolver(A).solve(rhs);
        }
        catch (const SolveError& e)
        {
            throw SolveError(slab, "slab " + std::to_string(slab) + ": " + e.what());
        }
    }

    DiscreteSolution::DiscreteSolution(std::shared_ptr<const SpatialMesh> mesh, TimePartition partition)
        : mesh_(std::move(mesh)), partition_(std::move(partition))
    {
    }

    void DiscreteSolution::append(SlabSpace space, Eigen::VectorXd coeffs)
    {
        if (n_solved() >= partition_.n_slabs())
            throw std::logic_error("DiscreteSolution: all slabs already filled");
        if (coeffs.size() != space.n_dofs())
            throw std::invalid_argument("DiscreteSolution: coefficient vector has wrong length");
        spaces_.push_back(std::move(space));
        coeffs_.push_back(std::move(coeffs));
    }

    std::unique_ptr<SlabFunction> DiscreteSolution::on_slab(int slab) const
    {
        const Eigen::VectorXd& c = coeffs_.at(slab);
        return std::make_unique<DiscreteSlabFunction>(spaces_[slab], std::span<const double>(c.data(), c.size()));
    }

    FieldValue DiscreteSolution::eval(const Point& x, double t, Side side) const
    {
        const auto& k = partition_.knots();
        const double eps = 1e-13 * std::max(1.0, std::abs(k.back()));
        if (t < k.front() - eps || t > k.back() + eps)
            throw std::invalid_argument("eval_solution: time outside [0, T]");
        const int N = partition_.n_slabs();
        int n = static_cast<int>(std::upper_bound(k.begin(), k.end(), t) - k.begin()) - 1;
        n = std::clamp(n, 0, N - 1);
        // Knot hits: the side decides which slab's trace is returned.
        for (int m = std::max(0, n - 1); m <= std::min(N, n + 1); ++m)
            if (std::abs(t - k[m]) <= eps)
                n = side == Side::Left ? std::max(0, m - 1) : std::min(N - 1, m);
        if (n >= n_solved())
            throw std::invalid_argument("eval_solution: slab not solved");
        const int e = mesh_->locate(x);
        if (e < 0)
            throw std::invalid_argument("eval_solution: point outside the domain");
        const Eigen::VectorXd& c = coeffs_[n];
        return spaces_[n].evaluate(e, std::span<const double>(c.data(), c.size()), x, t);
    }

    FieldValue eval_solution(const DiscreteSolution& sol, const Point& x, double t, Side side)
    {
        return sol.eval(x, t, side);
    }

    nlohmann::json SolveReport::to_json() const
    {
        nlohmann::json j;
        j["ok"] = ok;
        if (!ok)
        {
            j["error"] = error;
            j["failed_slab"] = failed_slab;
        }
        j["backend"] = backend;
        j["form"] = form;
        j["dofs_per_slab"] = dofs_per_slab;
        j["energy_initial"] = energy_initial;
        j["assembly_seconds"] = assembly_seconds;
        j["total_seconds"] = total_seconds;
        auto& arr = j["slabs"] = nlohmann::json::array();
        for (const auto& s : slabs)
            arr.push_back({{"slab", s.slab},
                           {"factorized", s.factorized},
                           {"residual", s.residual},
                           {"energy_start", s.energy_start},
                           {"energy_end", s.energy_end},
                           {"physical_end", s.physical_end},
                           {"condition", s.condition},
                           {"seconds", s.seconds}});
        return j;
    }

    MarchResult time_march(std::shared_ptr<const SpatialMesh> mesh, const TimePartition& partition, SpaceConfig sc,
                           const PenaltyConfig& cfg, const InitialData& init, const MarchOptions& opts)
    {
        const auto t_begin = Clock::now();
        if (!mesh)
            throw std::invalid_argument("time_march: null mesh");
        if (sc.p < 1)
            throw std::invalid_argument("time_march: need p >= 1");
        if (!(cfg.C_sigma0 > 0.0))
            throw std::invalid_argument("time_march: C_sigma0 must be positive");

        MarchResult res{DiscreteSolution(mesh, partition), {}};
        SolveReport& rep = res.report;
        FormChoice form = opts.form;
        if (form == FormChoice::Auto)
            form = sc.kind == SpaceKind::Trefftz ? FormChoice::Skeleton : FormChoice::Volume;
        rep.form = form == FormChoice::Skeleton ? "skeleton" : "volume";
        rep.backend = "eigen-sparselu";

        const int qdeg = opts.quad_degree < 0 ? assembly_degree(sc.p) : opts.quad_degree;
        const auto quad = std::make_shared<const SliceQuadrature>(*mesh, qdeg);

        std::shared_ptr<const SpaceLayout> layout;
        std::unique_ptr<SliceTables> tables;
        SparseMatrix A;
        std::unique_ptr<SlabSolver> solver;
        TraceData previous;

        for (int n = 0; n < partition.n_slabs(); ++n)
        {
            const auto t_slab = Clock::now();
            const double tau = partition.tau(n);
            SlabReport sr;
            sr.slab = n;
            try
            {
                const bool new_layout = !layout || std::abs(tau - layout->tau()) > 1e-12 * tau;
                if (new_layout)
                {
                    layout = std::make_shared<const SpaceLayout>(mesh, sc, tau);
                    tables = std::make_unique<SliceTables>(layout, quad);
                }
                const SlabSpace space(layout, partition.t(n), partition.t(n + 1));
                if (new_layout || !opts.reuse_factorization)
                {
                    const auto t_asm = Clock::now();
                    A = form == FormChoice::Skeleton ? assemble_an_skeleton(space, cfg, qdeg)
                                                     : assemble_an(space, cfg, qdeg);
                    rep.assembly_seconds += seconds_since(t_asm);
                    solver = std::make_unique<SlabSolver>(A);
                    sr.factorized = true;
                }
                sr.condition = solver->condition_estimate();
                rep.dofs_per_slab = space.n_dofs();

                if (n == 0)
                {
                    const SmoothField field([&init](const Point& x, double) { return init(x); });
                    previous = trace_data(*field.on_slab(0), *mesh, *quad, partition.t(0));
                }
                const Eigen::VectorXd rhs = tables->rhs(previous, cfg);
                Eigen::VectorXd c = solver->solve(rhs, &sr.residual);

                const std::span<const double> cs(c.data(), c.size());
                const TraceData start = tables->trace(cs, 0);
                previous = tables->trace(cs, 1);
                sr.energy_start = energy_from_trace(start, *mesh, *quad, sc.p, cfg);
                sr.energy_end = energy_from_trace(previous, *mesh, *quad, sc.p, cfg);
                sr.physical_end = physical_energy_from_trace(previous, *mesh, *quad);
                if (n == 0)
                    rep.energy_initial = sr.energy_start;
                res.solution.append(space, std::move(c));
            }
            catch (const SolveError& e)
            {
                rep.ok = false;
                rep.failed_slab = n;
                rep.error = "slab " + std::to_string(n) + ": " + e.what();
                break;
            }
            sr.seconds = seconds_since(t_slab);
            rep.slabs.push_back(sr);
        }
        rep.total_seconds = seconds_since(t_begin);
        return res;
    }
} // namespace stdg
