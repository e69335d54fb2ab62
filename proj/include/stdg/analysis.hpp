#ifndef STDG_ANALYSIS_HPP
#define STDG_ANALYSIS_HPP

#include "stdg/solver.hpp"

#include <string>
#include <vector>

namespace stdg
{
    /// Width of the reference Gaussian pulse; smaller widths are allowed, larger ones are not.
    inline constexpr double kDelta0 = 7.5e-2;

    /// @brief Closed-form solution of the wave equation on the unit interval or square.
    struct ExactSolution
    {
        std::string tag;
        int dim = 1;
        SmoothField::Evaluator eval;

        FieldValue operator()(const Point& x, double t) const { return eval(x, t); }
        SmoothField field() const { return SmoothField(eval); }
        /// Its data at t = 0 in the form the time marcher takes.
        InitialData initial() const;
    };

    /// Gaussian pulse exp(-((x - 5/8)/delta)^2) at rest, reflected with u = 0 at x = 0 and 1.
    /// `a` is the (constant) coefficient; the wave speed is sqrt(a).
    ExactSolution exact_1d_gaussian(double delta, double a = 1.0);

    /// Energy of the Gaussian pulse: sqrt(pi) / (2 sqrt(2) delta).
    double exact_energy_gaussian(double delta);

    /// cos(sqrt(2) pi t) sin(pi x) sin(pi y) on the unit square, a = 1.
    ExactSolution exact_2d_mode();

    /// Default degree for error integrals against non-polynomial solutions.
    inline int error_degree(int p) { return 2 * p + 6; }

    /// |||u - u_h||| in the dG norm.
    double error_dg(const DiscreteSolution& sol, const ExactSolution& exact, const PenaltyConfig& cfg,
                    int quad_degree = -1);

    /// (1/2 |u_t - u_h,t|^2 + 1/2 |sqrt(a) grad(u - u_h)|^2)^{1/2} at T^-.
    double error_final_energy(const DiscreteSolution& sol, const ExactSolution& exact, int quad_degree = -1);

    /// sqrt(delta) times the final-time energy error.
    double error_delta(const DiscreteSolution& sol, const ExactSolution& exact, double delta, int quad_degree = -1);

    struct EnergySample
    {
        double t = 0.0;
        double E = 0.0;    // physical energy
        double E_h = 0.0;  // discrete energy
    };

    /// Energies at t_0^+ and then at every t_n^-, n = 1..N.
    std::vector<EnergySample> energy_trace(const DiscreteSolution& sol, const PenaltyConfig& cfg = {});

    /// @brief Trefftz projection of a 1D solution: the H1 projection of each characteristic profile.
    ///
    /// Profiles are recovered on each space-time element from u_x and u_t along characteristics.
    /// `max_residual`, if given, receives the largest relative wave-operator residual of the
    /// local polynomials.
    DiscreteSolution trefftz_projection_1d(const ExactSolution& exact, std::shared_ptr<const SpatialMesh> mesh,
                                           const TimePartition& partition, int p, double a = 1.0,
                                           double* max_residual = nullptr);

    /// order_k = log(e_{k-1}/e_k) / log(h_{k-1}/h_k); the first entry is NaN.
    std::vector<double> convergence_orders(const std::vector<double>& h, const std::vector<double>& errors);
} // namespace stdg

#endif
