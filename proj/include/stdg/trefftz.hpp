#ifndef STDG_TREFFTZ_HPP
#define STDG_TREFFTZ_HPP

#include "stdg/polynomial.hpp"

#include <Eigen/Dense>

#include <memory>
#include <vector>

namespace stdg
{
    enum class SpaceKind
    {
        Trefftz,
        FullPolynomial
    };

    const char* to_string(SpaceKind kind);
    SpaceKind space_kind_from_string(const std::string& s);

    /// @brief Affine map between local coordinates in [-1,1]^{d+1} and a space-time element.
    ///
    /// Physical point y = center + scale * yhat. The spatial scale is isotropic
    /// (h_K / 2); the temporal scale is tau_n / 2.
    struct ElementFrame
    {
        int dim = 1;
        std::array<double, kMaxVars> center{};
        std::array<double, kMaxVars> scale{1.0, 1.0, 1.0, 1.0};

        static ElementFrame identity(int dim);
        static ElementFrame make(int dim, std::span<const double> spatial_center, double spatial_half_width,
                                 double time_center, double time_half_width);

        double spatial_scale() const { return scale[0]; }
        double time_scale() const { return scale[dim]; }
    };

    /// @brief Basis functions in local coordinates, shared by every element with the same
    /// (kind, p, d, adjusted coefficient).
    ///
    /// `coeffs` holds one row per basis function over `monomials` (graded-lex, degree <= p).
    /// The derivative tables are the same coefficients pushed through d/dyhat.
    struct ReferenceBasis
    {
        SpaceKind kind = SpaceKind::Trefftz;
        int p = 0;
        int dim = 1;
        double a_tilde = 1.0;
        std::vector<MultiIndex> monomials;
        std::vector<Polynomial> funcs;

        Eigen::MatrixXd coeffs;                  // value
        Eigen::MatrixXd coeffs_t;                // d/dt
        Eigen::MatrixXd coeffs_tt;               // d2/dt2
        std::vector<Eigen::MatrixXd> coeffs_x;   // d/dx_i
        std::vector<Eigen::MatrixXd> coeffs_xt;  // d2/dx_i dt

        int size() const { return static_cast<int>(funcs.size()); }
        int n_monomials() const { return static_cast<int>(monomials.size()); }

        /// Values of all monomials at a local point (length d+1).
        void monomial_values(std::span<const double> local_point, Eigen::VectorXd& out) const;
    };

    /// @brief Per-element basis: a frame plus the shared local-coordinate functions.
    struct LocalBasis
    {
        ElementFrame frame;
        std::shared_ptr<const ReferenceBasis> ref;
        double a_K = 1.0;

        SpaceKind kind() const { return ref->kind; }
        int degree() const { return ref->p; }
        int size() const { return ref->size(); }
        const std::vector<Polynomial>& funcs() const { return ref->funcs; }
        /// a_K * s_t^2 / s_x^2: the coefficient the local functions satisfy the wave equation with.
        double adjusted_coefficient() const;
    };

    /// Dimension of the local Trefftz space of degree p in d space dimensions.
    int trefftz_dim(int p, int d);

    /// Number of monomials of total degree <= p in d+1 variables.
    int full_dim(int p, int d);

    /// Orthonormal kernel basis of v -> v_tt - a_tilde * Laplacian v on P_p (local coordinates).
    std::shared_ptr<const ReferenceBasis> make_trefftz_reference(int p, int d, double a_tilde);
    std::shared_ptr<const ReferenceBasis> make_full_reference(int p, int d);

    LocalBasis build_trefftz_basis(int p, int d, double a_K, const ElementFrame& frame);
    LocalBasis build_full_basis(int p, int d, const ElementFrame& frame);

    /// Largest relative coefficient residual of the wave operator over the basis functions.
    double verify_trefftz(const LocalBasis& basis);

    /// Relative residual of projecting `f` (local coordinates) onto the span of the basis.
    double span_residual(const ReferenceBasis& basis, const Polynomial& f);
} // namespace stdg

#endif
