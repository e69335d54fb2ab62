#ifndef STDG_SPACE_HPP
#define STDG_SPACE_HPP

#include "stdg/mesh.hpp"
#include "stdg/trefftz.hpp"

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace stdg
{
    /// Pointwise data of a space-time function: value, first time derivatives and
    /// spatial gradients (physical coordinates).
    struct FieldValue
    {
        double u = 0.0;
        double ut = 0.0;
        double utt = 0.0;
        Point grad{};
        Point grad_t{};
    };

    /// Values of every local basis function of one element at one point.
    struct BasisValues
    {
        Eigen::VectorXd mono;
        Eigen::VectorXd v, vt, vtt;
        std::array<Eigen::VectorXd, 3> g, gt;
    };

    struct SpaceConfig
    {
        SpaceKind kind = SpaceKind::Trefftz;
        int p = 1;
    };

    /// @brief Slab-independent part of a discrete space: per-element reference bases and DOF numbering.
    ///
    /// Everything here depends on the slab only through tau, so a fixed mesh with a
    /// uniform time step shares one layout across all slabs.
    class SpaceLayout
    {
    public:
        SpaceLayout(std::shared_ptr<const SpatialMesh> mesh, SpaceConfig cfg, double tau);

        const SpatialMesh& mesh() const { return *mesh_; }
        const std::shared_ptr<const SpatialMesh>& mesh_ptr() const { return mesh_; }
        SpaceKind kind() const { return cfg_.kind; }
        int degree() const { return cfg_.p; }
        const SpaceConfig& config() const { return cfg_; }
        double tau() const { return tau_; }

        int n_dofs() const { return offsets_.back(); }
        int offset(int elem) const { return offsets_[elem]; }
        int n_local(int elem) const { return offsets_[elem + 1] - offsets_[elem]; }
        const ReferenceBasis& reference(int elem) const { return *refs_[elem]; }
        const std::shared_ptr<const ReferenceBasis>& reference_ptr(int elem) const { return refs_[elem]; }

    private:
        std::shared_ptr<const SpatialMesh> mesh_;
        SpaceConfig cfg_;
        double tau_;
        std::vector<std::shared_ptr<const ReferenceBasis>> refs_;
        std::vector<int> offsets_;
    };

    /// @brief Discrete space on one time slab (t0, t1).
    class SlabSpace
    {
    public:
        SlabSpace(std::shared_ptr<const SpatialMesh> mesh, SpaceConfig cfg, double t0, double t1);
        SlabSpace(std::shared_ptr<const SpaceLayout> layout, double t0, double t1);

        const SpaceLayout& layout() const { return *layout_; }
        const std::shared_ptr<const SpaceLayout>& layout_ptr() const { return layout_; }
        const SpatialMesh& mesh() const { return layout_->mesh(); }
        SpaceKind kind() const { return layout_->kind(); }
        int degree() const { return layout_->degree(); }
        double t0() const { return t0_; }
        double t1() const { return t1_; }
        double tau() const { return t1_ - t0_; }
        int n_dofs() const { return layout_->n_dofs(); }
        int offset(int elem) const { return layout_->offset(elem); }
        int n_local(int elem) const { return layout_->n_local(elem); }

        ElementFrame frame(int elem) const;
        LocalBasis local_basis(int elem) const;

        /// Local coordinates of (x, t) in the frame of `elem`.
        std::array<double, kMaxVars> to_local(int elem, const Point& x, double t) const;

        void eval_basis(int elem, const Point& x, double t, BasisValues& out) const;

        /// Evaluates the function with global coefficient vector `coeffs` restricted to `elem`.
        FieldValue evaluate(int elem, std::span<const double> coeffs, const Point& x, double t) const;

    private:
        std::shared_ptr<const SpaceLayout> layout_;
        double t0_, t1_;
    };

    /// Restriction of a space-time function to one slab; traces at the slab ends are one-sided from inside.
    class SlabFunction
    {
    public:
        virtual ~SlabFunction() = default;
        virtual FieldValue eval(int elem, const Point& x, double t) const = 0;
        /// Traces from both incident elements at a face point; `minus` is untouched on boundary faces.
        virtual void eval_face(const Face& face, const Point& x, double t, FieldValue& plus, FieldValue& minus) const;
    };

    /// @brief A function defined slab-wise on Omega x [0, T], possibly discontinuous across elements and knots.
    class SpaceTimeField
    {
    public:
        virtual ~SpaceTimeField() = default;
        virtual std::unique_ptr<SlabFunction> on_slab(int slab) const = 0;
    };

    /// Evaluates a slab's discrete function with per-element monomial coefficients precomputed.
    class DiscreteSlabFunction final : public SlabFunction
    {
    public:
        DiscreteSlabFunction(const SlabSpace& space, std::span<const double> coeffs);
        FieldValue eval(int elem, const Point& x, double t) const override;

    private:
        // Per element: 3 + 2d blocks of monomial coefficients (v, vt, vtt, g_i, gt_i).
        SlabSpace space_;
        std::vector<double> data_;
        std::vector<std::size_t> start_;
    };

    /// Pointwise function of (x, t) with no element dependence (smooth on Omega).
    class SmoothField : public SpaceTimeField
    {
    public:
        using Evaluator = std::function<FieldValue(const Point&, double)>;
        explicit SmoothField(Evaluator f) : f_(std::move(f)) {}
        std::unique_ptr<SlabFunction> on_slab(int slab) const override;

    private:
        Evaluator f_;
    };

    /// a - b, slab by slab.
    class DifferenceField : public SpaceTimeField
    {
    public:
        DifferenceField(const SpaceTimeField& a, const SpaceTimeField& b) : a_(a), b_(b) {}
        std::unique_ptr<SlabFunction> on_slab(int slab) const override;

    private:
        const SpaceTimeField& a_;
        const SpaceTimeField& b_;
    };

    FieldValue operator-(const FieldValue& a, const FieldValue& b);
} // namespace stdg

#endif
