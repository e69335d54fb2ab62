#ifndef STDG_FORMS_HPP
#define STDG_FORMS_HPP

#include "stdg/quadrature.hpp"
#include "stdg/space.hpp"

#include <Eigen/Sparse>

namespace stdg
{
    struct PenaltyConfig
    {
        double C_sigma0 = 10.0;
        bool sigma1_enabled = true;
        bool sigma2_enabled = true;
    };

    struct FacePenalties
    {
        double sigma0 = 0.0;
        double sigma1 = 0.0;
        double sigma2 = 0.0;
    };

    /// sigma0 = C p^2 / h_e, sigma1 = C_a p^3 / (h_e tau), sigma2 = h_e / (C_a tau).
    FacePenalties penalties(const SpatialMesh& mesh, int face, int p, double tau, const PenaltyConfig& cfg);
    /// Same, with C_a supplied (mesh.a_max() is a full element scan; hoist it out of face loops).
    FacePenalties penalties(double h_e, double C_a, int p, double tau, const PenaltyConfig& cfg);

    using SparseMatrix = Eigen::SparseMatrix<double>;

    struct SlabSystem
    {
        SparseMatrix matrix;
        Eigen::VectorXd rhs;
    };

    /// Default exact assembly degree for a degree-p space.
    inline int assembly_degree(int p) { return 2 * p + 2; }

    /// A[i, j] = a_n(phi_j, phi_i), volume form.
    SparseMatrix assemble_an(const SlabSpace& space, const PenaltyConfig& cfg, int quad_degree = -1);

    /// Same matrix from the integrated-by-parts form: skeleton and end-time traces only.
    /// Requires a Trefftz space.
    SparseMatrix assemble_an_skeleton(const SlabSpace& space, const PenaltyConfig& cfg, int quad_degree = -1);

    /// @brief Spatial quadrature on every element and face, flattened.
    ///
    /// Element e owns points [elem_start[e], elem_start[e+1]); face f owns
    /// [face_start[f], face_start[f+1]) of the face arrays.
    struct SliceQuadrature
    {
        int degree = 0;
        std::vector<Point> elem_x;
        std::vector<double> elem_w;
        std::vector<int> elem_start;
        std::vector<Point> face_x;
        std::vector<double> face_w;
        std::vector<int> face_start;

        SliceQuadrature() = default;
        SliceQuadrature(const SpatialMesh& mesh, int degree);
        int n_elem_points() const { return static_cast<int>(elem_w.size()); }
        int n_face_points() const { return static_cast<int>(face_w.size()); }
    };

    /// @brief Spatial trace of a function at a fixed time, sampled at SliceQuadrature points.
    ///
    /// Elements: u, ut, grad (dim entries per point). Faces: jump J = u+ - u- (u+ on the
    /// boundary) and normal flux average FA = {{a grad u}} . n+.
    struct TraceData
    {
        int dim = 1;
        std::vector<double> u, ut, grad;
        std::vector<double> J, FA;

        TraceData& operator-=(const TraceData& o);
    };

    TraceData trace_data(const SlabFunction& f, const SpatialMesh& mesh, const SliceQuadrature& q, double t);

    /// @brief Basis values of a slab layout at SliceQuadrature points at both slab ends.
    ///
    /// Local coordinates do not depend on the slab position, so one table serves every
    /// slab sharing the layout.
    class SliceTables
    {
    public:
        SliceTables(std::shared_ptr<const SpaceLayout> layout, std::shared_ptr<const SliceQuadrature> quad);

        const SpaceLayout& layout() const { return *layout_; }
        const SliceQuadrature& quadrature() const { return *quad_; }

        /// side 0: t_n^+, side 1: t_{n+1}^-.
        TraceData trace(std::span<const double> coeffs, int side) const;
        /// The five-term trace functional against every basis function at t_n^+:
        /// (ut, vt) + (a grad, grad v) - (FA, [[v]]) - ([[u]], {{a grad v}}) + (sigma0 [[u]], [[v]]).
        Eigen::VectorXd rhs(const TraceData& data, const PenaltyConfig& cfg) const;

    private:
        struct Side
        {
            // Element tables: rows = local basis functions, columns = element points.
            std::vector<Eigen::MatrixXd> v, vt;
            std::vector<std::array<Eigen::MatrixXd, 3>> g;
            // Face tables per incident element: value and normal flux a grad v . n+.
            std::vector<std::array<Eigen::MatrixXd, 2>> fv, fflux;
        };
        std::shared_ptr<const SpaceLayout> layout_;
        std::shared_ptr<const SliceQuadrature> quad_;
        std::array<Side, 2> sides_;
        std::vector<double> sigma0_;
    };

    /// Penalized trace functional of `data` against the slab's basis at t_n^+ (generic path).
    Eigen::VectorXd trace_rhs(const SlabSpace& space, const SliceQuadrature& q, const TraceData& data,
                              const PenaltyConfig& cfg);

    /// b_n(u^{n-1}, .) with u^{n-1} given through its traces at t_n^-.
    Eigen::VectorXd assemble_bn(int slab, const SlabSpace& space, const SliceQuadrature& q, const TraceData& previous,
                                const PenaltyConfig& cfg);

    /// Initial data: u = u0, grad = grad u0, ut = v0 (time argument ignored).
    using InitialData = std::function<FieldValue(const Point&)>;

    Eigen::VectorXd assemble_binit(const InitialData& init, const SlabSpace& space, const SliceQuadrature& q,
                                   const PenaltyConfig& cfg);

    /// E_h from trace data: 1/2|ut|^2 + 1/2 a|grad|^2 + 1/2 sigma0 J^2 - FA J.
    double energy_from_trace(const TraceData& data, const SpatialMesh& mesh, const SliceQuadrature& q, int p,
                             const PenaltyConfig& cfg);
    /// Physical energy 1/2|ut|^2 + 1/2 a|grad|^2.
    double physical_energy_from_trace(const TraceData& data, const SpatialMesh& mesh, const SliceQuadrature& q);

    /// E_h(t, w) for w on the slab [t0, t1].
    double discrete_energy(const SlabFunction& w, const SlabSpace& space, double t, int quad_degree = -1,
                           const PenaltyConfig& cfg = {});

    /// Face-time quantities accumulated over Gamma x (t0, t1).
    struct FaceTimeTerms
    {
        double sigma1_jump = 0.0;      // sigma1 J^2
        double sigma2_flux_jump = 0.0; // sigma2 FJ^2, interior
        double avg_ut = 0.0;           // sigma2^{-1} {{ut}}^2, interior
        double flux_t = 0.0;           // sigma1^{-1} FAt^2
        double jump_t = 0.0;           // sigma0^2 sigma1^{-1} Jt^2
    };

    FaceTimeTerms face_time_terms(const SlabFunction& w, const SpatialMesh& mesh, int p, double t0, double t1,
                                  const PenaltyConfig& cfg, int quad_degree);

    /// What the global norms need besides the function itself.
    struct NormContext
    {
        const SpatialMesh& mesh;
        const TimePartition& partition;
        int p;
        PenaltyConfig cfg;
        int quad_degree;
    };

    /// a(w, w) accumulated slab-wise: end energies, temporal-jump energies, sigma1/sigma2 terms.
    double dg_norm_sq(const SpaceTimeField& w, const NormContext& ctx);
    /// The stronger continuity-side norm; needs sigma1 and sigma2 enabled.
    double dgstar_norm_sq(const SpaceTimeField& w, const NormContext& ctx);
} // namespace stdg

#endif
