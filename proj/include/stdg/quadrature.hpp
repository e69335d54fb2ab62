#ifndef STDG_QUADRATURE_HPP
#define STDG_QUADRATURE_HPP

#include "stdg/mesh.hpp"

#include <vector>

namespace stdg
{
    /// Highest polynomial degree the rule builders accept.
    inline constexpr int kMaxQuadratureDegree = 60;

    /// @brief Quadrature rule in physical space-time coordinates.
    struct QuadRule
    {
        std::vector<Point> x;        // spatial part of each point
        std::vector<double> t;       // time part of each point
        std::vector<double> w;
        int degree = 0;

        int size() const { return static_cast<int>(w.size()); }
        double total_weight() const;
    };

    /// Gauss-Legendre nodes and weights on [-1, 1].
    void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

    /// Spatial rules (time component set to `t`).
    QuadRule interval_rule(double a, double b, int degree, double t = 0.0);
    /// Collapsed-coordinate (Duffy) Gauss product rule on a triangle; weights are positive.
    QuadRule triangle_rule(const Point& p0, const Point& p1, const Point& p2, int degree, double t = 0.0);
    QuadRule segment_rule(const Point& p0, const Point& p1, int degree, double t = 0.0);

    QuadRule element_rule(const SpatialMesh& mesh, int elem, int degree, double t = 0.0);
    QuadRule face_rule(const SpatialMesh& mesh, int face, int degree, double t = 0.0);

    /// Rule on K x (t0, t1): spatial rule tensored with Gauss-Legendre in time.
    QuadRule volume_quadrature(const SpatialMesh& mesh, int elem, double t0, double t1, int degree);
    /// Rule on e x (t0, t1); a 1D point face contributes weight 1.
    QuadRule face_time_quadrature(const SpatialMesh& mesh, int face, double t0, double t1, int degree);

    enum class TraceEntity
    {
        Element,
        Face
    };
    /// Spatial rule on an element or face at the frozen time t.
    QuadRule trace_quadrature(const SpatialMesh& mesh, TraceEntity kind, int index, double t, int degree);
} // namespace stdg

#endif
