#ifndef STDG_MESH_HPP
#define STDG_MESH_HPP

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

namespace stdg
{
    using Point = std::array<double, 3>;

    struct Element
    {
        std::vector<int> vertices;   // 2 for intervals, 3 for triangles
        std::vector<int> faces;      // incident faces
        double h = 0.0;              // diameter
        double measure = 0.0;        // length / area
        double inradius = 0.0;
        double a = 1.0;              // wave speed squared, constant on the element
        Point centroid{};
    };

    /// @brief A point (1D) or edge (2D) of the spatial skeleton.
    ///
    /// `elements[0]` is K+, the element whose outward normal is stored; `elements[1]`
    /// is K- or -1 on the boundary. Point faces carry measure 1.
    struct Face
    {
        std::vector<int> vertices;
        std::array<int, 2> elements{-1, -1};
        Point normal{};
        double measure = 0.0;
        double h = 0.0;              // average of the incident element diameters
        bool boundary = false;
    };

    class SpatialMesh
    {
    public:
        int dim = 1;
        std::vector<Point> vertices;
        std::vector<Element> elements;
        std::vector<Face> faces;

        int n_elements() const { return static_cast<int>(elements.size()); }
        int n_faces() const { return static_cast<int>(faces.size()); }
        int n_interior_faces() const;

        double h_min() const;
        double h_max() const;
        double a_min() const;  // c_a
        double a_max() const;  // C_a
        /// max over elements of diam(K) / rho_K
        double regularity_constant() const;
        double total_measure() const;

        /// Index of the element containing x (closed elements; first match wins), -1 if none.
        int locate(const Point& x, double tol = 1e-12) const;

        std::string summary_json() const;
    };

    /// Uniform partition of [left, right] into n_elems intervals with constant coefficient a.
    SpatialMesh build_mesh_1d(int n_elems, double left = 0.0, double right = 1.0, double a = 1.0);
    /// 1D mesh from sorted vertex coordinates and per-element coefficients.
    SpatialMesh build_mesh_1d(const std::vector<double>& vertices, const std::vector<double>& a);

    /// n x n squares on [0,1]^2, each split along the (i,j)-(i+1,j+1) diagonal.
    SpatialMesh build_mesh_2d_unit_square(int n, double a = 1.0);
    /// Triangle mesh from explicit vertices and 0-indexed triangles.
    SpatialMesh build_mesh_2d(const std::vector<Point>& vertices, const std::vector<std::array<int, 3>>& triangles,
                              const std::vector<double>& a);
    /// Reads "v x y" lines followed by "e i j k" lines.
    SpatialMesh read_mesh_2d(std::istream& in, double a = 1.0);
    SpatialMesh read_mesh_2d_file(const std::string& path, double a = 1.0);

    class TimePartition
    {
    public:
        explicit TimePartition(std::vector<double> knots);

        const std::vector<double>& knots() const { return knots_; }
        int n_slabs() const { return static_cast<int>(knots_.size()) - 1; }
        double t(int n) const { return knots_[n]; }
        double tau(int n) const { return knots_[n + 1] - knots_[n]; }
        double final_time() const { return knots_.back(); }
        bool uniform(double rel_tol = 1e-12) const;

    private:
        std::vector<double> knots_;
    };

    TimePartition build_time_partition(double T, int N);
} // namespace stdg

#endif
