#include "helpers.hpp"

#include <doctest.h>

#include <sstream>

using namespace stdg;

TEST_CASE("1D mesh counts and geometry")
{
    const SpatialMesh m = build_mesh_1d(8, 0.0, 1.0, 2.0);
    CHECK(m.n_elements() == 8);
    CHECK(m.n_faces() == 9);
    CHECK(m.n_interior_faces() == 7);
    CHECK(m.h_min() == doctest::Approx(0.125));
    CHECK(m.h_max() == doctest::Approx(0.125));
    CHECK(m.a_min() == 2.0);
    CHECK(m.total_measure() == doctest::Approx(1.0));
    CHECK(m.locate({0.3, 0, 0}) == 2);
    CHECK(m.locate({1.5, 0, 0}) == -1);
    for (const Face& f : m.faces)
    {
        CHECK(f.measure == 1.0);
        CHECK(f.boundary == (f.elements[1] < 0));
    }
    CHECK_THROWS(build_mesh_1d(0));
    CHECK_THROWS(build_mesh_1d(std::vector<double>{0.0, 0.5, 0.4, 1.0}, std::vector<double>(3, 1.0)));
}

TEST_CASE("unit square counts")
{
    for (int n : {1, 2, 5, 10})
    {
        const SpatialMesh m = build_mesh_2d_unit_square(n);
        CHECK(m.n_elements() == 2 * n * n);
        CHECK(m.n_faces() == 3 * n * n + 2 * n);
        CHECK(m.n_faces() - m.n_interior_faces() == 4 * n);
        CHECK(m.total_measure() == doctest::Approx(1.0));
        CHECK(m.h_max() == doctest::Approx(std::sqrt(2.0) / n));
        // right isosceles triangles: diam / inradius = 2 + 2 sqrt 2
        CHECK(m.regularity_constant() == doctest::Approx(2.0 + 2.0 * std::sqrt(2.0)));
    }
}

TEST_CASE("face normals point from K+ to K-")
{
    std::mt19937 rng(5);
    const auto m = test::random_mesh_2d(rng, 4);
    for (const Face& f : m->faces)
    {
        const double len = std::hypot(f.normal[0], f.normal[1]);
        CHECK(len == doctest::Approx(1.0));
        const Point& c = m->elements[f.elements[0]].centroid;
        const Point& v = m->vertices[f.vertices[0]];
        // the K+ centroid lies on the negative side
        CHECK((c[0] - v[0]) * f.normal[0] + (c[1] - v[1]) * f.normal[1] < 0.0);
    }
}

TEST_CASE("mesh file reader")
{
    std::istringstream in("# two triangles\nv 0 0\nv 1 0\nv 1 1\nv 0 1\ne 0 1 2\ne 0 2 3\n");
    const SpatialMesh m = read_mesh_2d(in);
    CHECK(m.n_elements() == 2);
    CHECK(m.n_faces() == 5);
    CHECK(m.n_interior_faces() == 1);
    CHECK(m.total_measure() == doctest::Approx(1.0));

    std::istringstream bad("v 0 0\nv 1 0\ne 0 1 7\n");
    CHECK_THROWS(read_mesh_2d(bad));
    CHECK_THROWS(read_mesh_2d_file("/nonexistent/mesh.txt"));
}

TEST_CASE("time partition")
{
    const TimePartition tp = build_time_partition(1.0, 4);
    CHECK(tp.n_slabs() == 4);
    CHECK(tp.tau(2) == doctest::Approx(0.25));
    CHECK(tp.final_time() == 1.0);
    CHECK(tp.uniform());
    CHECK_FALSE(TimePartition({0.0, 0.1, 0.3}).uniform());
    CHECK_THROWS(TimePartition({0.0, 0.2, 0.1}));
}

TEST_CASE("Gauss-Legendre rules are exact to degree 2n - 1")
{
    for (int n = 1; n <= 12; ++n)
    {
        std::vector<double> x, w;
        gauss_legendre(n, x, w);
        for (int k = 0; k <= 2 * n - 1; ++k)
        {
            double s = 0.0;
            for (int i = 0; i < n; ++i)
                s += w[i] * std::pow(x[i], k);
            const double exact = (k % 2 == 1) ? 0.0 : 2.0 / (k + 1);
            CHECK(s == doctest::Approx(exact).epsilon(1e-13));
        }
    }
}

TEST_CASE("triangle rule integrates monomials exactly")
{
    // int over the reference triangle of x^i y^j = i! j! / (i + j + 2)!
    auto fact = [](int n) { return std::tgamma(n + 1.0); };
    for (int deg = 0; deg <= 14; ++deg)
    {
        const QuadRule q = triangle_rule({0, 0, 0}, {1, 0, 0}, {0, 1, 0}, deg);
        for (const double w : q.w)
            CHECK(w > 0.0);
        for (int i = 0; i <= deg; ++i)
        {
            const int j = deg - i;
            double s = 0.0;
            for (int k = 0; k < q.size(); ++k)
                s += q.w[k] * std::pow(q.x[k][0], i) * std::pow(q.x[k][1], j);
            CHECK(s == doctest::Approx(fact(i) * fact(j) / fact(i + j + 2)).epsilon(1e-12));
        }
    }
}

TEST_CASE("space-time volume and face rules")
{
    const SpatialMesh m = build_mesh_2d_unit_square(3);
    double vol = 0.0, area = 0.0;
    for (int e = 0; e < m.n_elements(); ++e)
    {
        const QuadRule q = volume_quadrature(m, e, 0.2, 0.5, 6);
        for (int k = 0; k < q.size(); ++k)
        {
            CHECK(q.t[k] > 0.2);
            CHECK(q.t[k] < 0.5);
            vol += q.w[k] * q.t[k] * q.t[k];
        }
    }
    for (int f = 0; f < m.n_faces(); ++f)
        area += face_time_quadrature(m, f, 0.0, 2.0, 4).total_weight();
    CHECK(vol == doctest::Approx((0.125 - 0.008) / 3.0));
    // edge length: 2(n+1) unit lines plus n diagonals of length sqrt 2
    CHECK(area == doctest::Approx(2.0 * (8.0 + 3.0 * std::sqrt(2.0))));

    const SpatialMesh m1 = build_mesh_1d(4);
    CHECK(face_time_quadrature(m1, 2, 0.0, 0.5, 3).total_weight() == doctest::Approx(0.5));
    CHECK(trace_quadrature(m1, TraceEntity::Element, 1, 0.3, 5).total_weight() == doctest::Approx(0.25));
    CHECK(trace_quadrature(m1, TraceEntity::Face, 1, 0.3, 5).total_weight() == doctest::Approx(1.0));
}
