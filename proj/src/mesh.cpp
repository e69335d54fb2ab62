#include "stdg/mesh.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace stdg
{
    int SpatialMesh::n_interior_faces() const
    {
        return static_cast<int>(std::count_if(faces.begin(), faces.end(), [](const Face& f) { return !f.boundary; }));
    }

    double SpatialMesh::h_min() const
    {
        double h = INFINITY;
        for (const auto& e : elements)
            h = std::min(h, e.h);
        return h;
    }

    double SpatialMesh::h_max() const
    {
        double h = 0.0;
        for (const auto& e : elements)
            h = std::max(h, e.h);
        return h;
    }

    double SpatialMesh::a_min() const
    {
        double a = INFINITY;
        for (const auto& e : elements)
            a = std::min(a, e.a);
        return a;
    }

    double SpatialMesh::a_max() const
    {
        double a = 0.0;
        for (const auto& e : elements)
            a = std::max(a, e.a);
        return a;
    }

    double SpatialMesh::regularity_constant() const
    {
        double c = 0.0;
        for (const auto& e : elements)
            c = std::max(c, e.h / e.inradius);
        return c;
    }

    double SpatialMesh::total_measure() const
    {
        double m = 0.0;
        for (const auto& e : elements)
            m += e.measure;
        return m;
    }

    int SpatialMesh::locate(const Point& x, double tol) const
    {
        for (int k = 0; k < n_elements(); ++k)
        {
            const auto& el = elements[k];
            if (dim == 1)
            {
                const double a = vertices[el.vertices[0]][0], b = vertices[el.vertices[1]][0];
                if (x[0] >= a - tol && x[0] <= b + tol)
                    return k;
            }
            else
            {
                const Point& p0 = vertices[el.vertices[0]];
                const Point& p1 = vertices[el.vertices[1]];
                const Point& p2 = vertices[el.vertices[2]];
                const double det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
                const double l1 = ((x[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (x[1] - p0[1])) / det;
                const double l2 = ((p1[0] - p0[0]) * (x[1] - p0[1]) - (x[0] - p0[0]) * (p1[1] - p0[1])) / det;
                if (l1 >= -tol && l2 >= -tol && 1.0 - l1 - l2 >= -tol)
                    return k;
            }
        }
        return -1;
    }

    std::string SpatialMesh::summary_json() const
    {
        nlohmann::json j;
        j["dim"] = dim;
        j["vertices"] = vertices.size();
        j["elements"] = elements.size();
        j["faces"] = faces.size();
        j["interior_faces"] = n_interior_faces();
        j["h_min"] = h_min();
        j["h_max"] = h_max();
        j["a_min"] = a_min();
        j["a_max"] = a_max();
        j["c_T"] = regularity_constant();
        return j.dump();
    }

    SpatialMesh build_mesh_1d(int n_elems, double left, double right, double a)
    {
        if (n_elems < 1)
            throw std::invalid_argument("build_mesh_1d: need at least one element");
        if (!(right > left))
            throw std::invalid_argument("build_mesh_1d: empty domain");
        std::vector<double> v(n_elems + 1);
        for (int i = 0; i <= n_elems; ++i)
            v[i] = left + (right - left) * i / n_elems;
        v.back() = right;
        return build_mesh_1d(v, std::vector<double>(n_elems, a));
    }

    SpatialMesh build_mesh_1d(const std::vector<double>& v, const std::vector<double>& a)
    {
        if (v.size() < 2 || a.size() != v.size() - 1)
            throw std::invalid_argument("build_mesh_1d: need n+1 vertices and n coefficients");
        SpatialMesh m;
        m.dim = 1;
        const int n = static_cast<int>(a.size());
        for (double x : v)
            m.vertices.push_back({x, 0.0, 0.0});
        for (int k = 0; k < n; ++k)
        {
            if (!(v[k + 1] > v[k]))
                throw std::invalid_argument("build_mesh_1d: vertices must be strictly increasing");
            if (!(a[k] > 0.0))
                throw std::invalid_argument("build_mesh_1d: coefficient must be positive");
            Element e;
            e.vertices = {k, k + 1};
            e.h = v[k + 1] - v[k];
            e.measure = e.h;
            e.inradius = 0.5 * e.h;
            e.a = a[k];
            e.centroid = {0.5 * (v[k] + v[k + 1]), 0.0, 0.0};
            m.elements.push_back(e);
        }
        for (int i = 0; i <= n; ++i)
        {
            Face f;
            f.vertices = {i};
            f.measure = 1.0;
            if (i == 0)
            {
                f.elements = {0, -1};
                f.normal = {-1.0, 0.0, 0.0};
                f.boundary = true;
                f.h = m.elements[0].h;
            }
            else if (i == n)
            {
                f.elements = {n - 1, -1};
                f.normal = {1.0, 0.0, 0.0};
                f.boundary = true;
                f.h = m.elements[n - 1].h;
            }
            else
            {
                f.elements = {i - 1, i};
                f.normal = {1.0, 0.0, 0.0};
                f.h = 0.5 * (m.elements[i - 1].h + m.elements[i].h);
            }
            for (int k : f.elements)
                if (k >= 0)
                    m.elements[k].faces.push_back(i);
            m.faces.push_back(f);
        }
        return m;
    }

    SpatialMesh build_mesh_2d(const std::vector<Point>& vertices, const std::vector<std::array<int, 3>>& triangles,
                              const std::vector<double>& a)
    {
        if (a.size() != triangles.size())
            throw std::invalid_argument("build_mesh_2d: one coefficient per triangle required");
        SpatialMesh m;
        m.dim = 2;
        m.vertices = vertices;
        const int nv = static_cast<int>(vertices.size());

        auto dist = [&](int i, int j) { return std::hypot(vertices[i][0] - vertices[j][0], vertices[i][1] - vertices[j][1]); };

        for (std::size_t k = 0; k < triangles.size(); ++k)
        {
            const auto& tri = triangles[k];
            for (int i : tri)
                if (i < 0 || i >= nv)
                    throw std::invalid_argument("build_mesh_2d: vertex index out of range");
            if (!(a[k] > 0.0))
                throw std::invalid_argument("build_mesh_2d: coefficient must be positive");
            const Point& p0 = vertices[tri[0]];
            const Point& p1 = vertices[tri[1]];
            const Point& p2 = vertices[tri[2]];
            const double area = 0.5 * std::abs((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]));
            if (!(area > 0.0))
                throw std::invalid_argument("build_mesh_2d: degenerate triangle");
            Element e;
            e.vertices = {tri[0], tri[1], tri[2]};
            const double l01 = dist(tri[0], tri[1]), l12 = dist(tri[1], tri[2]), l20 = dist(tri[2], tri[0]);
            e.h = std::max({l01, l12, l20});
            e.measure = area;
            e.inradius = 2.0 * area / (l01 + l12 + l20);
            e.a = a[k];
            e.centroid = {(p0[0] + p1[0] + p2[0]) / 3.0, (p0[1] + p1[1] + p2[1]) / 3.0, 0.0};
            m.elements.push_back(e);
        }

        std::map<std::pair<int, int>, int> edge_index;
        for (int k = 0; k < m.n_elements(); ++k)
        {
            const auto& tri = triangles[k];
            for (int j = 0; j < 3; ++j)
            {
                const int i0 = tri[j], i1 = tri[(j + 1) % 3];
                const auto key = std::minmax(i0, i1);
                auto it = edge_index.find(key);
                if (it == edge_index.end())
                {
                    Face f;
                    f.vertices = {i0, i1};
                    f.elements = {k, -1};
                    f.measure = dist(i0, i1);
                    const double tx = (vertices[i1][0] - vertices[i0][0]) / f.measure;
                    const double ty = (vertices[i1][1] - vertices[i0][1]) / f.measure;
                    Point nrm{ty, -tx, 0.0};
                    const Point& c = m.elements[k].centroid;
                    const double mx = 0.5 * (vertices[i0][0] + vertices[i1][0]) - c[0];
                    const double my = 0.5 * (vertices[i0][1] + vertices[i1][1]) - c[1];
                    if (nrm[0] * mx + nrm[1] * my < 0.0)
                        nrm = {-nrm[0], -nrm[1], 0.0};
                    f.normal = nrm;
                    edge_index[key] = m.n_faces();
                    m.elements[k].faces.push_back(m.n_faces());
                    m.faces.push_back(f);
                }
                else
                {
                    Face& f = m.faces[it->second];
                    if (f.elements[1] != -1)
                        throw std::invalid_argument("build_mesh_2d: edge shared by more than two triangles");
                    f.elements[1] = k;
                    m.elements[k].faces.push_back(it->second);
                }
            }
        }
        for (auto& f : m.faces)
        {
            f.boundary = f.elements[1] < 0;
            f.h = f.boundary ? m.elements[f.elements[0]].h
                             : 0.5 * (m.elements[f.elements[0]].h + m.elements[f.elements[1]].h);
        }
        return m;
    }

    SpatialMesh build_mesh_2d_unit_square(int n, double a)
    {
        if (n < 1)
            throw std::invalid_argument("build_mesh_2d_unit_square: n must be positive");
        std::vector<Point> v;
        for (int j = 0; j <= n; ++j)
            for (int i = 0; i <= n; ++i)
                v.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n, 0.0});
        auto id = [n](int i, int j) { return j * (n + 1) + i; };
        std::vector<std::array<int, 3>> tris;
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
            {
                tris.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
                tris.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
            }
        return build_mesh_2d(v, tris, std::vector<double>(tris.size(), a));
    }

    SpatialMesh read_mesh_2d(std::istream& in, double a)
    {
        std::vector<Point> v;
        std::vector<std::array<int, 3>> tris;
        std::string line;
        int lineno = 0;
        while (std::getline(in, line))
        {
            ++lineno;
            std::istringstream ls(line);
            std::string tag;
            if (!(ls >> tag) || tag[0] == '#')
                continue;
            if (tag == "v")
            {
                Point p{0.0, 0.0, 0.0};
                if (!(ls >> p[0] >> p[1]))
                    throw std::runtime_error("mesh file line " + std::to_string(lineno) + ": bad vertex");
                v.push_back(p);
            }
            else if (tag == "e")
            {
                std::array<int, 3> t{};
                if (!(ls >> t[0] >> t[1] >> t[2]))
                    throw std::runtime_error("mesh file line " + std::to_string(lineno) + ": bad element");
                tris.push_back(t);
            }
            else
                throw std::runtime_error("mesh file line " + std::to_string(lineno) + ": unknown tag " + tag);
        }
        if (tris.empty())
            throw std::runtime_error("mesh file: no elements");
        return build_mesh_2d(v, tris, std::vector<double>(tris.size(), a));
    }

    SpatialMesh read_mesh_2d_file(const std::string& path, double a)
    {
        std::ifstream in(path);
        if (!in)
            throw std::runtime_error("cannot open mesh file " + path);
        return read_mesh_2d(in, a);
    }

    TimePartition::TimePartition(std::vector<double> knots) : knots_(std::move(knots))
    {
        if (knots_.size() < 2)
            throw std::invalid_argument("TimePartition: need at least two knots");
        for (std::size_t i = 1; i < knots_.size(); ++i)
            if (!(knots_[i] > knots_[i - 1]))
                throw std::invalid_argument("TimePartition: knots must be strictly increasing");
    }

    bool TimePartition::uniform(double rel_tol) const
    {
        const double tau0 = tau(0);
        for (int n = 1; n < n_slabs(); ++n)
            if (std::abs(tau(n) - tau0) > rel_tol * tau0)
                return false;
        return true;
    }

    TimePartition build_time_partition(double T, int N)
    {
        if (!(T > 0.0) || N < 1)
            throw std::invalid_argument("build_time_partition: need T > 0 and N >= 1");
        std::vector<double> k(N + 1);
        for (int n = 0; n <= N; ++n)
            k[n] = T * n / N;
        k.back() = T;
        return TimePartition(std::move(k));
    }
} // namespace stdg
