#include "stdg/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace stdg
{
    double QuadRule::total_weight() const
    {
        double s = 0.0;
        for (double wi : w)
            s += wi;
        return s;
    }

    namespace
    {
        void compute_gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights)
        {
            nodes.assign(n, 0.0);
            weights.assign(n, 0.0);
            for (int i = 0; i < (n + 1) / 2; ++i)
            {
                double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
                double dp = 0.0;
                for (int it = 0; it < 100; ++it)
                {
                    double p0 = 1.0, p1 = x;
                    for (int k = 2; k <= n; ++k)
                    {
                        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                        p0 = p1;
                        p1 = p2;
                    }
                    dp = n * (x * p1 - p0) / (x * x - 1.0);
                    const double dx = p1 / dp;
                    x -= dx;
                    if (std::abs(dx) < 1e-16)
                        break;
                }
                // recompute derivative at the converged node
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= n; ++k)
                {
                    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                nodes[i] = -x;
                nodes[n - 1 - i] = x;
                weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
            }
            if (n % 2 == 1)
                nodes[n / 2] = 0.0;
        }
    } // namespace

    void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights)
    {
        if (n < 1)
            throw std::invalid_argument("gauss_legendre: need at least one point");
        // Newton from scratch is far too slow for per-face rules; keep one copy per thread.
        thread_local std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
        auto it = cache.find(n);
        if (it == cache.end())
        {
            std::pair<std::vector<double>, std::vector<double>> r;
            compute_gauss_legendre(n, r.first, r.second);
            it = cache.emplace(n, std::move(r)).first;
        }
        nodes = it->second.first;
        weights = it->second.second;
    }

    namespace
    {
        struct Rule1D
        {
            std::vector<double> x, w;
        };

        // Gauss rule on [0, 1] exact to `degree`.
        const Rule1D& unit_rule(int degree)
        {
            static std::mutex mtx;
            static std::map<int, Rule1D> cache;
            if (degree < 0 || degree > 2 * kMaxQuadratureDegree)
                throw std::invalid_argument("quadrature: unsupported degree " + std::to_string(degree));
            std::lock_guard lock(mtx);
            auto it = cache.find(degree);
            if (it != cache.end())
                return it->second;
            Rule1D r;
            gauss_legendre(degree / 2 + 1, r.x, r.w);
            for (std::size_t i = 0; i < r.x.size(); ++i)
            {
                r.x[i] = 0.5 * (r.x[i] + 1.0);
                r.w[i] *= 0.5;
            }
            return cache.emplace(degree, std::move(r)).first->second;
        }

        void check_degree(int degree)
        {
            if (degree < 0 || degree > kMaxQuadratureDegree)
                throw std::invalid_argument("quadrature: unsupported degree " + std::to_string(degree));
        }

        QuadRule tensor_time(const QuadRule& space, double t0, double t1, int degree)
        {
            const Rule1D& tr = unit_rule(degree);
            QuadRule out;
            out.degree = degree;
            const double tau = t1 - t0;
            for (int i = 0; i < space.size(); ++i)
                for (std::size_t k = 0; k < tr.x.size(); ++k)
                {
                    out.x.push_back(space.x[i]);
                    out.t.push_back(t0 + tau * tr.x[k]);
                    out.w.push_back(space.w[i] * tau * tr.w[k]);
                }
            return out;
        }
    } // namespace

    QuadRule interval_rule(double a, double b, int degree, double t)
    {
        check_degree(degree);
        const Rule1D& r = unit_rule(degree);
        QuadRule q;
        q.degree = degree;
        for (std::size_t i = 0; i < r.x.size(); ++i)
        {
            q.x.push_back({a + (b - a) * r.x[i], 0.0, 0.0});
            q.t.push_back(t);
            q.w.push_back((b - a) * r.w[i]);
        }
        return q;
    }

    QuadRule segment_rule(const Point& p0, const Point& p1, int degree, double t)
    {
        check_degree(degree);
        const Rule1D& r = unit_rule(degree);
        const double len = std::hypot(p1[0] - p0[0], p1[1] - p0[1]);
        QuadRule q;
        q.degree = degree;
        for (std::size_t i = 0; i < r.x.size(); ++i)
        {
            const double s = r.x[i];
            q.x.push_back({p0[0] + s * (p1[0] - p0[0]), p0[1] + s * (p1[1] - p0[1]), 0.0});
            q.t.push_back(t);
            q.w.push_back(len * r.w[i]);
        }
        return q;
    }

    QuadRule triangle_rule(const Point& p0, const Point& p1, const Point& p2, int degree, double t)
    {
        check_degree(degree);
        // Reference point (xi, eta) = (u, v (1 - u)), Jacobian (1 - u): the u-direction needs one extra degree.
        const Rule1D& ru = unit_rule(degree + 1);
        const Rule1D& rv = unit_rule(degree);
        const double det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
        const double jac = std::abs(det);
        QuadRule q;
        q.degree = degree;
        for (std::size_t i = 0; i < ru.x.size(); ++i)
            for (std::size_t j = 0; j < rv.x.size(); ++j)
            {
                const double u = ru.x[i];
                const double xi = u, eta = rv.x[j] * (1.0 - u);
                q.x.push_back({p0[0] + xi * (p1[0] - p0[0]) + eta * (p2[0] - p0[0]),
                               p0[1] + xi * (p1[1] - p0[1]) + eta * (p2[1] - p0[1]), 0.0});
                q.t.push_back(t);
                q.w.push_back(jac * ru.w[i] * rv.w[j] * (1.0 - u));
            }
        return q;
    }

    QuadRule element_rule(const SpatialMesh& mesh, int elem, int degree, double t)
    {
        const auto& e = mesh.elements.at(elem);
        if (mesh.dim == 1)
            return interval_rule(mesh.vertices[e.vertices[0]][0], mesh.vertices[e.vertices[1]][0], degree, t);
        return triangle_rule(mesh.vertices[e.vertices[0]], mesh.vertices[e.vertices[1]], mesh.vertices[e.vertices[2]],
                             degree, t);
    }

    QuadRule face_rule(const SpatialMesh& mesh, int face, int degree, double t)
    {
        check_degree(degree);
        const auto& f = mesh.faces.at(face);
        if (mesh.dim == 1)
        {
            QuadRule q;
            q.degree = degree;
            q.x.push_back(mesh.vertices[f.vertices[0]]);
            q.t.push_back(t);
            q.w.push_back(1.0);
            return q;
        }
        return segment_rule(mesh.vertices[f.vertices[0]], mesh.vertices[f.vertices[1]], degree, t);
    }

    QuadRule volume_quadrature(const SpatialMesh& mesh, int elem, double t0, double t1, int degree)
    {
        if (!(t1 > t0))
            throw std::invalid_argument("volume_quadrature: empty time interval");
        return tensor_time(element_rule(mesh, elem, degree), t0, t1, degree);
    }

    QuadRule face_time_quadrature(const SpatialMesh& mesh, int face, double t0, double t1, int degree)
    {
        if (!(t1 > t0))
            throw std::invalid_argument("face_time_quadrature: empty time interval");
        return tensor_time(face_rule(mesh, face, degree), t0, t1, degree);
    }

    QuadRule trace_quadrature(const SpatialMesh& mesh, TraceEntity kind, int index, double t, int degree)
    {
        return kind == TraceEntity::Element ? element_rule(mesh, index, degree, t) : face_rule(mesh, index, degree, t);
    }
} // namespace stdg
