#ifndef STDG_TEST_HELPERS_HPP
#define STDG_TEST_HELPERS_HPP

#include "stdg/analysis.hpp"

#include <cmath>
#include <random>

namespace stdg::test
{
    /// c * x^ex [* y^ey] * t^et, exponents listed as (x_1..x_d, t).
    inline Polynomial term(int dim, std::initializer_list<int> exps, double c = 1.0)
    {
        return Polynomial::monomial(dim, MultiIndex(exps), c);
    }

    inline Polynomial random_polynomial(std::mt19937& rng, int dim, int degree)
    {
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        Polynomial p(dim);
        for (const auto& alpha : monomials_up_to(dim + 1, degree))
            p.add_term(alpha, u(rng));
        return p;
    }

    inline double rel_diff(double a, double b)
    {
        const double s = std::max({std::abs(a), std::abs(b), 1e-300});
        return std::abs(a - b) / s;
    }

    /// Largest coefficient difference of two polynomials relative to the larger coefficient.
    inline double coeff_diff(const Polynomial& a, const Polynomial& b)
    {
        const double s = std::max({a.max_abs_coefficient(), b.max_abs_coefficient(), 1e-300});
        return (a - b).max_abs_coefficient() / s;
    }

    inline std::shared_ptr<const SpatialMesh> mesh_1d(int n, double a = 1.0)
    {
        return std::make_shared<const SpatialMesh>(build_mesh_1d(n, 0.0, 1.0, a));
    }

    inline std::shared_ptr<const SpatialMesh> mesh_2d(int n)
    {
        return std::make_shared<const SpatialMesh>(build_mesh_2d_unit_square(n));
    }

    /// A 1D mesh with random vertex spacing and random per-element coefficients.
    inline std::shared_ptr<const SpatialMesh> random_mesh_1d(std::mt19937& rng, int n)
    {
        std::uniform_real_distribution<double> u(0.5, 1.5), a(0.5, 2.0);
        std::vector<double> x{0.0}, coef;
        for (int i = 0; i < n; ++i)
        {
            x.push_back(x.back() + u(rng));
            coef.push_back(a(rng));
        }
        for (double& v : x)
            v /= x.back();
        return std::make_shared<const SpatialMesh>(build_mesh_1d(x, coef));
    }

    /// Structured unit-square triangulation with its interior vertices jiggled.
    inline std::shared_ptr<const SpatialMesh> random_mesh_2d(std::mt19937& rng, int n)
    {
        std::uniform_real_distribution<double> u(-0.2, 0.2);
        std::vector<Point> v;
        for (int j = 0; j <= n; ++j)
            for (int i = 0; i <= n; ++i)
            {
                Point p{static_cast<double>(i) / n, static_cast<double>(j) / n, 0.0};
                if (i > 0 && i < n && j > 0 && j < n)
                {
                    p[0] += u(rng) / n;
                    p[1] += u(rng) / n;
                }
                v.push_back(p);
            }
        std::vector<std::array<int, 3>> tris;
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
            {
                const int a = j * (n + 1) + i, b = a + 1, c = a + n + 2, d = a + n + 1;
                tris.push_back({a, b, c});
                tris.push_back({a, c, d});
            }
        return std::make_shared<const SpatialMesh>(build_mesh_2d(v, tris, std::vector<double>(tris.size(), 1.0)));
    }

    inline Eigen::VectorXd random_vector(std::mt19937& rng, int n)
    {
        std::normal_distribution<double> g;
        Eigen::VectorXd v(n);
        for (int i = 0; i < n; ++i)
            v[i] = g(rng);
        return v;
    }
} // namespace stdg::test

#endif
