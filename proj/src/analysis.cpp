#include "stdg/analysis.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace stdg
{
    InitialData ExactSolution::initial() const
    {
        return [f = eval](const Point& x) { return f(x, 0.0); };
    }

    namespace
    {
        // Odd 2-periodic extension of the Gaussian g(s) = exp(-((s - c)/delta)^2) and its first
        // two derivatives. Images further than kCut widths from the centre contribute below 1e-300
        // (exp(-kCut^2) is the last normal double); skipping them also avoids libm's slow subnormal path.
        struct ImageSum
        {
            double delta;
            static constexpr double kCentre = 0.625;
            static constexpr double kCut = 26.5;

            // Adds g^{(0,1,2)}(s) for every image s = sgn * y + 2k that is not negligible.
            void accumulate(double y, double sgn, double out[3]) const
            {
                const double base = sgn * y;
                const int k_lo = static_cast<int>(std::ceil((kCentre - base - kCut * delta) / 2.0));
                const int k_hi = static_cast<int>(std::floor((kCentre - base + kCut * delta) / 2.0));
                for (int k = k_lo; k <= k_hi; ++k)
                {
                    const double z = (base + 2.0 * k - kCentre) / delta;
                    const double g = std::exp(-z * z);
                    // Derivatives with respect to y carry the chain factor sgn.
                    out[0] += sgn * g;
                    out[1] += -2.0 * z / delta * g;
                    out[2] += sgn * (4.0 * z * z - 2.0) / (delta * delta) * g;
                }
            }

            // g~, g~', g~'' at y
            void eval(double y, double out[3]) const
            {
                out[0] = out[1] = out[2] = 0.0;
                accumulate(y, 1.0, out);
                accumulate(y, -1.0, out);
            }
        };
    } // namespace

    ExactSolution exact_1d_gaussian(double delta, double a)
    {
        if (!(delta > 0.0) || delta > kDelta0 * (1.0 + 1e-12))
            throw std::invalid_argument("exact_1d_gaussian: delta must lie in (0, 0.075]");
        if (!(a > 0.0))
            throw std::invalid_argument("exact_1d_gaussian: a must be positive");
        const double c = std::sqrt(a);
        ExactSolution s;
        s.tag = "gaussian-1d";
        s.dim = 1;
        s.eval = [img = ImageSum{delta}, c](const Point& x, double t) {
            double p[3], m[3];
            img.eval(x[0] + c * t, p);
            img.eval(x[0] - c * t, m);
            FieldValue f;
            f.u = 0.5 * (p[0] + m[0]);
            f.ut = 0.5 * c * (p[1] - m[1]);
            f.utt = 0.5 * c * c * (p[2] + m[2]);
            f.grad[0] = 0.5 * (p[1] + m[1]);
            f.grad_t[0] = 0.5 * c * (p[2] - m[2]);
            return f;
        };
        return s;
    }

    double exact_energy_gaussian(double delta)
    {
        return std::sqrt(std::numbers::pi) / (2.0 * std::sqrt(2.0) * delta);
    }

    ExactSolution exact_2d_mode()
    {
        ExactSolution s;
        s.tag = "mode-2d";
        s.dim = 2;
        s.eval = [](const Point& x, double t) {
            constexpr double pi = std::numbers::pi;
            const double w = std::sqrt(2.0) * pi;
            const double sx = std::sin(pi * x[0]), cx = std::cos(pi * x[0]);
            const double sy = std::sin(pi * x[1]), cy = std::cos(pi * x[1]);
            const double ct = std::cos(w * t), st = std::sin(w * t);
            FieldValue f;
            f.u = ct * sx * sy;
            f.ut = -w * st * sx * sy;
            f.utt = -w * w * ct * sx * sy;
            f.grad[0] = pi * ct * cx * sy;
            f.grad[1] = pi * ct * sx * cy;
            f.grad_t[0] = -w * pi * st * cx * sy;
            f.grad_t[1] = -w * pi * st * sx * cy;
            return f;
        };
        return s;
    }

    double error_dg(const DiscreteSolution& sol, const ExactSolution& exact, const PenaltyConfig& cfg, int quad_degree)
    {
        if (sol.n_solved() != sol.partition().n_slabs())
            throw std::invalid_argument("error_dg: incomplete solution");
        const int deg = quad_degree < 0 ? error_degree(sol.degree()) : quad_degree;
        const SmoothField u = exact.field();
        const DifferenceField e(u, sol);
        const NormContext ctx{sol.mesh(), sol.partition(), sol.degree(), cfg, deg};
        return std::sqrt(std::max(0.0, dg_norm_sq(e, ctx)));
    }

    double error_final_energy(const DiscreteSolution& sol, const ExactSolution& exact, int quad_degree)
    {
        const int N = sol.partition().n_slabs();
        if (sol.n_solved() != N)
            throw std::invalid_argument("error_final_energy: incomplete solution");
        const int deg = quad_degree < 0 ? error_degree(sol.degree()) : quad_degree;
        const SmoothField u = exact.field();
        const DifferenceField e(u, sol);
        const SliceQuadrature q(sol.mesh(), deg);
        const TraceData tr = trace_data(*e.on_slab(N - 1), sol.mesh(), q, sol.partition().final_time());
        return std::sqrt(physical_energy_from_trace(tr, sol.mesh(), q));
    }

    double error_delta(const DiscreteSolution& sol, const ExactSolution& exact, double delta, int quad_degree)
    {
        return std::sqrt(delta) * error_final_energy(sol, exact, quad_degree);
    }

    std::vector<EnergySample> energy_trace(const DiscreteSolution& sol, const PenaltyConfig& cfg)
    {
        const TimePartition& tp = sol.partition();
        const int p = sol.degree();
        const SliceQuadrature q(sol.mesh(), assembly_degree(p));
        std::vector<EnergySample> out;
        for (int n = 0; n < sol.n_solved(); ++n)
        {
            const auto f = sol.on_slab(n);
            if (n == 0)
            {
                const TraceData s = trace_data(*f, sol.mesh(), q, tp.t(0));
                out.push_back({tp.t(0), physical_energy_from_trace(s, sol.mesh(), q),
                               energy_from_trace(s, sol.mesh(), q, p, cfg)});
            }
            const TraceData tr = trace_data(*f, sol.mesh(), q, tp.t(n + 1));
            out.push_back({tp.t(n + 1), physical_energy_from_trace(tr, sol.mesh(), q),
                           energy_from_trace(tr, sol.mesh(), q, p, cfg)});
        }
        return out;
    }

    namespace
    {
        // Monomial coefficients (ascending powers) of the Legendre polynomials L_0..L_n.
        std::vector<std::vector<double>> legendre_monomials(int n)
        {
            std::vector<std::vector<double>> L(n + 1, std::vector<double>(n + 1, 0.0));
            L[0][0] = 1.0;
            if (n >= 1)
                L[1][1] = 1.0;
            for (int k = 1; k < n; ++k)
                for (int i = 0; i <= n; ++i)
                {
                    double v = -static_cast<double>(k) * L[k - 1][i];
                    if (i > 0)
                        v += (2.0 * k + 1.0) * L[k][i - 1];
                    L[k + 1][i] = v / (k + 1.0);
                }
            return L;
        }

        double legendre(int k, double s)
        {
            double p0 = 1.0, p1 = s;
            if (k == 0)
                return p0;
            for (int j = 1; j < k; ++j)
            {
                const double p2 = ((2.0 * j + 1.0) * s * p1 - j * p0) / (j + 1.0);
                p0 = p1;
                p1 = p2;
            }
            return p1;
        }

        // H1 projection of a profile on [-1, 1] given its derivative samples:
        // L2-project the derivative onto P_{p-1}, integrate from -1 (value 0 there).
        // Returns ascending monomial coefficients in s, degree <= p.
        std::vector<double> h1_projection(int p, const std::vector<double>& nodes, const std::vector<double>& weights,
                                          const std::vector<double>& dprofile)
        {
            const auto L = legendre_monomials(p);
            std::vector<double> poly(p + 1, 0.0);
            for (int k = 0; k < p; ++k)
            {
                double ak = 0.0;
                for (std::size_t i = 0; i < nodes.size(); ++i)
                    ak += weights[i] * dprofile[i] * legendre(k, nodes[i]);
                ak *= (2.0 * k + 1.0) / 2.0;
                // int_{-1}^{s} L_k = (L_{k+1} - L_{k-1}) / (2k+1), and s + 1 for k = 0
                if (k == 0)
                {
                    poly[0] += ak;
                    poly[1] += ak;
                }
                else
                    for (int i = 0; i <= p; ++i)
                        poly[i] += ak * (L[k + 1][i] - L[k - 1][i]) / (2.0 * k + 1.0);
            }
            return poly;
        }

        // Univariate ascending coefficients composed with the affine local form s = alpha x + beta t + gamma.
        Polynomial compose_univariate(const std::vector<double>& c, double alpha, double beta, double gamma)
        {
            Polynomial s = alpha * Polynomial::variable(1, 0) + beta * Polynomial::variable(1, 1) +
                           Polynomial::constant(1, gamma);
            Polynomial acc(1);
            for (int i = static_cast<int>(c.size()) - 1; i >= 0; --i)
                acc = acc * s + Polynomial::constant(1, c[i]);
            return acc;
        }
    } // namespace

    DiscreteSolution trefftz_projection_1d(const ExactSolution& exact, std::shared_ptr<const SpatialMesh> mesh,
                                           const TimePartition& partition, int p, double a, double* max_residual)
    {
        if (!mesh || mesh->dim != 1 || exact.dim != 1)
            throw std::invalid_argument("trefftz_projection_1d: one space dimension only");
        if (p < 1)
            throw std::invalid_argument("trefftz_projection_1d: need p >= 1");
        const double c = std::sqrt(a);
        std::vector<double> nodes, weights;
        gauss_legendre(p + 4, nodes, weights);

        DiscreteSolution out(mesh, partition);
        std::shared_ptr<const SpaceLayout> layout;
        double worst = 0.0;
        for (int n = 0; n < partition.n_slabs(); ++n)
        {
            const double t0 = partition.t(n), t1 = partition.t(n + 1);
            if (!layout || std::abs(layout->tau() - (t1 - t0)) > 1e-12 * (t1 - t0))
                layout = std::make_shared<const SpaceLayout>(mesh, SpaceConfig{SpaceKind::Trefftz, p}, t1 - t0);
            const SlabSpace space(layout, t0, t1);
            Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(space.n_dofs());
            for (int e = 0; e < mesh->n_elements(); ++e)
            {
                const Element& el = mesh->elements[e];
                if (std::abs(el.a - a) > 1e-14 * a)
                    throw std::invalid_argument("trefftz_projection_1d: mesh coefficient differs from a");
                const double xl = mesh->vertices[el.vertices[0]][0], xr = mesh->vertices[el.vertices[1]][0];
                const double xa = std::min(xl, xr), xb = std::max(xl, xr);
                const double tc = 0.5 * (t0 + t1);

                // Profiles P1(xi), xi = x/c + t, and P2(eta), eta = x/c - t, each vanishing at its
                // lower end; `anchor` restores the constant F1(xi_min) + F2(eta_min).
                std::array<std::vector<double>, 2> profile;
                std::array<double, 2> lo{}, hi{};
                for (int branch = 0; branch < 2; ++branch)
                {
                    const double sg = branch == 0 ? 1.0 : -1.0;
                    lo[branch] = branch == 0 ? xa / c + t0 : xa / c - t1;
                    hi[branch] = branch == 0 ? xb / c + t1 : xb / c - t0;
                    const double half = 0.5 * (hi[branch] - lo[branch]);
                    std::vector<double> d(nodes.size());
                    for (std::size_t i = 0; i < nodes.size(); ++i)
                    {
                        const double z = lo[branch] + half * (nodes[i] + 1.0);
                        // A point of the element on the characteristic x/c + sg t = z.
                        const double ea = sg * (z - xa / c), eb = sg * (z - xb / c);
                        const double tmin = std::max(t0, std::min(ea, eb)), tmax = std::min(t1, std::max(ea, eb));
                        const double ts = std::clamp(tc, std::min(tmin, tmax), std::max(tmin, tmax));
                        const double xs = c * (z - sg * ts);
                        const FieldValue f = exact({xs, 0.0, 0.0}, ts);
                        d[i] = half * 0.5 * (c * f.grad[0] + sg * f.ut);
                    }
                    profile[branch] = h1_projection(p, nodes, weights, d);
                }
                // F1(xi_min) + F2(eta_min) = 1/2 (u(xa,t0) + u(xa,t1)) - 1/2 c int_{t0}^{t1} u_x(xa, s) ds
                double anchor = 0.5 * (exact({xa, 0.0, 0.0}, t0).u + exact({xa, 0.0, 0.0}, t1).u);
                for (std::size_t i = 0; i < nodes.size(); ++i)
                {
                    const double s = tc + 0.5 * (t1 - t0) * nodes[i];
                    anchor -= 0.5 * c * 0.5 * (t1 - t0) * weights[i] * exact({xa, 0.0, 0.0}, s).grad[0];
                }

                // Express both profiles in the element's local coordinates (xh, th):
                // x = cx + sx xh, t = tc + st th.
                const double cx = el.centroid[0], sx = 0.5 * el.h, st = 0.5 * (t1 - t0);
                Polynomial local = Polynomial::constant(1, anchor);
                for (int branch = 0; branch < 2; ++branch)
                {
                    const double sg = branch == 0 ? 1.0 : -1.0;
                    // s = (2 z - lo - hi) / (hi - lo), z = x/c + sg t
                    const double k = 2.0 / (hi[branch] - lo[branch]);
                    const double alpha = k * sx / c, beta = k * sg * st;
                    const double gamma = k * (cx / c + sg * tc) - k * 0.5 * (lo[branch] + hi[branch]);
                    local += compose_univariate(profile[branch], alpha, beta, gamma);
                }
                const ReferenceBasis& ref = layout->reference(e);
                const std::vector<double> m = local.coefficients(ref.monomials);
                const Eigen::Map<const Eigen::VectorXd> mv(m.data(), static_cast<Eigen::Index>(m.size()));
                // Basis rows are orthonormal, so the coordinates are a plain product.
                const Eigen::VectorXd ce = ref.coeffs * mv;
                coeffs.segment(space.offset(e), space.n_local(e)) = ce;

                const double scale = std::max(local.max_abs_coefficient(), std::numeric_limits<double>::min());
                worst = std::max(worst, wave_operator(local, ref.a_tilde).max_abs_coefficient() / scale);
                worst = std::max(worst, (ref.coeffs.transpose() * ce - mv).lpNorm<Eigen::Infinity>() / scale);
            }
            out.append(space, std::move(coeffs));
        }
        if (max_residual)
            *max_residual = worst;
        return out;
    }

    std::vector<double> convergence_orders(const std::vector<double>& h, const std::vector<double>& errors)
    {
        if (h.size() != errors.size())
            throw std::invalid_argument("convergence_orders: length mismatch");
        std::vector<double> orders(errors.size(), std::numeric_limits<double>::quiet_NaN());
        for (std::size_t k = 0; k < errors.size(); ++k)
        {
            if (!(errors[k] > 0.0))
                throw std::invalid_argument("convergence_orders: errors must be positive");
            if (k > 0)
                orders[k] = std::log(errors[k - 1] / errors[k]) / std::log(h[k - 1] / h[k]);
        }
        return orders;
    }
} // namespace stdg
