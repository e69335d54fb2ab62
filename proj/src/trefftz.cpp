#include "stdg/trefftz.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>

namespace stdg
{
    const char* to_string(SpaceKind kind)
    {
        return kind == SpaceKind::Trefftz ? "trefftz" : "full";
    }

    SpaceKind space_kind_from_string(const std::string& s)
    {
        if (s == "trefftz")
            return SpaceKind::Trefftz;
        if (s == "full")
            return SpaceKind::FullPolynomial;
        throw std::invalid_argument("unknown space kind: " + s);
    }

    ElementFrame ElementFrame::identity(int dim)
    {
        ElementFrame f;
        f.dim = dim;
        return f;
    }

    ElementFrame ElementFrame::make(int dim, std::span<const double> spatial_center, double spatial_half_width,
                                    double time_center, double time_half_width)
    {
        if (!(spatial_half_width > 0.0) || !(time_half_width > 0.0))
            throw std::invalid_argument("ElementFrame: scales must be positive");
        ElementFrame f;
        f.dim = dim;
        for (int i = 0; i < dim; ++i)
        {
            f.center[i] = spatial_center[i];
            f.scale[i] = spatial_half_width;
        }
        f.center[dim] = time_center;
        f.scale[dim] = time_half_width;
        return f;
    }

    double LocalBasis::adjusted_coefficient() const
    {
        const double sx = frame.spatial_scale(), st = frame.time_scale();
        return a_K * st * st / (sx * sx);
    }

    int trefftz_dim(int p, int d)
    {
        if (p < 0)
            throw std::invalid_argument("trefftz_dim: negative degree");
        switch (d)
        {
        case 1:
            return 2 * p + 1;
        case 2:
            return (p + 1) * (p + 1);
        case 3:
            return (p + 1) * (p + 2) * (2 * p + 3) / 6;
        default:
            throw std::invalid_argument("trefftz_dim: d must be 1, 2 or 3");
        }
    }

    int full_dim(int p, int d)
    {
        // binom(p + d + 1, d + 1)
        long num = 1, den = 1;
        for (int k = 1; k <= d + 1; ++k)
        {
            num *= p + k;
            den *= k;
        }
        return static_cast<int>(num / den);
    }

    void ReferenceBasis::monomial_values(std::span<const double> y, Eigen::VectorXd& out) const
    {
        const int nv = dim + 1;
        std::array<std::array<double, 16>, kMaxVars> pw{};
        for (int i = 0; i < nv; ++i)
        {
            pw[i][0] = 1.0;
            for (int k = 1; k <= p; ++k)
                pw[i][k] = pw[i][k - 1] * y[i];
        }
        out.resize(n_monomials());
        for (int m = 0; m < n_monomials(); ++m)
        {
            const MultiIndex& alpha = monomials[m];
            double v = 1.0;
            for (int i = 0; i < nv; ++i)
                v *= pw[i][alpha[i]];
            out[m] = v;
        }
    }

    namespace
    {
        // Matrix M with (c * M) = coefficients of d/dy_var for a coefficient row c.
        Eigen::MatrixXd derivative_matrix(const std::vector<MultiIndex>& monos, int var)
        {
            const int n = static_cast<int>(monos.size());
            std::map<MultiIndex, int, GradedLexLess> index;
            for (int i = 0; i < n; ++i)
                index[monos[i]] = i;
            Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
            for (int i = 0; i < n; ++i)
            {
                if (monos[i][var] == 0)
                    continue;
                MultiIndex beta = monos[i];
                beta[var] -= 1;
                m(i, index.at(beta)) = monos[i][var];
            }
            return m;
        }

        void fill_tables(ReferenceBasis& b)
        {
            const int nb = static_cast<int>(b.funcs.size());
            b.coeffs.resize(nb, b.n_monomials());
            for (int k = 0; k < nb; ++k)
            {
                auto c = b.funcs[k].coefficients(b.monomials);
                for (int m = 0; m < b.n_monomials(); ++m)
                    b.coeffs(k, m) = c[m];
            }
            const Eigen::MatrixXd dt = derivative_matrix(b.monomials, b.dim);
            b.coeffs_t = b.coeffs * dt;
            b.coeffs_tt = b.coeffs_t * dt;
            b.coeffs_x.clear();
            b.coeffs_xt.clear();
            for (int i = 0; i < b.dim; ++i)
            {
                const Eigen::MatrixXd dx = derivative_matrix(b.monomials, i);
                b.coeffs_x.push_back(b.coeffs * dx);
                b.coeffs_xt.push_back(b.coeffs_t * dx);
            }
        }

        void set_funcs(ReferenceBasis& b, const Eigen::MatrixXd& span)
        {
            const int n = b.n_monomials();
            b.funcs.clear();
            for (Eigen::Index k = 0; k < span.cols(); ++k)
            {
                std::vector<double> c(span.col(k).data(), span.col(k).data() + n);
                b.funcs.push_back(Polynomial::from_coefficients(b.dim, b.monomials, c));
            }
        }

        void check_args(int p, int d)
        {
            if (p < 0)
                throw std::invalid_argument("basis: negative degree");
            if (d < 1 || d > 3)
                throw std::invalid_argument("basis: d must be 1, 2 or 3");
        }
    } // namespace

    std::shared_ptr<const ReferenceBasis> make_trefftz_reference(int p, int d, double a_tilde)
    {
        check_args(p, d);
        if (!(a_tilde > 0.0))
            throw std::invalid_argument("make_trefftz_reference: coefficient must be positive");

        auto b = std::make_shared<ReferenceBasis>();
        b->kind = SpaceKind::Trefftz;
        b->p = p;
        b->dim = d;
        b->a_tilde = a_tilde;
        b->monomials = monomials_up_to(d + 1, p);
        const int n = b->n_monomials();
        const int expected = trefftz_dim(p, d);

        Eigen::MatrixXd kernel;
        if (p < 2)
        {
            kernel = Eigen::MatrixXd::Identity(n, n);
        }
        else
        {
            const auto range = monomials_up_to(d + 1, p - 2);
            Eigen::MatrixXd op(range.size(), n);
            for (int j = 0; j < n; ++j)
            {
                const Polynomial image = wave_operator(Polynomial::monomial(d, b->monomials[j]), a_tilde);
                const auto col = image.coefficients(range);
                for (std::size_t i = 0; i < range.size(); ++i)
                    op(static_cast<Eigen::Index>(i), j) = col[i];
            }
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(op, Eigen::ComputeFullV);
            const auto& sv = svd.singularValues();
            const double tol = 1e-10 * (sv.size() > 0 ? sv[0] : 1.0);
            int rank = 0;
            for (Eigen::Index i = 0; i < sv.size(); ++i)
                if (sv[i] > tol)
                    ++rank;
            kernel = svd.matrixV().rightCols(n - rank);
        }
        if (kernel.cols() != expected)
            throw std::runtime_error("make_trefftz_reference: kernel dimension " + std::to_string(kernel.cols()) +
                                     " differs from expected " + std::to_string(expected));

        set_funcs(*b, kernel);
        fill_tables(*b);
        return b;
    }

    std::shared_ptr<const ReferenceBasis> make_full_reference(int p, int d)
    {
        check_args(p, d);
        auto b = std::make_shared<ReferenceBasis>();
        b->kind = SpaceKind::FullPolynomial;
        b->p = p;
        b->dim = d;
        b->monomials = monomials_up_to(d + 1, p);
        for (const auto& alpha : b->monomials)
            b->funcs.push_back(Polynomial::monomial(d, alpha));
        fill_tables(*b);
        return b;
    }

    LocalBasis build_trefftz_basis(int p, int d, double a_K, const ElementFrame& frame)
    {
        if (!(a_K > 0.0))
            throw std::invalid_argument("build_trefftz_basis: a_K must be positive");
        LocalBasis lb;
        lb.frame = frame;
        lb.a_K = a_K;
        lb.ref = make_trefftz_reference(p, d, lb.adjusted_coefficient());
        return lb;
    }

    LocalBasis build_full_basis(int p, int d, const ElementFrame& frame)
    {
        LocalBasis lb;
        lb.frame = frame;
        lb.ref = make_full_reference(p, d);
        return lb;
    }

    double verify_trefftz(const LocalBasis& basis)
    {
        if (basis.kind() != SpaceKind::Trefftz)
            throw std::invalid_argument("verify_trefftz: basis is not a Trefftz basis");
        const double a = basis.ref->a_tilde;
        double worst = 0.0;
        for (const auto& f : basis.funcs())
        {
            const double scale = f.max_abs_coefficient();
            if (scale == 0.0)
                continue;
            worst = std::max(worst, wave_operator(f, a).max_abs_coefficient() / scale);
        }
        return worst;
    }

    double span_residual(const ReferenceBasis& basis, const Polynomial& f)
    {
        const auto c = f.coefficients(basis.monomials);
        Eigen::Map<const Eigen::VectorXd> fv(c.data(), static_cast<Eigen::Index>(c.size()));
        // Terms of f outside the monomial list cannot be represented at all.
        double outside = 0.0;
        for (const auto& [alpha, coef] : f.terms())
            if (alpha.degree() > basis.p)
                outside += coef * coef;
        const double norm2 = fv.squaredNorm() + outside;
        if (norm2 == 0.0)
            return 0.0;
        const Eigen::MatrixXd bt = basis.coeffs.transpose();
        const Eigen::VectorXd x = bt.colPivHouseholderQr().solve(fv);
        const double res2 = (bt * x - fv).squaredNorm() + outside;
        return std::sqrt(res2 / norm2);
    }
} // namespace stdg
