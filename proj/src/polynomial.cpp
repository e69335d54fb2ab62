#include "stdg/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace stdg
{
    MultiIndex::MultiIndex(int n_vars) : n_(n_vars)
    {
        if (n_vars < 1 || n_vars > kMaxVars)
            throw std::invalid_argument("MultiIndex: number of variables out of range");
    }

    MultiIndex::MultiIndex(std::initializer_list<int> exps) : MultiIndex(static_cast<int>(exps.size()))
    {
        int i = 0;
        for (int e : exps)
        {
            if (e < 0)
                throw std::invalid_argument("MultiIndex: negative exponent");
            e_[i++] = e;
        }
    }

    int MultiIndex::degree() const
    {
        int s = 0;
        for (int i = 0; i < n_; ++i)
            s += e_[i];
        return s;
    }

    bool GradedLexLess::operator()(const MultiIndex& a, const MultiIndex& b) const
    {
        const int da = a.degree(), db = b.degree();
        if (da != db)
            return da < db;
        for (int i = 0; i < std::min(a.size(), b.size()); ++i)
            if (a[i] != b[i])
                return a[i] > b[i];
        return a.size() < b.size();
    }

    namespace
    {
        void enumerate_degree(int n_vars, int deg, int var, MultiIndex& cur, std::vector<MultiIndex>& out)
        {
            if (var == n_vars - 1)
            {
                cur[var] = deg;
                out.push_back(cur);
                return;
            }
            for (int e = deg; e >= 0; --e)
            {
                cur[var] = e;
                enumerate_degree(n_vars, deg - e, var + 1, cur, out);
            }
        }
    } // namespace

    std::vector<MultiIndex> monomials_up_to(int n_vars, int p)
    {
        std::vector<MultiIndex> out;
        MultiIndex cur(n_vars);
        for (int deg = 0; deg <= p; ++deg)
            enumerate_degree(n_vars, deg, 0, cur, out);
        return out;
    }

    Polynomial::Polynomial(int dim) : dim_(dim)
    {
        if (dim < 1 || dim + 1 > kMaxVars)
            throw std::invalid_argument("Polynomial: spatial dimension out of range");
    }

    Polynomial Polynomial::constant(int dim, double c)
    {
        Polynomial p(dim);
        p.add_term(MultiIndex(dim + 1), c);
        return p;
    }

    Polynomial Polynomial::monomial(int dim, const MultiIndex& alpha, double c)
    {
        Polynomial p(dim);
        p.add_term(alpha, c);
        return p;
    }

    Polynomial Polynomial::variable(int dim, int var)
    {
        if (var < 0 || var > dim)
            throw std::invalid_argument("Polynomial::variable: index out of range");
        MultiIndex alpha(dim + 1);
        alpha[var] = 1;
        return monomial(dim, alpha);
    }

    int Polynomial::degree() const
    {
        int deg = 0;
        for (const auto& [alpha, c] : terms_)
            deg = std::max(deg, alpha.degree());
        return deg;
    }

    double Polynomial::coefficient(const MultiIndex& alpha) const
    {
        auto it = terms_.find(alpha);
        return it == terms_.end() ? 0.0 : it->second;
    }

    double Polynomial::max_abs_coefficient() const
    {
        double m = 0.0;
        for (const auto& [alpha, c] : terms_)
            m = std::max(m, std::abs(c));
        return m;
    }

    void Polynomial::add_term(const MultiIndex& alpha, double c)
    {
        if (alpha.size() != n_vars())
            throw std::invalid_argument("Polynomial: multi-index length does not match d+1");
        if (c == 0.0)
            return;
        auto [it, inserted] = terms_.try_emplace(alpha, c);
        if (!inserted)
        {
            it->second += c;
            if (it->second == 0.0)
                terms_.erase(it);
        }
    }

    void Polynomial::check_compatible(const Polynomial& other) const
    {
        if (other.dim_ != dim_)
            throw std::invalid_argument("Polynomial: dimension mismatch");
    }

    Polynomial& Polynomial::operator+=(const Polynomial& other)
    {
        check_compatible(other);
        for (const auto& [alpha, c] : other.terms_)
            add_term(alpha, c);
        return *this;
    }

    Polynomial& Polynomial::operator-=(const Polynomial& other)
    {
        check_compatible(other);
        for (const auto& [alpha, c] : other.terms_)
            add_term(alpha, -c);
        return *this;
    }

    Polynomial& Polynomial::operator*=(double s)
    {
        if (s == 0.0)
        {
            terms_.clear();
            return *this;
        }
        for (auto& [alpha, c] : terms_)
            c *= s;
        return *this;
    }

    Polynomial operator*(const Polynomial& a, const Polynomial& b)
    {
        a.check_compatible(b);
        Polynomial out(a.dim());
        for (const auto& [alpha, ca] : a.terms_)
            for (const auto& [beta, cb] : b.terms_)
            {
                MultiIndex gamma(a.n_vars());
                for (int i = 0; i < a.n_vars(); ++i)
                    gamma[i] = alpha[i] + beta[i];
                out.add_term(gamma, ca * cb);
            }
        return out;
    }

    std::vector<double> Polynomial::coefficients(std::span<const MultiIndex> basis) const
    {
        std::vector<double> out(basis.size(), 0.0);
        for (std::size_t i = 0; i < basis.size(); ++i)
            out[i] = coefficient(basis[i]);
        return out;
    }

    Polynomial Polynomial::from_coefficients(int dim, std::span<const MultiIndex> basis,
                                             std::span<const double> coeffs)
    {
        if (basis.size() != coeffs.size())
            throw std::invalid_argument("Polynomial::from_coefficients: size mismatch");
        Polynomial p(dim);
        for (std::size_t i = 0; i < basis.size(); ++i)
            p.add_term(basis[i], coeffs[i]);
        return p;
    }

    std::string Polynomial::to_string() const
    {
        if (terms_.empty())
            return "0";
        static constexpr const char* names3[] = {"x", "y", "z"};
        std::ostringstream os;
        os << std::setprecision(17);
        bool first = true;
        for (const auto& [alpha, c] : terms_)
        {
            if (!first)
                os << " + ";
            first = false;
            os << c;
            for (int i = 0; i < n_vars(); ++i)
            {
                if (alpha[i] == 0)
                    continue;
                const char* name = (i == dim_) ? "t" : names3[i];
                os << " * " << name << "^" << alpha[i];
            }
        }
        return os.str();
    }

    double poly_eval(const Polynomial& p, std::span<const double> point)
    {
        if (static_cast<int>(point.size()) != p.n_vars())
            throw std::invalid_argument("poly_eval: point length must be d+1");
        double sum = 0.0;
        for (const auto& [alpha, c] : p.terms())
        {
            double term = c;
            for (int i = 0; i < p.n_vars(); ++i)
                for (int k = 0; k < alpha[i]; ++k)
                    term *= point[i];
            sum += term;
        }
        return sum;
    }

    Polynomial poly_diff(const Polynomial& p, int var)
    {
        if (var < 0 || var >= p.n_vars())
            throw std::invalid_argument("poly_diff: variable index out of range");
        Polynomial out(p.dim());
        for (const auto& [alpha, c] : p.terms())
        {
            if (alpha[var] == 0)
                continue;
            MultiIndex beta = alpha;
            beta[var] -= 1;
            out.add_term(beta, c * alpha[var]);
        }
        return out;
    }

    Polynomial wave_operator(const Polynomial& p, double a)
    {
        if (!(a > 0.0))
            throw std::invalid_argument("wave_operator: coefficient must be positive");
        const int t = p.time_var();
        Polynomial out = poly_diff(poly_diff(p, t), t);
        for (int i = 0; i < p.dim(); ++i)
            out -= a * poly_diff(poly_diff(p, i), i);
        return out;
    }

    namespace
    {
        // (s y + b)^k as a polynomial in the single variable `var`.
        Polynomial affine_power(int dim, int var, double s, double b, int k)
        {
            Polynomial out(dim);
            double binom = 1.0;
            for (int j = 0; j <= k; ++j)
            {
                MultiIndex alpha(dim + 1);
                alpha[var] = j;
                out.add_term(alpha, binom * std::pow(s, j) * std::pow(b, k - j));
                binom = binom * (k - j) / (j + 1);
            }
            return out;
        }
    } // namespace

    Polynomial poly_compose_affine(const Polynomial& p, std::span<const double> scale,
                                   std::span<const double> shift)
    {
        const int nv = p.n_vars();
        if (static_cast<int>(scale.size()) != nv || static_cast<int>(shift.size()) != nv)
            throw std::invalid_argument("poly_compose_affine: scale/shift length must be d+1");
        for (double s : scale)
            if (s == 0.0)
                throw std::invalid_argument("poly_compose_affine: zero scale");

        Polynomial out(p.dim());
        for (const auto& [alpha, c] : p.terms())
        {
            Polynomial term = Polynomial::constant(p.dim(), c);
            for (int i = 0; i < nv; ++i)
                if (alpha[i] > 0)
                    term = term * affine_power(p.dim(), i, scale[i], shift[i], alpha[i]);
            out += term;
        }
        return out;
    }
} // namespace stdg
