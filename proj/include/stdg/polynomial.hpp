#ifndef STDG_POLYNOMIAL_HPP
#define STDG_POLYNOMIAL_HPP

#include <array>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace stdg
{
    /// Largest number of variables a polynomial can carry (d = 3 spatial plus time).
    inline constexpr int kMaxVars = 4;

    /// @brief Exponent tuple over the variables (x_1, ..., x_d, t).
    class MultiIndex
    {
    public:
        MultiIndex() = default;
        explicit MultiIndex(int n_vars);
        MultiIndex(std::initializer_list<int> exps);

        int size() const { return n_; }
        int degree() const;

        int operator[](int i) const { return e_[i]; }
        int& operator[](int i) { return e_[i]; }

        bool operator==(const MultiIndex& other) const = default;

    private:
        std::array<int, kMaxVars> e_{};
        int n_ = 0;
    };

    /// Graded-lexicographic order: lower total degree first, then x_1 powers descending.
    struct GradedLexLess
    {
        bool operator()(const MultiIndex& a, const MultiIndex& b) const;
    };

    /// All multi-indices in `n_vars` variables of total degree <= p, graded-lex ordered.
    std::vector<MultiIndex> monomials_up_to(int n_vars, int p);

    /// @brief Sparse multivariate polynomial in d spatial variables and time.
    ///
    /// Variables are ordered x_1..x_d, t; the time variable has index d. Terms
    /// with an exact zero coefficient are never stored.
    class Polynomial
    {
    public:
        using Terms = std::map<MultiIndex, double, GradedLexLess>;

        explicit Polynomial(int dim = 1);

        static Polynomial constant(int dim, double c);
        static Polynomial monomial(int dim, const MultiIndex& alpha, double c = 1.0);
        /// The coordinate polynomial y_var.
        static Polynomial variable(int dim, int var);

        int dim() const { return dim_; }
        int n_vars() const { return dim_ + 1; }
        int time_var() const { return dim_; }

        const Terms& terms() const { return terms_; }
        bool is_zero() const { return terms_.empty(); }
        int degree() const;
        double coefficient(const MultiIndex& alpha) const;
        double max_abs_coefficient() const;

        void add_term(const MultiIndex& alpha, double c);

        Polynomial& operator+=(const Polynomial& other);
        Polynomial& operator-=(const Polynomial& other);
        Polynomial& operator*=(double s);

        friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
        friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
        friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
        friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
        friend Polynomial operator*(const Polynomial& a, const Polynomial& b);

        bool operator==(const Polynomial& other) const = default;

        /// Coefficients against an explicit monomial list (missing terms are 0).
        std::vector<double> coefficients(std::span<const MultiIndex> basis) const;
        static Polynomial from_coefficients(int dim, std::span<const MultiIndex> basis,
                                            std::span<const double> coeffs);

        std::string to_string() const;

    private:
        void check_compatible(const Polynomial& other) const;

        int dim_;
        Terms terms_;
    };

    /// Evaluates P at a point of length d+1 (x_1..x_d, t).
    double poly_eval(const Polynomial& p, std::span<const double> point);

    /// Exact partial derivative with respect to variable `var` (0..d).
    Polynomial poly_diff(const Polynomial& p, int var);

    /// Returns P_tt - a * Laplacian_x P.
    Polynomial wave_operator(const Polynomial& p, double a);

    /// Returns Q with Q(y) = P(scale * y + shift), expanded exactly.
    Polynomial poly_compose_affine(const Polynomial& p, std::span<const double> scale,
                                   std::span<const double> shift);
} // namespace stdg

#endif
