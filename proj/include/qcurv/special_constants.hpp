#pragma once

#include <numeric>

namespace qcurv {

/// Exact rational number with normalised sign and reduced terms.
struct Rational {
    long num = 0;
    long den = 1;

    static constexpr Rational make(long num, long den)
    {
        if (den < 0) {
            num = -num;
            den = -den;
        }
        const long g = std::gcd(num, den);
        return g == 0 ? Rational{0, 1} : Rational{num / g, den / g};
    }
    constexpr double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    friend constexpr bool operator==(const Rational&, const Rational&) = default;
};

/// Ambient dimension together with the critical exponent N = 2n/(n-4) and
/// the area of the unit (n-1)-sphere.
class DimensionSpec {
public:
    /// Throws DomainError for n < 5.
    explicit DimensionSpec(int n);

    int n() const { return n_; }
    Rational critical_exponent() const { return critical_; }
    double N() const { return critical_.value(); }
    double omega() const { return omega_; }
    /// Theorem-grade checks (hypothesis tests, bubble comparison) need n >= 6.
    bool theorem_grade() const { return n_ >= 6; }

private:
    int n_;
    Rational critical_;
    double omega_;
};

/// I_p^q = ∫₀^∞ t^q (1+t)^{-p} dt = Γ(q+1)Γ(p-q-1)/Γ(p), via log-Gamma.
/// Throws DomainError unless p - q - 1 > 0 and q > -1.
double beta_integral(double p, double q);

/// The same integral by tanh-sinh quadrature after t = s/(1-s).
/// Independent of the Gamma route; used as its oracle.
double beta_integral_quadrature(double p, double q);

/// I_p^{q+1} = (q+1)/(p-q-2) · I_p^q. Throws DomainError when p - q - 2 <= 0.
double beta_recursion_step(double p, double q, double prior);

/// ω_{n-1} = 2π^{n/2}/Γ(n/2), the area of the unit sphere in R^n.
double sphere_area(int n);

/// K₂⁻² = n(n+2)(n-2)(n-4) (I_n^{n/2-1} ω_{n-1}/2)^{4/n}: the inverse square of
/// the best constant of H₂ ↪ L^N on R^n.
double best_sobolev_sq_inv(const DimensionSpec& dim);

} // namespace qcurv
