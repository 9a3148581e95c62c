#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace qcurv {

struct PowerTerm {
    double coefficient;
    double exponent;
};

/// Radial expression Σ c_k ρ^{e_k} in dimension n, kept in canonical form:
/// sorted by exponent, exponents closer than 1e-12 merged, zero coefficients dropped.
class PowerSum {
public:
    explicit PowerSum(int dim, std::vector<PowerTerm> terms = {});

    static PowerSum monomial(int dim, double coefficient, double exponent);

    int dim() const { return dim_; }
    std::span<const PowerTerm> terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    /// Coefficient of ρ^exponent (0 when absent).
    double coefficient_of(double exponent) const;

    double operator()(double rho) const;
    double derivative(double rho) const;

    PowerSum operator-() const;
    friend PowerSum operator+(const PowerSum& a, const PowerSum& b);
    friend PowerSum operator-(const PowerSum& a, const PowerSum& b);
    friend PowerSum operator*(double s, const PowerSum& a);
    friend PowerSum operator*(const PowerSum& a, const PowerSum& b);

    std::string to_string() const;

private:
    int dim_;
    std::vector<PowerTerm> terms_;
};

/// Geometer's Laplacian Δ = -ρ^{1-n} ∂_ρ(ρ^{n-1} ∂_ρ): c ρ^β ↦ -c β(β+n-2) ρ^{β-2}.
PowerSum laplacian(const PowerSum& expr);

PowerSum bilaplacian(const PowerSum& expr);

/// |∇e|² for a single radial monomial e = c ρ^β, i.e. c²β² ρ^{2β-2}.
/// Throws DomainError for multi-term input.
PowerSum grad_sq(const PowerSum& expr);

// --- finite-difference oracle -------------------------------------------

using RadialFunction = std::function<double(double)>;

/// Evaluation point for the finite-difference oracle. `stencil_width` is the
/// full reach of the stencil on either side of rho.
struct RadialSample {
    double rho;
    double stencil_width;
};

/// Eight-order central differences.
double fd_first(const RadialFunction& f, double rho, double width);
double fd_second(const RadialFunction& f, double rho, double width);
/// -(f'' + (n-1)/ρ f') by finite differences.
double fd_laplacian(const RadialFunction& f, int dim, double rho, double width);
/// Finite-difference Laplacian applied twice (inner stencil at a quarter of the width).
double fd_bilaplacian(const RadialFunction& f, int dim, double rho, double width);

enum class RadialOperator { laplacian, bilaplacian, grad_sq };

const char* to_string(RadialOperator op);

struct OracleRow {
    double rho;
    double symbolic;
    double finite_difference;
    double deviation;
};

struct OracleReport {
    std::vector<OracleRow> rows;
    double max_deviation = 0;
    double tolerance = 1e-6;
    bool pass = true;
};

/// Compare a symbolic result against the finite-difference application of `op` to `expr`.
/// Deviations are relative to max(|symbolic|, |fd|, |expr(ρ)| ρ^{-order}) so that
/// identically-zero results are measured against the natural scale of the operator.
/// Throws DomainError for samples with rho <= 2·stencil_width.
OracleReport oracle_check(const PowerSum& expr, const PowerSum& op_result, RadialOperator op,
                          std::span<const RadialSample> samples, double tolerance = 1e-6);

/// Same comparison for an arbitrary oracle value; `scale` supplies the natural magnitude floor.
OracleReport compare_to_oracle(const PowerSum& symbolic, const RadialFunction& oracle,
                               const RadialFunction& scale, std::span<const RadialSample> samples,
                               double tolerance = 1e-6);

/// `count` log-spaced samples in [lo, hi] with stencil width `relative_width`·ρ.
std::vector<RadialSample> log_samples(double lo, double hi, int count, double relative_width = 0.1);

} // namespace qcurv
