#pragma once

#include "qcurv/hermite.hpp"
#include "qcurv/weights.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qcurv {

/// J_{γ,α}(u) = ∫(Δu)² + ∫ a ρ^{-γ}|∇u|² + ∫ Q_g ρ^{-α} u² with measure ω ρ^{n-1} dρ,
/// evaluated exactly on the Hermite field (up to Gauss quadrature of the weights).
double energy(const HermiteField& u, const SingularWeightConfig& w);

/// The symmetric banded matrix of the quadratic form J_{γ,α} on the Hermite dofs.
SymBand energy_form(const HermiteMesh& mesh, const SingularWeightConfig& w);

/// ∫ f |u|^N dμ.
double constraint_integral(const HermiteField& u, const std::function<double(double)>& f);

/// J(u) / (∫ f|u|^N)^{2/N}.
double quotient(const HermiteField& u, const SingularWeightConfig& w, const std::function<double(double)>& f);

struct MinimizeOptions {
    /// Dimension used when no initial field (and hence no grid) is supplied.
    int dimension = 6;
    double rho_max = 1.0;
    /// Mesh elements; 2047 elements give 2048 nodes.
    int intervals = 2047;
    /// Stationarity tolerance on el_residual.
    double tol = 1e-5;
    int max_iterations = 20000;
    /// Relative quotient change that counts as stalled, and the window it must hold over.
    double stall_change = 1e-10;
    int stall_window = 20;
    /// Bubble width of the default initial guess; NaN means 10·rho_min.
    double init_epsilon = std::numeric_limits<double>::quiet_NaN();
    /// Limited-memory pairs in the preconditioned quasi-Newton update.
    int memory = 8;
};

struct SolveResult {
    HermiteField minimizer;
    double quotient;
    double el_residual;
    int iterations;
    double constraint_defect;
    std::vector<double> history;
    bool converged;
};

/// Minimizes J_{γ,α}(u)/(∫f|u|^N)^{2/N} over radial fields. Each accepted step is
/// rescaled back onto ∫f|u|^N = 1; directions are preconditioned by the discrete
/// (Δ² + I)⁻¹ (a Sobolev gradient) and combined in a limited-memory
/// quasi-Newton update. Throws DivergenceError when the energy form is not positive definite
/// or the quotient turns negative (unbounded-below configuration).
SolveResult minimize(const SingularWeightConfig& w, const std::function<double(double)>& f,
                     std::optional<HermiteField> init, const MinimizeOptions& opts = {});

/// Hermite interpolant of the bubble (ρ² + ε²)^{-(n-4)/2}, cut off smoothly on
/// [rho_max/2, rho_max].
HermiteField bubble_field(std::shared_ptr<const HermiteMesh> mesh, double epsilon);

/// Euler–Lagrange residual of u in the dual norm of (Δ² + I), relative to ‖Q·f|u|^{N-2}u‖.
double el_residual(const HermiteField& u, const SingularWeightConfig& w, const std::function<double(double)>& f);

struct ContinuationStep {
    double gamma;
    double alpha;
    SolveResult result;
    /// |Q_k − Q_sharp|.
    double gap;
};

struct ContinuationResult {
    std::vector<ContinuationStep> steps;
    SolveResult sharp;
    /// Gaps strictly decreasing along the path.
    bool gaps_decreasing;
    /// Empirical K(n,2,-4)² used in the hypothesis gate and 1 + Q_g(0)·K².
    double k_sq_estimate;
    double hypothesis_margin;
};

/// Warm-started solves along a path (γ_k, α_k) → (2, 4), then the sharp solve at
/// (2, 4) with the same rho_min. Throws DivergenceError when 1 + Q_g(0)K(n,2,-4)² ≤ 0
/// with the empirical constant; errors inside a step are rethrown with the path index.
ContinuationResult sharp_continuation(const SingularWeightConfig& base,
                                      const std::vector<std::pair<double, double>>& path,
                                      const std::function<double(double)>& f, const DimensionSpec& dim,
                                      const MinimizeOptions& opts = {}, std::uint64_t seed = 0);

/// Exponent p with γ/p = -2 + n(1/2 - 1/p), i.e. p = 2(n+γ)/(n-4).
double weighted_exponent(const DimensionSpec& dim, double gamma);

struct WeightedConstantOptions {
    int family_size = 64;
    std::uint64_t seed = 0;
    double lambda = 1e-4;
    /// Explicit exponent; must satisfy the scaling relation. NaN means derived.
    double p = std::numeric_limits<double>::quiet_NaN();
};

struct WeightedConstantEstimate {
    double p;
    /// Largest quotient ‖u‖²_{p,ρ^γ} / (‖Δu‖² + λ‖u‖²) found: a lower bound for K(n,2,γ)².
    double k_sq;
    double best_epsilon;
    double best_decay;
};

/// Lower-bound estimate of K(n,2,γ)² over a seeded family of cut-off profiles
/// (r² + ε²)^{-s}; bubble members use s = (n-4)/2, random members perturb ε and s.
WeightedConstantEstimate estimate_weighted_constant(const DimensionSpec& dim, double gamma,
                                                    const WeightedConstantOptions& opts = {});

} // namespace qcurv
