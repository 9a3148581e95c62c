#pragma once

#include "qcurv/special_constants.hpp"

#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace qcurv {

/// Uniform radial grid ρ_i = i h on [0, rho_max] with finite-volume cells
/// [ρ_i - h/2, ρ_i + h/2] ∩ [0, rho_max] measured by r^{n-1} dr (ω excluded).
class RadialGrid {
public:
    RadialGrid(DimensionSpec dim, double rho_max, int intervals);

    const DimensionSpec& dim() const { return dim_; }
    double rho_max() const { return rho_max_; }
    double spacing() const { return h_; }
    /// Number of intervals M; nodes are 0..M and node M carries the clamped value 0.
    int intervals() const { return m_; }
    /// Unknowns are nodes 0..M-1.
    int unknowns() const { return m_; }

    double node(int i) const { return i * h_; }
    double face(int i) const { return (i + 0.5) * h_; }
    std::span<const double> volumes() const { return volume_; }
    std::span<const double> face_areas() const { return area_; }

private:
    DimensionSpec dim_;
    double rho_max_;
    double h_;
    int m_;
    std::vector<double> volume_; // M+1 entries
    std::vector<double> area_;   // M entries, face i+1/2
};

/// Nodal values on a RadialGrid with u(rho_max) = u'(rho_max) = 0 and u'(0) = 0
/// built into the discrete operators; values has M+1 entries with the last one 0.
class RadialField {
public:
    explicit RadialField(std::shared_ptr<const RadialGrid> grid);
    RadialField(std::shared_ptr<const RadialGrid> grid, std::vector<double> values);

    static RadialField sample(std::shared_ptr<const RadialGrid> grid,
                              const std::function<double(double)>& f);

    const RadialGrid& grid() const { return *grid_; }
    std::shared_ptr<const RadialGrid> grid_ptr() const { return grid_; }
    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }
    /// First M entries: the free unknowns.
    std::span<const double> unknowns() const { return {values_.data(), values_.size() - 1}; }
    std::span<double> unknowns() { return {values_.data(), values_.size() - 1}; }
    double max_abs() const;

private:
    std::shared_ptr<const RadialGrid> grid_;
    std::vector<double> values_;
};

/// Symmetric banded matrix stored by upper diagonals: band(d)[i] = A(i, i+d).
class SymBand {
public:
    SymBand(int size, int bandwidth);

    int size() const { return n_; }
    int bandwidth() const { return kd_; }
    double& at(int i, int d) { return diag_[static_cast<std::size_t>(d) * n_ + i]; }
    double at(int i, int d) const { return diag_[static_cast<std::size_t>(d) * n_ + i]; }
    /// Entry (i, j) for any i, j.
    double entry(int i, int j) const;

    void add(int i, int j, double v);
    std::vector<double> apply(std::span<const double> x) const;
    double quadratic(std::span<const double> x) const;

    SymBand& operator+=(const SymBand& other);

private:
    int n_;
    int kd_;
    std::vector<double> diag_;
};

/// LAPACK band Cholesky of an SPD SymBand. Throws DivergenceError when the
/// matrix is not positive definite.
class BandCholesky {
public:
    explicit BandCholesky(const SymBand& a);
    std::vector<double> solve(std::span<const double> rhs) const;

private:
    int n_;
    int kd_;
    std::vector<double> ab_;
};

/// Discrete geometer's Laplacian rows 0..M on the unknowns (M+1 × M, tridiagonal).
/// Row i stores coefficients for columns i-1, i, i+1 (zero where absent).
struct LaplacianRows {
    std::vector<double> lower, center, upper;
};
LaplacianRows discrete_laplacian(const RadialGrid& grid);

/// (Lu)_i for i = 0..M.
std::vector<double> apply_laplacian(const RadialGrid& grid, std::span<const double> u);

/// ω Lᵀ V L: the matrix of ∫(Δu)² dμ.
SymBand bilaplacian_form(const RadialGrid& grid);
/// ω Σ faces w(ρ_{i+1/2}) S (Δu/h)² h: the matrix of ∫ w |∇u|² dμ.
SymBand gradient_form(const RadialGrid& grid, const std::function<double(double)>& weight);
/// ω Σ V_i w(ρ_i) u_i²: the matrix of ∫ w u² dμ.
SymBand mass_form(const RadialGrid& grid, const std::function<double(double)>& weight);
/// Σ S_{i+1/2}/h (u_{i+1}-u_i)²: the Dirichlet form (no ω), symmetric tridiagonal.
SymBand dirichlet_form(const RadialGrid& grid);

/// ω Σ V_i w(ρ_i) |u_i|^power.
double weighted_power_integral(const RadialGrid& grid, std::span<const double> u,
                               const std::function<double(double)>& weight, double power);

} // namespace qcurv
