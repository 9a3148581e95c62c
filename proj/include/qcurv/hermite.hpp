#pragma once

#include "qcurv/bubble_expansion.hpp"
#include "qcurv/radial_field.hpp"

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace qcurv {

/// Uniform mesh of [0, rho_max] carrying C¹ cubic Hermite elements for radial H²
/// fields. Degrees of freedom are u(0) (with u'(0) = 0 built in) and (u, u') at the
/// interior nodes; u(rho_max) = u'(rho_max) = 0. Because the elements are conforming,
/// every discrete quotient is the exact quotient of a genuine H² function.
class HermiteMesh {
public:
    HermiteMesh(DimensionSpec dim, double rho_max, int elements);

    const DimensionSpec& dim() const { return dim_; }
    double rho_max() const { return rho_max_; }
    double spacing() const { return h_; }
    int elements() const { return m_; }
    int nodes() const { return m_ + 1; }
    int dofs() const { return 2 * m_ - 1; }
    double node(int i) const { return i * h_; }

    /// Global indices of (u_e, u'_e, u_{e+1}, u'_{e+1}) for element e; -1 marks a
    /// degree of freedom clamped to zero.
    std::array<int, 4> element_dofs(int e) const;
    /// Index of the value dof at node i, or -1 for the clamped outer node.
    int value_dof(int i) const;
    /// Index of the derivative dof at node i, or -1 at the center and outer node.
    int derivative_dof(int i) const;

private:
    DimensionSpec dim_;
    double rho_max_;
    double h_;
    int m_;
};

/// Coefficients of a cubic Hermite field on a HermiteMesh.
class HermiteField {
public:
    explicit HermiteField(std::shared_ptr<const HermiteMesh> mesh);
    HermiteField(std::shared_ptr<const HermiteMesh> mesh, std::vector<double> coefficients);

    /// Hermite interpolant of a profile known with its first derivative.
    static HermiteField interpolate(std::shared_ptr<const HermiteMesh> mesh,
                                    const std::function<Jet2(double)>& profile);

    const HermiteMesh& mesh() const { return *mesh_; }
    std::shared_ptr<const HermiteMesh> mesh_ptr() const { return mesh_; }
    std::span<const double> coefficients() const { return c_; }
    std::span<double> coefficients() { return c_; }

    Jet2 evaluate(double r) const;
    double value(double r) const { return evaluate(r).v; }
    /// u at every mesh node (last entry 0).
    std::vector<double> node_values() const;
    std::vector<double> node_derivatives() const;
    double max_abs() const;

private:
    std::shared_ptr<const HermiteMesh> mesh_;
    std::vector<double> c_;
};

/// ω ∫ (Δu)² r^{n-1} dr, exact for n ≤ 30.
SymBand hermite_bilaplacian_form(const HermiteMesh& mesh);
/// ω ∫ w(r) |u'|² r^{n-1} dr (16-point Gauss per element).
SymBand hermite_gradient_form(const HermiteMesh& mesh, const std::function<double(double)>& weight);
/// ω ∫ w(r) u² r^{n-1} dr (16-point Gauss per element).
SymBand hermite_mass_form(const HermiteMesh& mesh, const std::function<double(double)>& weight);

/// Quadrature nodes of the whole mesh with their ω r^{n-1} weights, used for the
/// nonlinear constraint term.
struct HermiteQuadrature {
    std::vector<double> r;
    std::vector<double> weight;
    /// Element of each node and the four local basis values there.
    std::vector<int> element;
    std::vector<std::array<double, 4>> basis;
};
HermiteQuadrature hermite_quadrature(const HermiteMesh& mesh);

} // namespace qcurv
