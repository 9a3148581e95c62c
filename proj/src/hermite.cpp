#include "qcurv/hermite.hpp"

#include "qcurv/errors.hpp"
#include "qcurv/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace qcurv {

namespace {

/// Hermite basis on t ∈ [0,1] for an element of length h, with derivatives in r.
struct Basis {
    std::array<double, 4> v, d1, d2;
};

Basis hermite_basis(double t, double h)
{
    const double t2 = t * t, t3 = t2 * t;
    Basis b;
    b.v = {1 - 3 * t2 + 2 * t3, h * (t - 2 * t2 + t3), 3 * t2 - 2 * t3, h * (-t2 + t3)};
    b.d1 = {(-6 * t + 6 * t2) / h, 1 - 4 * t + 3 * t2, (6 * t - 6 * t2) / h, -2 * t + 3 * t2};
    b.d2 = {(-6 + 12 * t) / (h * h), (-4 + 6 * t) / h, (6 - 12 * t) / (h * h), (-2 + 6 * t) / h};
    return b;
}

/// Assemble ω Σ_e ∫ integrand(local i, local j) r^{n-1} dr over Gauss points.
template <class Entry>
SymBand assemble(const HermiteMesh& mesh, Entry&& entry)
{
    const auto& rule = unit_gauss_rule();
    const double h = mesh.spacing();
    const double n = mesh.dim().n();
    const double omega = mesh.dim().omega();
    SymBand k(mesh.dofs(), 3);
    for (int e = 0; e < mesh.elements(); ++e) {
        const auto dofs = mesh.element_dofs(e);
        double local[4][4] = {};
        for (std::size_t q = 0; q < rule.x.size(); ++q) {
            const double r = mesh.node(e) + h * rule.x[q];
            const Basis b = hermite_basis(rule.x[q], h);
            const double mu = omega * rule.w[q] * h * std::pow(r, n - 1.0);
            for (int i = 0; i < 4; ++i)
                for (int j = i; j < 4; ++j)
                    local[i][j] += mu * entry(b, r, i, j);
        }
        for (int i = 0; i < 4; ++i) {
            if (dofs[i] < 0)
                continue;
            for (int j = i; j < 4; ++j) {
                if (dofs[j] < 0 || local[i][j] == 0.0)
                    continue;
                if (dofs[i] == dofs[j])
                    k.add(dofs[i], dofs[i], local[i][j] * (i == j ? 1.0 : 2.0));
                else
                    k.add(dofs[i], dofs[j], local[i][j]);
            }
        }
    }
    return k;
}

} // namespace

HermiteMesh::HermiteMesh(DimensionSpec dim, double rho_max, int elements)
    : dim_(dim)
    , rho_max_(rho_max)
    , h_(rho_max / elements)
    , m_(elements)
{
    if (!(rho_max > 0))
        throw ConfigError("rho_max must be positive");
    if (elements < 2)
        throw ConfigError("Hermite mesh needs at least two elements");
}

int HermiteMesh::value_dof(int i) const
{
    if (i == 0)
        return 0;
    return i < m_ ? 2 * i - 1 : -1;
}

int HermiteMesh::derivative_dof(int i) const
{
    return (i > 0 && i < m_) ? 2 * i : -1;
}

std::array<int, 4> HermiteMesh::element_dofs(int e) const
{
    return {value_dof(e), derivative_dof(e), value_dof(e + 1), derivative_dof(e + 1)};
}

HermiteField::HermiteField(std::shared_ptr<const HermiteMesh> mesh)
    : mesh_(std::move(mesh))
    , c_(mesh_->dofs(), 0.0)
{
}

HermiteField::HermiteField(std::shared_ptr<const HermiteMesh> mesh, std::vector<double> coefficients)
    : mesh_(std::move(mesh))
    , c_(std::move(coefficients))
{
    if (static_cast<int>(c_.size()) != mesh_->dofs())
        throw ConfigError("Hermite field coefficient count does not match the mesh");
    for (double x : c_)
        if (!std::isfinite(x))
            throw ConfigError("Hermite field coefficients must be finite");
}

HermiteField HermiteField::interpolate(std::shared_ptr<const HermiteMesh> mesh,
                                       const std::function<Jet2(double)>& profile)
{
    HermiteField u(mesh);
    for (int i = 0; i < mesh->nodes(); ++i) {
        const Jet2 j = profile(mesh->node(i));
        if (const int d = mesh->value_dof(i); d >= 0)
            u.c_[d] = j.v;
        if (const int d = mesh->derivative_dof(i); d >= 0)
            u.c_[d] = j.d1;
    }
    return u;
}

Jet2 HermiteField::evaluate(double r) const
{
    if (r < 0 || r > mesh_->rho_max())
        return {};
    const double h = mesh_->spacing();
    const int e = std::min(static_cast<int>(r / h), mesh_->elements() - 1);
    const Basis b = hermite_basis((r - mesh_->node(e)) / h, h);
    const auto dofs = mesh_->element_dofs(e);
    Jet2 out;
    for (int k = 0; k < 4; ++k) {
        if (dofs[k] < 0)
            continue;
        out.v += c_[dofs[k]] * b.v[k];
        out.d1 += c_[dofs[k]] * b.d1[k];
        out.d2 += c_[dofs[k]] * b.d2[k];
    }
    return out;
}

std::vector<double> HermiteField::node_values() const
{
    std::vector<double> v(mesh_->nodes(), 0.0);
    for (int i = 0; i < mesh_->nodes(); ++i)
        if (const int d = mesh_->value_dof(i); d >= 0)
            v[i] = c_[d];
    return v;
}

std::vector<double> HermiteField::node_derivatives() const
{
    std::vector<double> v(mesh_->nodes(), 0.0);
    for (int i = 0; i < mesh_->nodes(); ++i)
        if (const int d = mesh_->derivative_dof(i); d >= 0)
            v[i] = c_[d];
    return v;
}

double HermiteField::max_abs() const
{
    double m = 0;
    for (double x : node_values())
        m = std::max(m, std::abs(x));
    return m;
}

SymBand hermite_bilaplacian_form(const HermiteMesh& mesh)
{
    const double n = mesh.dim().n();
    return assemble(mesh, [n](const Basis& b, double r, int i, int j) {
        const double li = b.d2[i] + (n - 1.0) / r * b.d1[i];
        const double lj = b.d2[j] + (n - 1.0) / r * b.d1[j];
        return li * lj;
    });
}

SymBand hermite_gradient_form(const HermiteMesh& mesh, const std::function<double(double)>& weight)
{
    return assemble(mesh, [&](const Basis& b, double r, int i, int j) { return weight(r) * b.d1[i] * b.d1[j]; });
}

SymBand hermite_mass_form(const HermiteMesh& mesh, const std::function<double(double)>& weight)
{
    return assemble(mesh, [&](const Basis& b, double r, int i, int j) { return weight(r) * b.v[i] * b.v[j]; });
}

HermiteQuadrature hermite_quadrature(const HermiteMesh& mesh)
{
    const auto& rule = unit_gauss_rule();
    const double h = mesh.spacing();
    const double n = mesh.dim().n();
    const double omega = mesh.dim().omega();
    HermiteQuadrature q;
    for (int e = 0; e < mesh.elements(); ++e) {
        for (std::size_t k = 0; k < rule.x.size(); ++k) {
            const double r = mesh.node(e) + h * rule.x[k];
            q.r.push_back(r);
            q.weight.push_back(omega * rule.w[k] * h * std::pow(r, n - 1.0));
            q.element.push_back(e);
            q.basis.push_back(hermite_basis(rule.x[k], h).v);
        }
    }
    return q;
}

} // namespace qcurv
