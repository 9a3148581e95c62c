#include "qcurv/radial_field.hpp"

#include "qcurv/errors.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <string>

namespace qcurv {

RadialGrid::RadialGrid(DimensionSpec dim, double rho_max, int intervals)
    : dim_(dim)
    , rho_max_(rho_max)
    , h_(rho_max / intervals)
    , m_(intervals)
{
    if (!(rho_max > 0) || intervals < 4)
        throw ConfigError("radial grid needs rho_max > 0 and at least 4 intervals");
    const double n = dim.n();
    auto ball = [n](double r) { return std::pow(r, n) / n; };
    volume_.resize(m_ + 1);
    area_.resize(m_);
    for (int i = 0; i <= m_; ++i) {
        const double lo = std::max(0.0, node(i) - 0.5 * h_);
        const double hi = std::min(rho_max_, node(i) + 0.5 * h_);
        volume_[i] = ball(hi) - ball(lo);
    }
    for (int i = 0; i < m_; ++i)
        area_[i] = std::pow(face(i), n - 1.0);
}

RadialField::RadialField(std::shared_ptr<const RadialGrid> grid)
    : grid_(std::move(grid))
    , values_(grid_->intervals() + 1, 0.0)
{
}

RadialField::RadialField(std::shared_ptr<const RadialGrid> grid, std::vector<double> values)
    : grid_(std::move(grid))
    , values_(std::move(values))
{
    if (values_.size() != static_cast<std::size_t>(grid_->intervals() + 1))
        throw ConfigError("field size does not match the grid");
    values_.back() = 0.0;
    for (double v : values_)
        if (!std::isfinite(v))
            throw NumericalError("non-finite value in radial field");
}

RadialField RadialField::sample(std::shared_ptr<const RadialGrid> grid,
                                const std::function<double(double)>& f)
{
    std::vector<double> v(grid->intervals() + 1);
    for (int i = 0; i <= grid->intervals(); ++i)
        v[i] = f(grid->node(i));
    return RadialField(std::move(grid), std::move(v));
}

double RadialField::max_abs() const
{
    double m = 0;
    for (double v : values_)
        m = std::max(m, std::abs(v));
    return m;
}

// --- SymBand -------------------------------------------------------------

SymBand::SymBand(int size, int bandwidth)
    : n_(size)
    , kd_(bandwidth)
    , diag_(static_cast<std::size_t>(bandwidth + 1) * size, 0.0)
{
}

double SymBand::entry(int i, int j) const
{
    if (i > j)
        std::swap(i, j);
    const int d = j - i;
    return d > kd_ ? 0.0 : at(i, d);
}

void SymBand::add(int i, int j, double v)
{
    if (i > j)
        std::swap(i, j);
    const int d = j - i;
    if (d > kd_)
        throw ConfigError("entry outside the band");
    at(i, d) += v;
}

std::vector<double> SymBand::apply(std::span<const double> x) const
{
    std::vector<double> y(n_, 0.0);
    for (int i = 0; i < n_; ++i) {
        y[i] += at(i, 0) * x[i];
        for (int d = 1; d <= kd_ && i + d < n_; ++d) {
            const double a = at(i, d);
            y[i] += a * x[i + d];
            y[i + d] += a * x[i];
        }
    }
    return y;
}

double SymBand::quadratic(std::span<const double> x) const
{
    const auto y = apply(x);
    double s = 0;
    for (int i = 0; i < n_; ++i)
        s += x[i] * y[i];
    return s;
}

SymBand& SymBand::operator+=(const SymBand& other)
{
    if (other.n_ != n_ || other.kd_ > kd_)
        throw ConfigError("band shape mismatch");
    for (int d = 0; d <= other.kd_; ++d)
        for (int i = 0; i + d < n_; ++i)
            at(i, d) += other.at(i, d);
    return *this;
}

BandCholesky::BandCholesky(const SymBand& a)
    : n_(a.size())
    , kd_(a.bandwidth())
    , ab_(static_cast<std::size_t>(kd_ + 1) * n_, 0.0)
{
    // Column-major upper band storage: AB(kd + i - j, j) = A(i, j).
    const int ldab = kd_ + 1;
    for (int j = 0; j < n_; ++j)
        for (int i = std::max(0, j - kd_); i <= j; ++i)
            ab_[(kd_ + i - j) + static_cast<std::size_t>(j) * ldab] = a.at(i, j - i);
    const lapack_int info = LAPACKE_dpbtrf(LAPACK_COL_MAJOR, 'U', n_, kd_, ab_.data(), ldab);
    if (info > 0)
        throw DivergenceError("quadratic form is not positive definite (leading minor "
                              + std::to_string(info) + ")");
    if (info < 0)
        throw NumericalError("dpbtrf rejected argument " + std::to_string(-info));
}

std::vector<double> BandCholesky::solve(std::span<const double> rhs) const
{
    std::vector<double> x(rhs.begin(), rhs.end());
    const lapack_int info =
        LAPACKE_dpbtrs(LAPACK_COL_MAJOR, 'U', n_, kd_, 1, ab_.data(), kd_ + 1, x.data(), n_);
    if (info != 0)
        throw NumericalError("dpbtrs failed");
    return x;
}

// --- discrete operators --------------------------------------------------

LaplacianRows discrete_laplacian(const RadialGrid& grid)
{
    const int m = grid.intervals();
    const double h = grid.spacing();
    const auto vol = grid.volumes();
    const auto area = grid.face_areas();
    LaplacianRows rows;
    rows.lower.assign(m + 1, 0.0);
    rows.center.assign(m + 1, 0.0);
    rows.upper.assign(m + 1, 0.0);
    for (int i = 0; i <= m; ++i) {
        const double left = i > 0 ? area[i - 1] : 0.0;
        const double right = i < m ? area[i] : 0.0; // zero flux through rho_max
        const double scale = 1.0 / (h * vol[i]);
        rows.center[i] = (left + right) * scale;
        rows.lower[i] = -left * scale;
        rows.upper[i] = -right * scale;
    }
    return rows;
}

std::vector<double> apply_laplacian(const RadialGrid& grid, std::span<const double> u)
{
    const int m = grid.intervals();
    const auto rows = discrete_laplacian(grid);
    auto value = [&](int i) { return i < m ? u[i] : 0.0; };
    std::vector<double> out(m + 1);
    for (int i = 0; i <= m; ++i) {
        double s = rows.center[i] * value(i);
        if (i > 0)
            s += rows.lower[i] * value(i - 1);
        if (i < m)
            s += rows.upper[i] * value(i + 1);
        out[i] = s;
    }
    return out;
}

SymBand bilaplacian_form(const RadialGrid& grid)
{
    const int m = grid.intervals();
    const double omega = grid.dim().omega();
    const auto vol = grid.volumes();
    const auto rows = discrete_laplacian(grid);
    SymBand k(m, 2);
    // Σ_i ω V_i (Σ_j L_ij u_j)²; row i touches unknowns i-1, i, i+1 (< m).
    for (int i = 0; i <= m; ++i) {
        int cols[3];
        double coef[3];
        int count = 0;
        if (i - 1 >= 0 && i - 1 < m) {
            cols[count] = i - 1;
            coef[count++] = rows.lower[i];
        }
        if (i < m) {
            cols[count] = i;
            coef[count++] = rows.center[i];
        }
        if (i + 1 < m) {
            cols[count] = i + 1;
            coef[count++] = rows.upper[i];
        }
        const double w = omega * vol[i];
        for (int a = 0; a < count; ++a)
            for (int b = a; b < count; ++b)
                k.add(cols[a], cols[b], w * coef[a] * coef[b]);
    }
    return k;
}

SymBand gradient_form(const RadialGrid& grid, const std::function<double(double)>& weight)
{
    const int m = grid.intervals();
    const double h = grid.spacing();
    const double omega = grid.dim().omega();
    const auto area = grid.face_areas();
    SymBand g(m, 2);
    for (int i = 0; i < m; ++i) {
        const double c = omega * weight(grid.face(i)) * area[i] / h;
        if (c == 0.0)
            continue;
        g.add(i, i, c);
        if (i + 1 < m) {
            g.add(i + 1, i + 1, c);
            g.add(i, i + 1, -c);
        }
    }
    return g;
}

SymBand mass_form(const RadialGrid& grid, const std::function<double(double)>& weight)
{
    const int m = grid.intervals();
    const double omega = grid.dim().omega();
    const auto vol = grid.volumes();
    SymBand b(m, 2);
    for (int i = 0; i < m; ++i)
        b.add(i, i, omega * vol[i] * weight(grid.node(i)));
    return b;
}

SymBand dirichlet_form(const RadialGrid& grid)
{
    const int m = grid.intervals();
    const double h = grid.spacing();
    const auto area = grid.face_areas();
    SymBand d(m, 1);
    for (int i = 0; i < m; ++i) {
        const double c = area[i] / h;
        d.add(i, i, c);
        if (i + 1 < m) {
            d.add(i + 1, i + 1, c);
            d.add(i, i + 1, -c);
        }
    }
    return d;
}

double weighted_power_integral(const RadialGrid& grid, std::span<const double> u,
                               const std::function<double(double)>& weight, double power)
{
    const auto vol = grid.volumes();
    double s = 0;
    for (int i = 0; i < grid.intervals(); ++i)
        s += vol[i] * weight(grid.node(i)) * std::pow(std::abs(u[i]), power);
    return grid.dim().omega() * s;
}

} // namespace qcurv
