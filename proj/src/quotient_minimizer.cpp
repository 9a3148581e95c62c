#include "qcurv/quotient_minimizer.hpp"

#include "qcurv/bubble_expansion.hpp"
#include "qcurv/errors.hpp"
#include "qcurv/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>

namespace qcurv {

namespace {

double dot(std::span<const double> a, std::span<const double> b)
{
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

/// Everything a solve needs on a fixed mesh: the energy matrix, the
/// preconditioner factors and the f-weighted quadrature of the constraint.
/// Stationarity is measured in the dual norm of (Δ² + I); search directions
/// use the full energy form plus the mass, which matches (Δ² + I) on the flat
/// problem and keeps the singular weights from stiffening the iteration.
class Problem {
public:
    Problem(std::shared_ptr<const HermiteMesh> mesh, const SingularWeightConfig& w,
            const std::function<double(double)>& f)
        : mesh_(std::move(mesh))
        , k_(energy_form(*mesh_, w))
        , precond_(preconditioner(*mesh_))
        , direction_(direction_preconditioner(*mesh_, k_))
        , quad_(hermite_quadrature(*mesh_))
        , big_n_(mesh_->dim().N())
    {
        for (std::size_t q = 0; q < quad_.r.size(); ++q) {
            const double fq = f(quad_.r[q]);
            if (!(fq > 0) || !std::isfinite(fq))
                throw ConfigError("f must be positive and finite on the mesh");
            quad_.weight[q] *= fq;
        }
        try {
            BandCholesky check(k_);
        } catch (const DivergenceError&) {
            throw DivergenceError("energy form is not positive definite: the quotient is unbounded below "
                                  "for these singular coefficients");
        }
    }

    double constraint(std::span<const double> u) const
    {
        double s = 0;
        for (std::size_t q = 0; q < quad_.r.size(); ++q)
            s += quad_.weight[q] * std::pow(std::abs(at(u, q)), big_n_);
        return s;
    }

    /// Rescales u onto the constraint set; returns the quotient.
    double normalize(std::vector<double>& u) const
    {
        const double g = constraint(u);
        if (!(g > 0) || !std::isfinite(g))
            throw NumericalError("iterate left the admissible set (zero or non-finite constraint)");
        const double c = std::pow(g, -1.0 / big_n_);
        for (double& x : u)
            x *= c;
        return k_.quadratic(u);
    }

    /// m(u)_k = ∫ f |u|^{N-2} u φ_k dμ: the constraint gradient divided by N.
    std::vector<double> nonlinear(std::span<const double> u) const
    {
        std::vector<double> m(u.size(), 0.0);
        for (std::size_t q = 0; q < quad_.r.size(); ++q) {
            const double uq = at(u, q);
            const double c = quad_.weight[q] * std::pow(std::abs(uq), big_n_ - 2.0) * uq;
            const auto dofs = mesh_->element_dofs(quad_.element[q]);
            for (int k = 0; k < 4; ++k)
                if (dofs[k] >= 0)
                    m[dofs[k]] += c * quad_.basis[q][k];
        }
        return m;
    }

    /// Ku − Q m(u) for normalized u.
    std::vector<double> residual(std::span<const double> u, double q) const
    {
        auto r = k_.apply(u);
        const auto m = nonlinear(u);
        for (std::size_t i = 0; i < r.size(); ++i)
            r[i] -= q * m[i];
        return r;
    }

    double el(std::span<const double> u, double q, std::span<const double> r) const
    {
        const auto m = nonlinear(u);
        const auto pr = precond_.solve(r);
        const auto pm = precond_.solve(m);
        return std::sqrt(std::max(dot(r, pr), 0.0)) / (std::abs(q) * std::sqrt(dot(m, pm)));
    }

    std::vector<double> precondition(std::span<const double> x) const { return direction_.solve(x); }

private:
    double at(std::span<const double> u, std::size_t q) const
    {
        const auto dofs = mesh_->element_dofs(quad_.element[q]);
        double v = 0;
        for (int k = 0; k < 4; ++k)
            if (dofs[k] >= 0)
                v += u[dofs[k]] * quad_.basis[q][k];
        return v;
    }

    static BandCholesky preconditioner(const HermiteMesh& mesh)
    {
        SymBand p = hermite_bilaplacian_form(mesh);
        p += hermite_mass_form(mesh, [](double) { return 1.0; });
        return BandCholesky(p);
    }

    static BandCholesky direction_preconditioner(const HermiteMesh& mesh, const SymBand& k)
    {
        SymBand p = k;
        p += hermite_mass_form(mesh, [](double) { return 1.0; });
        return BandCholesky(p);
    }

    std::shared_ptr<const HermiteMesh> mesh_;
    SymBand k_;
    BandCholesky precond_;
    BandCholesky direction_;
    HermiteQuadrature quad_;
    double big_n_;
};

} // namespace

SymBand energy_form(const HermiteMesh& mesh, const SingularWeightConfig& w)
{
    w.validate();
    SymBand k = hermite_bilaplacian_form(mesh);
    k += hermite_gradient_form(mesh, [&](double r) { return w.gradient_weight(r); });
    k += hermite_mass_form(mesh, [&](double r) { return w.potential_weight(r); });
    return k;
}

double energy(const HermiteField& u, const SingularWeightConfig& w)
{
    return energy_form(u.mesh(), w).quadratic(u.coefficients());
}

double constraint_integral(const HermiteField& u, const std::function<double(double)>& f)
{
    const auto quad = hermite_quadrature(u.mesh());
    const double big_n = u.mesh().dim().N();
    double s = 0;
    for (std::size_t q = 0; q < quad.r.size(); ++q)
        s += quad.weight[q] * f(quad.r[q]) * std::pow(std::abs(u.value(quad.r[q])), big_n);
    return s;
}

double quotient(const HermiteField& u, const SingularWeightConfig& w, const std::function<double(double)>& f)
{
    const double g = constraint_integral(u, f);
    if (!(g > 0))
        throw DomainError("quotient of the zero field is undefined");
    return energy(u, w) / std::pow(g, 2.0 / u.mesh().dim().N());
}

HermiteField bubble_field(std::shared_ptr<const HermiteMesh> mesh, double epsilon)
{
    const BubbleProfile profile(mesh->dim(), epsilon, Cutoff{0.5 * mesh->rho_max(), mesh->rho_max()});
    return HermiteField::interpolate(mesh, [&](double r) { return profile.evaluate(r); });
}

double el_residual(const HermiteField& u, const SingularWeightConfig& w, const std::function<double(double)>& f)
{
    const Problem problem(u.mesh_ptr(), w, f);
    std::vector<double> x(u.coefficients().begin(), u.coefficients().end());
    const double q = problem.normalize(x);
    return problem.el(x, q, problem.residual(x, q));
}

SolveResult minimize(const SingularWeightConfig& w, const std::function<double(double)>& f,
                     std::optional<HermiteField> init, const MinimizeOptions& opts)
{
    if (opts.tol <= 0 || opts.max_iterations < 1 || opts.stall_window < 1 || opts.memory < 0)
        throw ConfigError("invalid minimizer options");
    w.validate();
    std::shared_ptr<const HermiteMesh> grid;
    if (init)
        grid = init->mesh_ptr();
    else
        grid = std::make_shared<HermiteMesh>(DimensionSpec(opts.dimension), opts.rho_max, opts.intervals);
    if (w.rho_min < 2.0 * grid->spacing() * (1.0 - 1e-12))
        throw ConfigError("rho_min must be at least twice the grid spacing");
    const Problem problem(grid, w, f);

    if (!init) {
        const double eps = std::isnan(opts.init_epsilon) ? 10.0 * w.rho_min : opts.init_epsilon;
        init = bubble_field(grid, eps);
    }
    std::vector<double> u(init->coefficients().begin(), init->coefficients().end());
    double q = problem.normalize(u);
    auto r = problem.residual(u, q);

    SolveResult result{HermiteField(grid), q, 0.0, 0, 0.0, {q}, false};
    std::deque<std::pair<std::vector<double>, std::vector<double>>> memory; // (s, y)
    double h0 = 0.5;

    auto direction = [&](const std::vector<double>& g) {
        std::vector<double> d = g;
        std::vector<double> rho_k(memory.size()), a(memory.size());
        for (int k = static_cast<int>(memory.size()) - 1; k >= 0; --k) {
            const auto& [s, y] = memory[k];
            rho_k[k] = 1.0 / dot(y, s);
            a[k] = rho_k[k] * dot(s, d);
            for (std::size_t i = 0; i < d.size(); ++i)
                d[i] -= a[k] * y[i];
        }
        d = problem.precondition(d);
        for (double& x : d)
            x *= h0;
        for (std::size_t k = 0; k < memory.size(); ++k) {
            const auto& [s, y] = memory[k];
            const double b = rho_k[k] * dot(y, d);
            for (std::size_t i = 0; i < d.size(); ++i)
                d[i] += (a[k] - b) * s[i];
        }
        for (double& x : d)
            x = -x;
        return d;
    };

    std::vector<double> g(r.size());
    for (std::size_t i = 0; i < r.size(); ++i)
        g[i] = 2.0 * r[i];
    double el = problem.el(u, q, r);

    int iter = 0;
    for (; iter < opts.max_iterations; ++iter) {
        const int hist = static_cast<int>(result.history.size());
        if (el < opts.tol && hist > opts.stall_window) {
            const double old = result.history[hist - 1 - opts.stall_window];
            if (std::abs(old - q) <= opts.stall_change * std::abs(q)) {
                result.converged = true;
                break;
            }
        }
        auto d = direction(g);
        double slope = dot(g, d);
        if (!(slope < 0)) {
            memory.clear();
            h0 = 0.5;
            d = direction(g);
            slope = dot(g, d);
        }
        bool accepted = false;
        std::vector<double> trial;
        double qt = q;
        for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
            double t = 1.0;
            for (int bt = 0; bt < 60; ++bt, t *= 0.5) {
                trial = u;
                for (std::size_t i = 0; i < trial.size(); ++i)
                    trial[i] += t * d[i];
                qt = problem.normalize(trial);
                if (qt < 0)
                    throw DivergenceError("quotient became negative: configuration is unbounded below");
                if (qt <= q + 1e-4 * t * slope && qt <= q) {
                    accepted = true;
                    break;
                }
            }
            if (!accepted && !memory.empty()) {
                memory.clear();
                h0 = 0.5;
                d = direction(g);
                slope = dot(g, d);
            } else {
                break;
            }
        }
        if (!accepted)
            break; // no descent left at working precision
        const auto r_new = problem.residual(trial, qt);
        std::vector<double> g_new(r_new.size()), s(u.size()), y(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) {
            g_new[i] = 2.0 * r_new[i];
            s[i] = trial[i] - u[i];
            y[i] = g_new[i] - g[i];
        }
        const double sy = dot(s, y);
        if (opts.memory > 0 && sy > 1e-14 * std::sqrt(dot(s, s) * dot(y, y))) {
            const auto py = problem.precondition(y);
            h0 = sy / dot(y, py);
            memory.emplace_back(std::move(s), std::move(y));
            if (static_cast<int>(memory.size()) > opts.memory)
                memory.pop_front();
        }
        u = std::move(trial);
        q = qt;
        r = r_new;
        g = std::move(g_new);
        el = problem.el(u, q, r);
        result.history.push_back(q);
    }
    if (!result.converged && el < opts.tol) {
        // Descent exhausted at working precision with a stationary iterate.
        result.converged = true;
    }
    result.minimizer = HermiteField(grid, u);
    result.quotient = q;
    result.el_residual = el;
    result.iterations = iter;
    result.constraint_defect = std::abs(problem.constraint(u) - 1.0);
    if (!result.converged)
        throw NumericalError("minimizer did not converge in " + std::to_string(iter)
                             + " iterations (el_residual " + std::to_string(el) + ")");
    return result;
}

namespace {

template <class Fn>
auto with_step_context(std::size_t index, Fn&& fn)
{
    const std::string prefix = "continuation step " + std::to_string(index) + ": ";
    try {
        return fn();
    } catch (const DivergenceError& e) {
        throw DivergenceError(prefix + e.what());
    } catch (const ResolutionError& e) {
        throw ResolutionError(prefix + e.what());
    } catch (const NumericalError& e) {
        throw NumericalError(prefix + e.what());
    } catch (const ConfigError& e) {
        throw ConfigError(prefix + e.what());
    }
}

} // namespace

ContinuationResult sharp_continuation(const SingularWeightConfig& base,
                                      const std::vector<std::pair<double, double>>& path,
                                      const std::function<double(double)>& f, const DimensionSpec& dim,
                                      const MinimizeOptions& opts, std::uint64_t seed)
{
    if (path.empty())
        throw ConfigError("continuation path is empty");
    for (std::size_t k = 0; k < path.size(); ++k) {
        const auto [g, a] = path[k];
        if (g > 2.0 || a > 4.0)
            throw ConfigError("continuation path must stay at or below (2, 4)");
        if (k > 0 && !(g > path[k - 1].first && a > path[k - 1].second))
            throw ConfigError("continuation path must be strictly increasing toward (2, 4)");
    }

    WeightedConstantOptions kopts;
    kopts.seed = seed;
    const double k_sq = estimate_weighted_constant(dim, -4.0, kopts).k_sq;
    const double margin = 1.0 + base.b_profile(0.0) * k_sq;
    if (margin <= 0)
        throw DivergenceError("sharp hypothesis 1 + Q_g(P)K(n,2,-4)^2 > 0 fails with the empirical "
                              "estimate K^2 = " + std::to_string(k_sq)
                              + "; the sharp quotient is not bounded below");

    auto grid = std::make_shared<HermiteMesh>(dim, opts.rho_max, opts.intervals);
    std::optional<HermiteField> warm;
    std::vector<ContinuationStep> steps;
    for (std::size_t k = 0; k < path.size(); ++k) {
        SingularWeightConfig w = base;
        w.gamma = path[k].first;
        w.alpha = path[k].second;
        if (!warm) {
            const double eps = std::isnan(opts.init_epsilon) ? 10.0 * w.rho_min : opts.init_epsilon;
            warm = bubble_field(grid, eps);
        }
        auto res = with_step_context(k, [&] { return minimize(w, f, warm, opts); });
        warm = res.minimizer;
        steps.push_back({w.gamma, w.alpha, std::move(res), 0.0});
    }
    const bool ends_sharp = path.back().first == 2.0 && path.back().second == 4.0;
    SolveResult sharp = ends_sharp ? steps.back().result : with_step_context(path.size(), [&] {
        SingularWeightConfig w = base;
        w.gamma = 2.0;
        w.alpha = 4.0;
        return minimize(w, f, warm, opts);
    });
    ContinuationResult out{std::move(steps), std::move(sharp), true, k_sq, margin};
    for (std::size_t k = 0; k < out.steps.size(); ++k) {
        out.steps[k].gap = std::abs(out.steps[k].result.quotient - out.sharp.quotient);
        if (k > 0 && !(out.steps[k].gap < out.steps[k - 1].gap))
            out.gaps_decreasing = false;
    }
    return out;
}

double weighted_exponent(const DimensionSpec& dim, double gamma)
{
    const double n = dim.n();
    return 2.0 * (n + gamma) / (n - 4.0);
}

WeightedConstantEstimate estimate_weighted_constant(const DimensionSpec& dim, double gamma,
                                                    const WeightedConstantOptions& opts)
{
    const double n = dim.n();
    const double derived = weighted_exponent(dim, gamma);
    double p = derived;
    if (!std::isnan(opts.p)) {
        if (std::abs(gamma / opts.p - (-2.0 + n * (0.5 - 1.0 / opts.p))) > 1e-12 * std::max(1.0, std::abs(gamma)))
            throw ConfigError("exponent relation gamma/p = -2 + n(1/2 - 1/p) violated");
        p = opts.p;
    }
    if (!(p >= 2.0))
        throw ConfigError("weighted exponent p = 2(n+gamma)/(n-4) must be at least 2 (gamma >= -4)");
    if (opts.family_size < 2 || !(opts.lambda >= 0))
        throw ConfigError("estimate needs family_size >= 2 and lambda >= 0");

    const double omega = dim.omega();
    const double s0 = 0.5 * (n - 4.0);
    auto evaluate = [&](double eps, double decay) {
        const BubbleProfile profile(dim, eps, Cutoff{0.5, 1.0}, decay);
        std::vector<double> breaks{0.0};
        breaks = merge_breaks(breaks, geometric_breaks(eps * 1e-6, 0.5, 12));
        breaks = merge_breaks(breaks, uniform_breaks(0.5, 1.0, 24));
        const PanelQuadrature rule(breaks);
        const auto v = rule.integrate_many(
            [&](double r, std::span<double> out) {
                const Jet2 j = profile.evaluate(r);
                const double lap = -(j.d2 + (n - 1.0) / r * j.d1);
                const double mu = omega * std::pow(r, n - 1.0);
                out[0] = mu * lap * lap;
                out[1] = mu * j.v * j.v;
                out[2] = mu * std::pow(r, gamma) * std::pow(std::abs(j.v), p);
            },
            3);
        return std::pow(v[2], 2.0 / p) / (v[0] + opts.lambda * v[1]);
    };

    WeightedConstantEstimate best{p, -1.0, 0.0, 0.0};
    auto consider = [&](double eps, double decay) {
        const double value = evaluate(eps, decay);
        if (std::isfinite(value) && value > best.k_sq)
            best = {p, value, eps, decay};
    };
    const int bubbles = opts.family_size / 2;
    for (int k = 0; k < bubbles; ++k) {
        const double t = bubbles == 1 ? 0.0 : static_cast<double>(k) / (bubbles - 1);
        consider(std::pow(10.0, -0.5 - 3.5 * t), s0);
    }
    std::mt19937_64 rng(opts.seed);
    auto uniform = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    for (int k = bubbles; k < opts.family_size; ++k) {
        const double eps = std::pow(10.0, -0.5 - 3.5 * uniform());
        const double decay = s0 * (1.0 + 0.25 * (2.0 * uniform() - 1.0));
        consider(eps, decay);
    }
    return best;
}

} // namespace qcurv
