/// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit when any fails.
#include "qcurv/bubble_expansion.hpp"
#include "qcurv/conformal_geometry.hpp"
#include "qcurv/errors.hpp"
#include "qcurv/harness.hpp"
#include "qcurv/quotient_minimizer.hpp"
#include "qcurv/regularity.hpp"
#include "qcurv/special_constants.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace qcurv;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

int failures = 0;

void criterion(int id, const char* title, double budget_seconds, const std::function<Outcome()>& body)
{
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = budget_seconds <= 0 || secs < budget_seconds;
    const bool pass = o.pass && in_time;
    if (!pass)
        ++failures;
    std::printf("%s criterion %d: %s [%s; %.2f s%s]\n", pass ? "PASS" : "FAIL", id, title, o.detail.c_str(), secs,
                in_time ? "" : ", over time budget");
    std::fflush(stdout);
}

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

const auto unit_f = [](double) { return 1.0; };

Outcome beta_oracle()
{
    double worst = 0;
    int count = 0;
    for (int p = 3; p <= 16; ++p)
        for (int q = 0; q <= p - 2; ++q) {
            const double quad = beta_integral_quadrature(p, q);
            worst = std::max(worst, std::abs(beta_integral(p, q) - quad) / quad);
            ++count;
        }
    return {worst < 1e-10, std::to_string(count) + " lattice points, worst relative deviation " + fmt("%.3g", worst)};
}

Outcome recursion_identity()
{
    double worst = 0;
    for (int p = 3; p <= 16; ++p)
        for (int q = 0; q + 2 < p; ++q) {
            const double next = beta_integral(p, q + 1);
            worst = std::max(worst, std::abs(beta_recursion_step(p, q, beta_integral(p, q)) - next) / next);
        }
    return {worst < 1e-12, "worst relative residual " + fmt("%.3g", worst)};
}

Outcome flat_bubble_limit()
{
    bool ok = true;
    std::string detail;
    for (int n : {6, 8}) {
        const DimensionSpec dim(n);
        const auto s = verify_expansion(dim, {}, 0.0, default_epsilons());
        const double target = best_sobolev_sq_inv(dim);
        const double rel = std::abs(s.c0 - target) / target;
        ok = ok && rel < 0.01;
        detail += "n=" + std::to_string(n) + " c0=" + fmt("%.6f", s.c0) + " target=" + fmt("%.6f", target)
            + " rel=" + fmt("%.2g", rel) + "; ";
    }
    detail.resize(detail.size() - 2);
    return {ok, detail};
}

Outcome bubble_slopes()
{
    bool ok = true;
    std::string detail;
    for (int n : {8, 10}) {
        for (const auto& c : mass_scaling(DimensionSpec(n), 3.0, default_epsilons(), Cutoff::doubling(0.5))) {
            ok = ok && c.within_tolerance;
            detail += "(" + std::to_string(n) + ",3) " + c.term + " " + fmt("%.4f", c.measured) + " vs "
                + fmt("%.4f", c.predicted) + (c.within_tolerance ? "" : " MISMATCH, substitution gives " + fmt("%.4f", c.derived))
                + "; ";
        }
    }
    detail.resize(detail.size() - 2);
    return {ok, detail};
}

Outcome radial_audit()
{
    bool ok = true;
    std::string detail;
    double worst = 0;
    int quantities = 0;
    for (int n : {6, 8})
        for (double a : {1.2, 1.5, 1.8}) {
            const ConformalFactor cf(a, n);
            for (const auto& row : audit_derivatives(cf, log_samples(0.05, 5.0, 8))) {
                ok = ok && row.report.pass && row.report.rows.size() >= 8;
                worst = std::max(worst, row.report.max_deviation);
                ++quantities;
            }
            bool sign_flag = false, factor_flag = false;
            for (const auto& c : audit_printed_coefficients(cf)) {
                sign_flag = sign_flag || (c.quantity == "bilap_log_a" && !c.agree);
                factor_flag = factor_flag || (c.quantity == "lap_grad_sq_log_a" && !c.agree);
            }
            ok = ok && sign_flag && factor_flag;
        }
    detail = std::to_string(quantities) + " oracle comparisons, worst deviation " + fmt("%.2g", worst)
        + "; printed Δ²log A sign and (n-2-α) factor listed as disagreements";
    return {ok, detail};
}

Outcome threshold_sanity()
{
    const ConformalFactor cf(1.5, 6);
    const auto t = thresholds(cf);
    const auto pc = paneitz_coefficients(cf);
    const auto calc = log_factor_calculus(cf);
    bool ok = t.rho1 == 14.0625 && t.rho2 == 9.0;
    const auto lap_alpha = laplacian(pc.alpha_tilde);
    struct Cond {
        const char* name;
        std::function<bool(double)> holds;
        double upper;
    };
    const std::vector<Cond> conds{
        {"Y<0", [&](double r) { return calc.fourth_order(r) < 0; }, t.rho1},
        {"Δα̃>0", [&](double r) { return lap_alpha(r) > 0; }, t.rho1},
        {"α̃>0", [&](double r) { return pc.alpha_tilde(r) > 0; }, t.rho2},
        {"α̃²-4β̃<0", [&](double r) { return pc.discriminant(r) < 0; }, t.rho3},
    };
    std::string detail = "rho1=" + fmt("%.10g", t.rho1) + " rho2=" + fmt("%.10g", t.rho2);
    for (const auto& c : conds) {
        const double hi = std::min(1.0, c.upper);
        int bad = 0;
        for (int i = 0; i <= 100000; ++i) {
            const double r = 0.01 + (hi - 0.01) * i / 100000.0;
            if (!c.holds(r))
                ++bad;
        }
        ok = ok && bad == 0;
        detail += std::string("; ") + c.name + " on (0.01," + fmt("%.4g", hi) + "): " + std::to_string(bad) + " violations";
    }
    return {ok, detail};
}

Outcome minimizer_stationarity()
{
    const double rho_min = 1e-3;
    struct Config {
        const char* name;
        SingularWeightConfig w;
    };
    auto flat = SingularWeightConfig::flat();
    flat.rho_min = rho_min;
    const std::vector<Config> configs{{"flat", flat},
                                      {"gamma=1.5 alpha=3", SingularWeightConfig::constant(1.5, 3.0, 1.0, 1.0, rho_min)},
                                      {"sharp", SingularWeightConfig::constant(2.0, 4.0, 1.0, 1.0, rho_min)}};
    MinimizeOptions opts; // 2047 elements: 2048 nodes
    bool ok = true;
    std::string detail;
    for (const auto& c : configs) {
        const auto r = minimize(c.w, unit_f, std::nullopt, opts);
        bool monotone = true;
        for (std::size_t i = 1; i < r.history.size(); ++i)
            monotone = monotone && r.history[i] <= r.history[i - 1];
        const double eps = 10 * rho_min;
        const auto bubble = bubble_energy(BubbleProfile(DimensionSpec(6), eps, Cutoff{0.5, 1.0}), &c.w, unit_f);
        const bool good = r.converged && r.el_residual < 1e-5 && r.constraint_defect < 1e-8 && monotone
            && r.quotient <= bubble.quotient + 1e-6;
        ok = ok && good;
        detail += std::string(c.name) + ": Q=" + fmt("%.6f", r.quotient) + " bubble=" + fmt("%.6f", bubble.quotient)
            + " el=" + fmt("%.2g", r.el_residual) + " defect=" + fmt("%.2g", r.constraint_defect)
            + (monotone ? "" : " NON-MONOTONE") + "; ";
    }
    detail.resize(detail.size() - 2);
    return {ok, detail};
}

constexpr int continuation_elements = CONTINUATION_ELEMENTS;

Outcome sharp_continuation_check()
{
    MinimizeOptions opts;
    opts.intervals = continuation_elements;
    const auto base = SingularWeightConfig::constant(1.5, 3.0, 1.0, 1.0, 1e-3);
    const auto c = sharp_continuation(base, {{1.5, 3.0}, {1.8, 3.6}, {1.95, 3.9}}, unit_f, DimensionSpec(6), opts);
    const double rel = c.steps.back().gap / std::abs(c.sharp.quotient);
    std::string detail = std::to_string(continuation_elements) + " elements, Q_sharp=" + fmt("%.6f", c.sharp.quotient)
        + ", relative gaps";
    for (const auto& s : c.steps)
        detail += " " + fmt("%.3e", s.gap / std::abs(c.sharp.quotient));
    detail += c.gaps_decreasing ? " (strictly decreasing)" : " (NOT decreasing)";
    return {c.gaps_decreasing && rel < 1e-3, detail};
}

DecayRegime direct_regime(int n, double p, int j)
{
    const double lhs = (j + 1) * p / (p + j);
    const double rhs = n / 4.0;
    if (std::abs(lhs - rhs) <= 1e-12 * rhs)
        return DecayRegime::log;
    return lhs > rhs ? DecayRegime::bounded : DecayRegime::power;
}

std::vector<double> p_grid(int n)
{
    std::vector<double> ps;
    const double lo = n / 4.0, hi = 3.0 * n;
    for (int k = 1; k <= 20; ++k)
        ps.push_back(lo + (hi - lo) * k / 20.0);
    return ps;
}

Outcome giraud_oracle()
{
    int checked = 0, mismatches = 0, scan_mismatches = 0;
    for (int n = 5; n <= 12; ++n)
        for (double p : p_grid(n)) {
            for (int j = 0; j <= n; ++j) {
                ++checked;
                if (giraud_classify(n, p, j).regime != direct_regime(n, p, j))
                    ++mismatches;
            }
            int j = 0;
            while (direct_regime(n, p, j) != DecayRegime::bounded)
                ++j;
            if (first_bounded_iterate(n, p) != j)
                ++scan_mismatches;
        }
    return {mismatches == 0 && scan_mismatches == 0,
            std::to_string(checked) + " regime decisions, " + std::to_string(mismatches) + " mismatches; "
                + std::to_string(scan_mismatches) + " first-bounded mismatches"};
}

Outcome regularity_exponent()
{
    const auto c = regularity_class(8, 3.0);
    bool ok = c.k == 2 && std::abs(c.exponent - 2.625) < 1e-14 && c.beta_lo == 0.0
        && std::abs(c.beta_hi - 0.625) < 1e-14;
    int outside = 0;
    for (int n = 5; n <= 12; ++n)
        for (double p : p_grid(n)) {
            const double e = regularity_class(n, p).exponent;
            if (!(e > 2.0 && e <= 3.0))
                ++outside;
        }
    ok = ok && outside == 0;
    return {ok, "(8,3) -> C^{" + std::to_string(c.k) + "," + fmt("%.4g", c.fraction) + "} beta in (0," + fmt("%.4g", c.beta_hi)
                    + "); " + std::to_string(outside) + " grid exponents outside (2,3]"};
}

Outcome positive_comparison_check()
{
    const DimensionSpec dim(6);
    const ConformalFactor cf(1.5, 6);
    const double rho2 = threshold_rho2(1.5, 6);
    const double rho_max = 0.9 * rho2;
    auto grid = std::make_shared<const RadialGrid>(dim, rho_max, 2048);
    const auto at = sample_on_grid(paneitz_coefficients(cf).alpha_tilde, *grid, grid->spacing());
    std::mt19937_64 rng(20240601);
    std::normal_distribution<double> coef(0.0, 1.0);
    std::uniform_real_distribution<double> freq(0.5, 8.0);
    double worst_margin = INFINITY, worst_constraint = 0;
    for (int trial = 0; trial < 20; ++trial) {
        double a[5], w[3];
        for (double& x : a)
            x = coef(rng);
        for (double& x : w)
            x = freq(rng);
        // Smooth, even in ρ at the origin, vanishing at rho_max.
        auto u = RadialField::sample(grid, [&](double r) {
            const double s = r / rho_max;
            const double g = a[0] + a[1] * std::cos(w[0] * s) + a[2] * std::exp(-w[1] * s * s) + a[3] * s * s
                + a[4] * std::sin(w[2] * s * s);
            return g * (1 - s * s) * (1 - s * s);
        });
        const auto res = positive_comparison(at, u, unit_f);
        worst_margin = std::min(worst_margin, res.min_margin / u.max_abs());
        const double mass = weighted_power_integral(*grid, res.v_hat.unknowns(), unit_f, dim.N());
        worst_constraint = std::max(worst_constraint, std::abs(mass - 1.0));
    }
    return {worst_margin >= -1e-8 && worst_constraint < 1e-8,
            "20 fields on [0," + fmt("%.3g", rho_max) + "], worst min(v-|u|)/|u|_inf=" + fmt("%.3g", worst_margin)
                + ", worst constraint defect " + fmt("%.2g", worst_constraint)};
}

Outcome determinism()
{
    const std::vector<std::string> configs{
        R"({"command": "constants", "parameters": {"n": 6}, "seed": 1})",
        R"({"command": "audit-derivatives", "parameters": {"n": 8, "alpha": 1.8}, "seed": 1})",
        R"({"command": "thresholds", "parameters": {"n": 6, "alpha": 1.5}, "seed": 1})",
        R"({"command": "check-hypothesis", "parameters": {"variant": "n6", "Rg": -0.1, "a": 1}, "seed": 1})",
        R"({"command": "bubble", "parameters": {"n": 8, "p": 3}, "seed": 1})",
        R"({"command": "minimize", "parameters": {"n": 6, "gamma": 1.5, "alpha": 3, "a": 1, "b": 1, "rho_min": 0.001}, "seed": 1})",
        R"({"command": "continuation", "parameters": {"n": 6, "intervals": 511, "rho_min": 0.004}, "seed": 3})",
        R"({"command": "regularity", "parameters": {"n": 8, "p": 3, "ks_l": 6}, "seed": 1})",
    };
    int mismatched = 0, failed = 0;
    std::string errors;
    for (const auto& c : configs) {
        const auto a = run(c);
        const auto b = run(c);
        if (a.exit_code != ExitCode::ok) {
            ++failed;
            errors += "; " + a.error;
        }
        if (a.payload_hash != b.payload_hash || a.payload != b.payload)
            ++mismatched;
    }
    const std::string tmpl = R"({"command": "regularity", "parameters": {"n": 8, "p": 3}})";
    const std::string axis = R"({"p": [2.4, 3, 5, 9]})";
    const auto serial = aggregate(sweep(tmpl, axis, 1), axis);
    const auto parallel = aggregate(sweep(tmpl, axis, 4), axis);
    const bool sweep_ok = serial.payload_hash == parallel.payload_hash;
    return {mismatched == 0 && failed == 0 && sweep_ok,
            std::to_string(configs.size()) + " configurations run twice, " + std::to_string(mismatched)
                + " hash mismatches, " + std::to_string(failed) + " failed runs; sweep serial vs parallel "
                + (sweep_ok ? "identical" : "DIFFERENT") + errors};
}

} // namespace

int main()
{
    criterion(1, "Beta-integral oracle equivalence", 5, beta_oracle);
    criterion(2, "Recursion identity", 1, recursion_identity);
    criterion(3, "Flat-bubble quotient limit", 120, flat_bubble_limit);
    criterion(4, "Bubble scaling exponents", 120, bubble_slopes);
    criterion(5, "Radial-operator audit", 5, radial_audit);
    criterion(6, "Threshold sanity", 5, threshold_sanity);
    criterion(7, "Minimizer stationarity", 300, minimizer_stationarity);
    criterion(8, "Sharp continuation", 600, sharp_continuation_check);
    criterion(9, "Giraud classifier oracle equivalence", 1, giraud_oracle);
    criterion(10, "Regularity exponent", 1, regularity_exponent);
    criterion(11, "Positive comparison", 30, positive_comparison_check);
    criterion(12, "Determinism", 0, determinism);
    std::printf("%d of 12 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
