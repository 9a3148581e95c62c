#include "qcurv/harness.hpp"

#include "qcurv/bubble_expansion.hpp"
#include "qcurv/conformal_geometry.hpp"
#include "qcurv/errors.hpp"
#include "qcurv/quotient_minimizer.hpp"
#include "qcurv/regularity.hpp"
#include "qcurv/special_constants.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

namespace qcurv {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

constexpr int report_schema_version = 1;
constexpr int table_schema_version = 1;
constexpr const char* library_version = "0.3.0";

std::string format_number(double x)
{
    if (std::isnan(x))
        return "nan";
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

struct Cell {
    std::string text;
    Cell(double x) : text(format_number(x)) {}
    Cell(int x) : text(std::to_string(x)) {}
    Cell(std::size_t x) : text(std::to_string(x)) {}
    Cell(bool x) : text(x ? "true" : "false") {}
    Cell(const char* x) : text(x) {}
    Cell(std::string x) : text(std::move(x)) {}
};

void add_row(Table& t, std::initializer_list<Cell> cells)
{
    std::vector<std::string> row;
    for (const auto& c : cells)
        row.push_back(c.text);
    if (row.size() != t.columns.size())
        throw std::logic_error("table " + t.name + ": row width does not match header");
    t.rows.push_back(std::move(row));
}

/// JSON has no NaN; absent values become null.
json number(double x)
{
    return std::isfinite(x) ? json(x) : json(nullptr);
}

// ---------------------------------------------------------------- parameters

enum class Kind { integer, real, optional_real, text, real_list, pair_list };

struct ParamSpec {
    const char* name;
    Kind kind;
    json fallback;
};

const std::vector<ParamSpec>& weight_params()
{
    static const std::vector<ParamSpec> p{
        {"gamma", Kind::real, 0.0},    {"alpha", Kind::real, 0.0}, {"a", Kind::real, 0.0},
        {"b", Kind::real, 0.0},        {"rho_min", Kind::real, 1e-3}, {"f_p", Kind::real, 1.0},
        {"lap_f", Kind::real, 0.0},
    };
    return p;
}

const std::vector<ParamSpec>& solver_params()
{
    static const std::vector<ParamSpec> p{
        {"rho_max", Kind::real, 1.0},           {"intervals", Kind::integer, 2047},
        {"tol", Kind::real, 1e-5},              {"max_iterations", Kind::integer, 20000},
        {"init_epsilon", Kind::optional_real, nullptr},
    };
    return p;
}

std::map<std::string, std::vector<ParamSpec>> build_schema()
{
    std::map<std::string, std::vector<ParamSpec>> s;
    s["constants"] = {{"n", Kind::integer, 6}};
    s["audit-derivatives"] = {{"n", Kind::integer, 6},          {"alpha", Kind::real, 1.5},
                              {"samples", Kind::integer, 8},    {"rho_lo", Kind::real, 0.05},
                              {"rho_hi", Kind::real, 5.0},      {"relative_width", Kind::real, 0.1},
                              {"tolerance", Kind::real, 1e-6}};
    s["thresholds"] = {{"n", Kind::integer, 6}, {"alpha", Kind::real, 1.5}};
    s["check-hypothesis"] = {{"variant", Kind::text, "main"}, {"n", Kind::integer, 6}, {"Rg", Kind::real, 0.0},
                             {"a", Kind::real, 0.0},          {"f", Kind::real, 1.0},  {"lap_f", Kind::real, 0.0}};
    s["bubble"] = {{"n", Kind::integer, 6},
                   {"p", Kind::real, 3.0},
                   {"epsilons", Kind::real_list, json(default_epsilons())},
                   {"S", Kind::real, 0.0},
                   {"delta", Kind::real, 1.0},
                   {"cutoff_fraction", Kind::real, 0.5},
                   {"slope_tolerance", Kind::real, 0.05},
                   {"fit_tolerance", Kind::real, 1e-3}};
    for (const auto& w : weight_params())
        s["bubble"].push_back(w);
    s["minimize"] = {{"n", Kind::integer, 6}};
    for (const auto& w : weight_params())
        s["minimize"].push_back(w);
    for (const auto& w : solver_params())
        s["minimize"].push_back(w);
    s["continuation"] = {{"n", Kind::integer, 6},
                         {"path", Kind::pair_list, json::array({{1.5, 3.0}, {1.8, 3.6}, {1.95, 3.9}})}};
    for (auto w : weight_params()) {
        if (std::string(w.name) == "a" || std::string(w.name) == "b")
            w.fallback = 1.0;
        if (std::string(w.name) == "gamma" || std::string(w.name) == "alpha")
            continue;
        s["continuation"].push_back(w);
    }
    for (const auto& w : solver_params())
        s["continuation"].push_back(w);
    s["regularity"] = {{"n", Kind::integer, 8},          {"p", Kind::real, 3.0},
                       {"j_max", Kind::integer, -1},     {"ks_l", Kind::optional_real, nullptr},
                       {"ks_t", Kind::real, 1.0}};
    return s;
}

const std::map<std::string, std::vector<ParamSpec>>& schema()
{
    static const auto s = build_schema();
    return s;
}

bool matches(const json& v, Kind kind)
{
    switch (kind) {
    case Kind::integer:
        return v.is_number_integer() || (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>());
    case Kind::real: return v.is_number();
    case Kind::optional_real: return v.is_number() || v.is_null();
    case Kind::text: return v.is_string();
    case Kind::real_list:
        return v.is_array() && std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number(); });
    case Kind::pair_list:
        return v.is_array() && std::all_of(v.begin(), v.end(), [](const json& x) {
                   return x.is_array() && x.size() == 2 && x[0].is_number() && x[1].is_number();
               });
    }
    return false;
}

struct Validated {
    std::string command;
    json parameters;
    std::uint64_t seed = 0;
    std::string output_dir;
};

Validated validate(const json& config)
{
    if (!config.is_object())
        throw ConfigError("config must be a JSON object");
    for (auto it = config.begin(); it != config.end(); ++it)
        if (it.key() != "command" && it.key() != "parameters" && it.key() != "seed" && it.key() != "output_dir")
            throw ConfigError("unknown config field '" + it.key() + "'");
    if (!config.contains("command") || !config["command"].is_string())
        throw ConfigError("config needs a string 'command'");
    Validated v;
    v.command = config["command"].get<std::string>();
    const auto found = schema().find(v.command);
    if (found == schema().end())
        throw ConfigError("unknown command '" + v.command + "'");
    if (config.contains("seed")) {
        if (!config["seed"].is_number_integer() || config["seed"].get<long long>() < 0)
            throw ConfigError("seed must be a non-negative integer");
        v.seed = config["seed"].get<std::uint64_t>();
    }
    if (config.contains("output_dir")) {
        if (!config["output_dir"].is_string())
            throw ConfigError("output_dir must be a string");
        v.output_dir = config["output_dir"].get<std::string>();
    }
    const json given = config.value("parameters", json::object());
    if (!given.is_object())
        throw ConfigError("parameters must be an object");
    v.parameters = json::object();
    for (const auto& spec : found->second)
        v.parameters[spec.name] = spec.fallback;
    for (auto it = given.begin(); it != given.end(); ++it) {
        const auto spec = std::find_if(found->second.begin(), found->second.end(),
                                       [&](const ParamSpec& p) { return it.key() == p.name; });
        if (spec == found->second.end())
            throw ConfigError("command '" + v.command + "' has no parameter '" + it.key() + "'");
        if (!matches(it.value(), spec->kind))
            throw ConfigError("parameter '" + it.key() + "' has the wrong type");
        v.parameters[it.key()] = it.value();
    }
    return v;
}

// ---------------------------------------------------------------- commands

struct Outcome {
    json payload = json::object();
    std::vector<std::string> warnings;
    std::vector<Table> tables;
    ExitCode code = ExitCode::ok;
};

int as_int(const json& p, const char* key) { return static_cast<int>(std::llround(p.at(key).get<double>())); }
double as_real(const json& p, const char* key) { return p.at(key).get<double>(); }
double as_optional(const json& p, const char* key)
{
    return p.at(key).is_null() ? std::numeric_limits<double>::quiet_NaN() : p.at(key).get<double>();
}

SingularWeightConfig weights_from(const json& p)
{
    return SingularWeightConfig::constant(as_real(p, "gamma"), as_real(p, "alpha"), as_real(p, "a"),
                                          as_real(p, "b"), as_real(p, "rho_min"));
}

MinimizeOptions solver_from(const json& p)
{
    MinimizeOptions o;
    o.dimension = as_int(p, "n");
    o.rho_max = as_real(p, "rho_max");
    o.intervals = as_int(p, "intervals");
    o.tol = as_real(p, "tol");
    o.max_iterations = as_int(p, "max_iterations");
    o.init_epsilon = as_optional(p, "init_epsilon");
    return o;
}

json rational(const Rational& r)
{
    return {{"num", r.num}, {"den", r.den}, {"value", r.value()}};
}

Outcome run_constants(const json& p)
{
    const DimensionSpec dim(as_int(p, "n"));
    const double n = dim.n();
    Outcome o;
    const double closed = beta_integral(n, 0.5 * n - 1.0);
    const double quad = beta_integral_quadrature(n, 0.5 * n - 1.0);
    o.payload = {{"n", dim.n()},
                 {"N", rational(dim.critical_exponent())},
                 {"omega", dim.omega()},
                 {"beta_integral", {{"p", n}, {"q", 0.5 * n - 1.0}, {"closed_form", closed}, {"quadrature", quad}}},
                 {"best_sobolev_sq_inv", best_sobolev_sq_inv(dim)}};
    Table t{"beta_lattice", {"p", "q", "closed_form", "quadrature", "relative_error", "recursion_next"}, {}};
    for (int pp = 3; pp <= std::max(6, dim.n()); ++pp) {
        for (int q = 0; q <= pp - 2; ++q) {
            const double c = beta_integral(pp, q);
            const double qq = beta_integral_quadrature(pp, q);
            const double next = pp - q - 2 > 0 ? beta_recursion_step(pp, q, c) : std::nan("");
            add_row(t, {pp, q, c, qq, std::abs(c - qq) / qq, next});
        }
    }
    o.tables.push_back(std::move(t));
    return o;
}

Outcome run_audit(const json& p)
{
    const ConformalFactor cf(as_real(p, "alpha"), as_int(p, "n"));
    const auto samples = log_samples(as_real(p, "rho_lo"), as_real(p, "rho_hi"), as_int(p, "samples"),
                                     as_real(p, "relative_width"));
    if (samples.size() < 1)
        throw ConfigError("audit needs at least one sample");
    Outcome o;
    const auto audit = audit_derivatives(cf, samples, as_real(p, "tolerance"));
    Table d{"derivative_audit", {"quantity", "rho", "symbolic", "finite_difference", "deviation", "pass"}, {}};
    json quantities = json::object();
    bool all = true;
    for (const auto& a : audit) {
        for (const auto& r : a.report.rows)
            add_row(d, {a.quantity, r.rho, r.symbolic, r.finite_difference, r.deviation,
                        r.deviation < a.report.tolerance});
        quantities[a.quantity] = {{"expression", a.symbolic.to_string()},
                                  {"max_deviation", a.report.max_deviation},
                                  {"pass", a.report.pass}};
        all = all && a.report.pass;
    }
    Table c{"printed_coefficients", {"quantity", "exponent", "printed", "derived", "agree"}, {}};
    json disagreements = json::array();
    for (const auto& row : audit_printed_coefficients(cf)) {
        add_row(c, {row.quantity, row.exponent, row.printed, row.derived, row.agree});
        if (!row.agree) {
            disagreements.push_back(row.quantity);
            o.warnings.push_back("conformal_geometry.audit_printed_coefficients: printed " + row.quantity + " = "
                                 + format_number(row.printed) + " disagrees with derived "
                                 + format_number(row.derived));
        }
    }
    o.payload = {{"n", cf.n()}, {"alpha", cf.alpha()}, {"all_pass", all}, {"quantities", quantities},
                 {"printed_disagreements", disagreements}};
    o.tables.push_back(std::move(d));
    o.tables.push_back(std::move(c));
    if (!all)
        o.code = ExitCode::numerical;
    return o;
}

Outcome run_thresholds(const json& p)
{
    const ConformalFactor cf(as_real(p, "alpha"), as_int(p, "n"));
    const auto th = thresholds(cf);
    Outcome o;
    Table t{"sign_checks", {"condition", "upper", "holds", "worst"}, {}};
    json checks = json::array();
    for (const auto& c : th.checks) {
        add_row(t, {c.condition, c.upper, c.holds, c.worst});
        checks.push_back({{"condition", c.condition}, {"upper", c.upper}, {"holds", c.holds}});
    }
    o.payload = {{"n", cf.n()},
                 {"alpha", cf.alpha()},
                 {"rho1", th.rho1},
                 {"rho2", th.rho2},
                 {"rho3", th.rho3},
                 {"rho3_printed", number(th.rho3_printed)},
                 {"rho_admissible", th.rho_admissible},
                 {"checks", checks}};
    o.warnings = th.warnings;
    o.tables.push_back(std::move(t));
    return o;
}

Outcome run_hypothesis(const json& p)
{
    const auto variant = hypothesis_variant_from_string(p.at("variant").get<std::string>());
    const DimensionSpec dim(as_int(p, "n"));
    const auto d = check_theorem_hypothesis(dim, as_real(p, "Rg"), as_real(p, "a"), as_real(p, "f"),
                                            as_real(p, "lap_f"), variant);
    Outcome o;
    o.payload = {{"variant", to_string(d.variant)}, {"n", dim.n()},          {"holds", d.holds},
                 {"margin", d.margin},              {"condition", d.condition}};
    if (!d.holds)
        o.code = ExitCode::hypothesis_failed;
    return o;
}

Outcome run_bubble(const json& p)
{
    const DimensionSpec dim(as_int(p, "n"));
    const auto epsilons = p.at("epsilons").get<std::vector<double>>();
    const double pexp = as_real(p, "p");
    const FModel fm{as_real(p, "f_p"), as_real(p, "lap_f")};
    const auto w = weights_from(p);
    w.validate();
    Outcome o;
    const Cutoff cutoff{as_real(p, "cutoff_fraction") * as_real(p, "delta"), as_real(p, "delta")};

    Table e{"energies", {"epsilon", "bilap", "grad_weighted", "pot_weighted", "f_mass", "quotient"}, {}};
    BubbleQuadrature quad;
    quad.curvature = as_real(p, "S");
    for (double eps : epsilons) {
        const BubbleProfile profile(dim, eps, cutoff);
        const auto en = bubble_energy(profile, &w, [&](double r) { return fm(dim.n(), r); }, quad);
        add_row(e, {eps, en.bilap, en.grad_weighted, en.pot_weighted, en.f_mass, en.quotient});
    }
    o.tables.push_back(std::move(e));

    Table s{"slopes", {"term", "measured", "predicted", "derived", "within_tolerance"}, {}};
    json slopes = json::array();
    for (const auto& c : mass_scaling(dim, pexp, epsilons, cutoff, as_real(p, "slope_tolerance"))) {
        add_row(s, {c.term, c.measured, c.predicted, c.derived, c.within_tolerance});
        slopes.push_back({{"term", c.term},
                          {"measured", c.measured},
                          {"predicted", c.predicted},
                          {"derived", c.derived},
                          {"within_tolerance", c.within_tolerance}});
        if (!c.within_tolerance)
            o.warnings.push_back("bubble_expansion.giraud_mass: " + c.term + " slope " + format_number(c.measured)
                                 + " differs from the printed exponent " + format_number(c.predicted)
                                 + " (derived " + format_number(c.derived) + ")");
    }
    o.tables.push_back(std::move(s));
    o.payload["slopes"] = slopes;

    if (dim.theorem_grade()) {
        ExpansionOptions opts;
        opts.delta = as_real(p, "delta");
        opts.cutoff_fraction = as_real(p, "cutoff_fraction");
        opts.p = pexp;
        opts.fit_tolerance = as_real(p, "fit_tolerance");
        const auto set = verify_expansion(dim, fm, as_real(p, "S"), epsilons, opts);
        Table x{"expansion",
                {"term", "scale_exponent", "leading_predicted", "leading_measured", "correction_predicted",
                 "correction_measured", "correction_order"},
                {}};
        Table v{"expansion_values", {"term", "epsilon", "value"}, {}};
        for (const auto& r : set.reports) {
            add_row(x, {to_string(r.term), r.scale_exponent, r.leading_predicted, r.leading_measured,
                        r.correction_predicted, r.correction_measured, r.correction_order});
            for (std::size_t i = 0; i < r.values.size(); ++i)
                add_row(v, {to_string(r.term), r.epsilons[i], r.values[i]});
        }
        o.tables.push_back(std::move(x));
        o.tables.push_back(std::move(v));
        o.payload["quotient_fit"] = {{"c0", set.c0},
                                     {"c0_predicted", set.c0_predicted},
                                     {"c1", set.c1},
                                     {"c2", set.c2},
                                     {"c1_predicted", set.c1_predicted},
                                     {"c1_recombined", set.c1_recombined},
                                     {"c1_predicted_sign", set.c1_predicted_sign},
                                     {"fit_residual", set.fit_residual}};
        o.payload["bilap_curvature"] = {{"componentwise", number(set.bilap_curvature_componentwise)},
                                        {"consolidated", number(set.bilap_curvature_consolidated)}};
        o.warnings.insert(o.warnings.end(), set.warnings.begin(), set.warnings.end());
    }
    return o;
}

json solve_json(const SolveResult& r)
{
    return {{"quotient", r.quotient},
            {"el_residual", r.el_residual},
            {"iterations", r.iterations},
            {"constraint_defect", r.constraint_defect},
            {"converged", r.converged}};
}

Table profile_table(const std::string& name, const HermiteField& u)
{
    Table t{name, {"rho", "u", "du"}, {}};
    const auto v = u.node_values();
    const auto d = u.node_derivatives();
    for (int i = 0; i < u.mesh().nodes(); ++i)
        add_row(t, {u.mesh().node(i), v[i], d[i]});
    return t;
}

Outcome run_minimize(const json& p)
{
    const auto w = weights_from(p);
    const int n = as_int(p, "n");
    const FModel fm{as_real(p, "f_p"), as_real(p, "lap_f")};
    const auto res = minimize(w, [&](double r) { return fm(n, r); }, std::nullopt, solver_from(p));
    Outcome o;
    o.payload = solve_json(res);
    o.payload["rho_min"] = w.rho_min;
    Table h{"history", {"iteration", "quotient"}, {}};
    for (std::size_t i = 0; i < res.history.size(); ++i)
        add_row(h, {i, res.history[i]});
    o.tables.push_back(std::move(h));
    o.tables.push_back(profile_table("profile", res.minimizer));
    return o;
}

Outcome run_continuation(const json& p, std::uint64_t seed)
{
    const int n = as_int(p, "n");
    const FModel fm{as_real(p, "f_p"), as_real(p, "lap_f")};
    std::vector<std::pair<double, double>> path;
    for (const auto& x : p.at("path"))
        path.emplace_back(x[0].get<double>(), x[1].get<double>());
    if (path.empty())
        throw ConfigError("continuation path is empty");
    // The exponents come from the path; the base only carries the smooth parts and rho_min.
    const auto base = SingularWeightConfig::constant(path.front().first, path.front().second, as_real(p, "a"),
                                                     as_real(p, "b"), as_real(p, "rho_min"));
    const auto res = sharp_continuation(base, path, [&](double r) { return fm(n, r); }, DimensionSpec(n),
                                        solver_from(p), seed);
    Outcome o;
    Table t{"continuation", {"step", "gamma", "alpha", "quotient", "gap", "relative_gap", "el_residual", "iterations"}, {}};
    json steps = json::array();
    for (std::size_t k = 0; k < res.steps.size(); ++k) {
        const auto& s = res.steps[k];
        add_row(t, {k, s.gamma, s.alpha, s.result.quotient, s.gap, s.gap / std::abs(res.sharp.quotient),
                    s.result.el_residual, s.result.iterations});
        auto j = solve_json(s.result);
        j["gamma"] = s.gamma;
        j["alpha"] = s.alpha;
        j["gap"] = s.gap;
        steps.push_back(j);
    }
    add_row(t, {res.steps.size(), 2.0, 4.0, res.sharp.quotient, 0.0, 0.0, res.sharp.el_residual,
                res.sharp.iterations});
    o.payload = {{"steps", steps},
                 {"sharp", solve_json(res.sharp)},
                 {"gaps_decreasing", res.gaps_decreasing},
                 {"k_sq_estimate", res.k_sq_estimate},
                 {"k_sq_is_empirical_lower_bound", true},
                 {"hypothesis_margin", res.hypothesis_margin}};
    if (!res.gaps_decreasing)
        o.warnings.push_back("quotient_minimizer.sharp_continuation: gaps to the sharp quotient are not strictly decreasing");
    o.tables.push_back(std::move(t));
    o.tables.push_back(profile_table("sharp_profile", res.sharp.minimizer));
    return o;
}

Outcome run_regularity(const json& p)
{
    const int n = as_int(p, "n");
    const double pexp = as_real(p, "p");
    int j_max = as_int(p, "j_max");
    const int first = first_bounded_iterate(n, pexp);
    if (j_max < 0)
        j_max = std::max(n, first);
    Outcome o;
    Table t{"giraud", {"n", "p", "j", "regime", "exponent", "kato_stummel_l"}, {}};
    for (int j = 0; j <= j_max; ++j) {
        const auto k = giraud_classify(n, pexp, j);
        add_row(t, {n, pexp, j, to_string(k.regime), k.exponent, kato_stummel_exponent(n, pexp, j)});
    }
    o.tables.push_back(std::move(t));
    const auto rc = regularity_class(n, pexp);
    o.payload = {{"n", n},
                 {"p", pexp},
                 {"first_bounded_iterate", first},
                 {"regularity", {{"exponent", rc.exponent}, {"k", rc.k}, {"fraction", rc.fraction},
                                 {"beta_interval", {rc.beta_lo, rc.beta_hi}}}}};
    if (!p.at("ks_l").is_null()) {
        KatoStummelQuery q{[](double) { return 1.0; }, as_real(p, "ks_l"), as_real(p, "ks_t"), true};
        const auto ks = kato_stummel_phi(q, DimensionSpec(n));
        Table d{"kato_stummel", {"t", "phi"}, {}};
        for (std::size_t i = 0; i < ks.decay.size(); ++i)
            add_row(d, {ks.decay_t[i], ks.decay[i]});
        o.tables.push_back(std::move(d));
        o.payload["kato_stummel"] = {{"phi", ks.phi}, {"decreasing_to_zero", ks.decreasing_to_zero}};
    }
    return o;
}

Outcome dispatch(const Validated& v)
{
    const json& p = v.parameters;
    if (v.command == "constants")
        return run_constants(p);
    if (v.command == "audit-derivatives")
        return run_audit(p);
    if (v.command == "thresholds")
        return run_thresholds(p);
    if (v.command == "check-hypothesis")
        return run_hypothesis(p);
    if (v.command == "bubble")
        return run_bubble(p);
    if (v.command == "minimize")
        return run_minimize(p);
    if (v.command == "continuation")
        return run_continuation(p, v.seed);
    if (v.command == "regularity")
        return run_regularity(p);
    throw ConfigError("unknown command '" + v.command + "'");
}

std::string utc_timestamp()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string table_file(const Table& t)
{
    return t.name + ".csv";
}

} // namespace

std::string fnv1a_hex(const std::string& text)
{
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

const char* version()
{
    return library_version;
}

std::vector<std::string> command_parameters(const std::string& command)
{
    std::vector<std::string> out;
    const auto it = schema().find(command);
    if (it != schema().end())
        for (const auto& p : it->second)
            out.emplace_back(p.name);
    return out;
}

std::string to_csv(const Table& table)
{
    auto quote = [](const std::string& s) {
        if (s.find_first_of(",\"\n") == std::string::npos)
            return s;
        std::string q = "\"";
        for (char c : s)
            q += c == '"' ? std::string("\"\"") : std::string(1, c);
        return q + "\"";
    };
    std::string out;
    for (std::size_t i = 0; i < table.columns.size(); ++i)
        out += (i ? "," : "") + quote(table.columns[i]);
    out += "\n";
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out += (i ? "," : "") + quote(row[i]);
        out += "\n";
    }
    return out;
}

std::string RunReport::to_json() const
{
    json doc;
    doc["schema_version"] = report_schema_version;
    doc["command"] = command;
    doc["config"] = config.empty() ? json(nullptr) : json::parse(config);
    doc["provenance"] = {{"version", library_version}, {"timestamp", timestamp}, {"config_hash", config_hash}};
    doc["payload"] = payload.empty() ? json(nullptr) : json::parse(payload);
    doc["payload_hash"] = payload_hash;
    doc["warnings"] = warnings;
    json tabs = json::array();
    for (const auto& t : tables)
        tabs.push_back({{"name", t.name}, {"file", table_file(t)}, {"columns", t.columns},
                        {"schema_version", table_schema_version}, {"rows", t.rows.size()}});
    doc["tables"] = tabs;
    doc["exit_code"] = static_cast<int>(exit_code);
    doc["error"] = error.empty() ? json(nullptr) : json(error);
    return doc.dump(2);
}

RunReport run(const std::string& config_json)
{
    RunReport report;
    report.timestamp = utc_timestamp();
    Validated v;
    try {
        v = validate(json::parse(config_json));
    } catch (const json::exception& e) {
        report.exit_code = ExitCode::validation;
        report.error = std::string("malformed config: ") + e.what();
        return report;
    } catch (const std::exception& e) {
        report.exit_code = ExitCode::validation;
        report.error = e.what();
        return report;
    }
    report.command = v.command;
    const json echo = {{"command", v.command}, {"parameters", v.parameters}, {"seed", v.seed},
                       {"output_dir", v.output_dir}};
    report.config = echo.dump();
    // The output directory does not influence results, so it stays out of the hash.
    report.config_hash = fnv1a_hex(json({{"command", v.command}, {"parameters", v.parameters}, {"seed", v.seed}}).dump());
    try {
        Outcome o = dispatch(v);
        report.payload = o.payload.dump();
        report.warnings = std::move(o.warnings);
        report.tables = std::move(o.tables);
        report.exit_code = o.code;
    } catch (const ConfigError& e) {
        report.exit_code = ExitCode::validation;
        report.error = e.what();
    } catch (const DomainError& e) {
        report.exit_code = ExitCode::validation;
        report.error = e.what();
    } catch (const json::exception& e) {
        report.exit_code = ExitCode::validation;
        report.error = e.what();
    } catch (const std::exception& e) {
        report.exit_code = ExitCode::numerical;
        report.error = e.what();
    }
    if (!report.error.empty())
        report.error = v.command + ": " + report.error;
    // Tables are part of the deterministic result, so they enter the hash too.
    std::string hashed = report.payload;
    for (const auto& t : report.tables)
        hashed += "\n#" + t.name + "\n" + to_csv(t);
    report.payload_hash = fnv1a_hex(hashed);
    return report;
}

namespace {

std::vector<ordered_json> grid_points(const ordered_json& axis)
{
    if (!axis.is_object())
        throw ConfigError("sweep axis must be a JSON object of parameter -> array");
    std::vector<ordered_json> points{ordered_json::object()};
    for (auto it = axis.begin(); it != axis.end(); ++it) {
        if (!it.value().is_array() || it.value().empty())
            throw ConfigError("sweep axis '" + it.key() + "' must be a non-empty array");
        std::vector<ordered_json> next;
        for (const auto& pt : points)
            for (const auto& value : it.value()) {
                ordered_json q = pt;
                q[it.key()] = value;
                next.push_back(std::move(q));
            }
        points = std::move(next);
    }
    return points;
}

} // namespace

std::vector<RunReport> sweep(const std::string& template_json, const std::string& axis_json, int workers)
{
    const json base = json::parse(template_json);
    const auto points = grid_points(axis_json.empty() ? ordered_json::object() : ordered_json::parse(axis_json));
    if (!base.is_object())
        throw ConfigError("sweep template must be a JSON object");
    const auto command = base.value("command", std::string());
    const auto names = command_parameters(command);
    for (auto it = points.front().begin(); it != points.front().end(); ++it)
        if (std::find(names.begin(), names.end(), it.key()) == names.end())
            throw ConfigError("sweep axis '" + it.key() + "' is not a parameter of '" + command + "'");

    std::vector<std::string> configs;
    for (const auto& pt : points) {
        json c = base;
        if (!c.contains("parameters"))
            c["parameters"] = json::object();
        for (auto it = pt.begin(); it != pt.end(); ++it)
            c["parameters"][it.key()] = json::parse(it.value().dump());
        configs.push_back(c.dump());
    }
    std::vector<RunReport> reports(configs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < configs.size(); i = next++)
            reports[i] = run(configs[i]);
    };
    const int count = std::max(1, std::min<int>(workers, static_cast<int>(configs.size())));
    std::vector<std::thread> pool;
    for (int k = 1; k < count; ++k)
        pool.emplace_back(worker);
    worker();
    for (auto& t : pool)
        t.join();
    return reports;
}

RunReport aggregate(const std::vector<RunReport>& reports, const std::string& axis_json)
{
    const auto points = grid_points(axis_json.empty() ? ordered_json::object() : ordered_json::parse(axis_json));
    if (points.size() != reports.size())
        throw ConfigError("aggregate: report count does not match the sweep grid");
    std::vector<std::string> axis_names;
    for (auto it = points.front().begin(); it != points.front().end(); ++it)
        axis_names.push_back(it.key());
    auto axis_cells = [&](std::size_t i) {
        std::vector<std::string> cells{std::to_string(i)};
        for (const auto& name : axis_names) {
            const auto& v = points[i][name];
            cells.push_back(v.is_number() ? format_number(v.get<double>())
                                          : (v.is_string() ? v.get<std::string>() : v.dump()));
        }
        return cells;
    };
    RunReport out;
    out.command = "sweep";
    out.timestamp = utc_timestamp();
    Table status{"sweep_status", {"run"}, {}};
    status.columns.insert(status.columns.end(), axis_names.begin(), axis_names.end());
    for (const char* c : {"command", "exit_code", "payload_hash", "error"})
        status.columns.emplace_back(c);
    std::map<std::string, std::size_t> index;
    json runs = json::array();
    int worst = 0;
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto& r = reports[i];
        auto row = axis_cells(i);
        row.insert(row.end(), {r.command, std::to_string(static_cast<int>(r.exit_code)), r.payload_hash, r.error});
        status.rows.push_back(std::move(row));
        runs.push_back({{"run", i},
                        {"point", json::parse(points[i].dump())},
                        {"exit_code", static_cast<int>(r.exit_code)},
                        {"payload_hash", r.payload_hash},
                        {"payload", r.payload.empty() ? json(nullptr) : json::parse(r.payload)}});
        out.warnings.insert(out.warnings.end(), r.warnings.begin(), r.warnings.end());
        const int code = static_cast<int>(r.exit_code);
        auto severity = [](int c) { return c == 2 ? 3 : (c == 3 ? 2 : (c == 4 ? 1 : 0)); };
        if (severity(code) > severity(worst))
            worst = code;
        for (const auto& t : r.tables) {
            auto found = index.find(t.name);
            if (found == index.end()) {
                Table agg{"sweep_" + t.name, {"run"}, {}};
                agg.columns.insert(agg.columns.end(), axis_names.begin(), axis_names.end());
                agg.columns.insert(agg.columns.end(), t.columns.begin(), t.columns.end());
                out.tables.push_back(std::move(agg));
                found = index.emplace(t.name, out.tables.size() - 1).first;
            }
            Table& agg = out.tables[found->second];
            if (agg.columns.size() != 1 + axis_names.size() + t.columns.size())
                continue;
            for (const auto& trow : t.rows) {
                auto row = axis_cells(i);
                row.insert(row.end(), trow.begin(), trow.end());
                agg.rows.push_back(std::move(row));
            }
        }
    }
    out.tables.insert(out.tables.begin(), std::move(status));
    out.exit_code = static_cast<ExitCode>(worst);
    const json payload = {{"runs", runs}, {"axis", json::parse(axis_json.empty() ? "{}" : axis_json)}};
    out.payload = payload.dump();
    out.config = json({{"command", "sweep"}, {"axis", json::parse(axis_json.empty() ? "{}" : axis_json)}}).dump();
    out.config_hash = fnv1a_hex(out.config);
    std::string hashed = out.payload;
    for (const auto& t : out.tables)
        hashed += "\n#" + t.name + "\n" + to_csv(t);
    out.payload_hash = fnv1a_hex(hashed);
    return out;
}

void write_report(const RunReport& report, const std::string& dir)
{
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    auto write = [&](const fs::path& path, const std::string& text) {
        std::ofstream f(path, std::ios::binary);
        if (!f)
            throw NumericalError("cannot write " + path.string());
        f << text;
    };
    write(fs::path(dir) / "report.json", report.to_json() + "\n");
    for (const auto& t : report.tables)
        write(fs::path(dir) / table_file(t), to_csv(t));
}

} // namespace qcurv
