#include "qcurv/qcurv.h"

#include "qcurv/conformal_geometry.hpp"
#include "qcurv/errors.hpp"
#include "qcurv/harness.hpp"
#include "qcurv/regularity.hpp"
#include "qcurv/special_constants.hpp"

#include <exception>
#include <new>
#include <string>
#include <vector>

struct qcurv_report {
    qcurv::RunReport report;
    std::string json;
    std::vector<std::string> csv;
};

namespace {

thread_local std::string last_error;

template <class Fn>
qcurv_status guarded(Fn&& fn)
{
    try {
        last_error.clear();
        fn();
        return QCURV_OK;
    } catch (const qcurv::ConfigError& e) {
        last_error = e.what();
        return QCURV_INVALID_ARGUMENT;
    } catch (const qcurv::DomainError& e) {
        last_error = e.what();
        return QCURV_DOMAIN_ERROR;
    } catch (const qcurv::NumericalError& e) {
        last_error = e.what();
        return QCURV_NUMERICAL_ERROR;
    } catch (const std::invalid_argument& e) {
        last_error = e.what();
        return QCURV_INVALID_ARGUMENT;
    } catch (const std::exception& e) {
        last_error = e.what();
        return QCURV_INTERNAL_ERROR;
    } catch (...) {
        last_error = "unknown error";
        return QCURV_INTERNAL_ERROR;
    }
}

void require(const void* p, const char* what)
{
    if (!p)
        throw qcurv::ConfigError(std::string(what) + " must not be null");
}

qcurv_report* wrap(qcurv::RunReport r)
{
    auto* out = new qcurv_report{std::move(r), {}, {}};
    out->json = out->report.to_json();
    for (const auto& t : out->report.tables)
        out->csv.push_back(qcurv::to_csv(t));
    return out;
}

} // namespace

extern "C" {

const char* qcurv_version(void)
{
    return qcurv::version();
}

const char* qcurv_last_error(void)
{
    return last_error.c_str();
}

qcurv_status qcurv_beta_integral(double p, double q, double* out)
{
    return guarded([&] {
        require(out, "out");
        *out = qcurv::beta_integral(p, q);
    });
}

qcurv_status qcurv_beta_integral_quadrature(double p, double q, double* out)
{
    return guarded([&] {
        require(out, "out");
        *out = qcurv::beta_integral_quadrature(p, q);
    });
}

qcurv_status qcurv_beta_recursion_step(double p, double q, double prior, double* out)
{
    return guarded([&] {
        require(out, "out");
        *out = qcurv::beta_recursion_step(p, q, prior);
    });
}

qcurv_status qcurv_sphere_area(int n, double* out)
{
    return guarded([&] {
        require(out, "out");
        *out = qcurv::sphere_area(n);
    });
}

qcurv_status qcurv_best_sobolev_sq_inv(int n, double* out)
{
    return guarded([&] {
        require(out, "out");
        *out = qcurv::best_sobolev_sq_inv(qcurv::DimensionSpec(n));
    });
}

qcurv_status qcurv_giraud_classify(int n, double p, int j, qcurv_regime* regime, double* exponent)
{
    return guarded([&] {
        require(regime, "regime");
        require(exponent, "exponent");
        const auto k = qcurv::giraud_classify(n, p, j);
        *regime = k.regime == qcurv::DecayRegime::power ? QCURV_REGIME_POWER
            : k.regime == qcurv::DecayRegime::log       ? QCURV_REGIME_LOG
                                                        : QCURV_REGIME_BOUNDED;
        *exponent = k.exponent;
    });
}

qcurv_status qcurv_first_bounded_iterate(int n, double p, int* out)
{
    return guarded([&] {
        require(out, "out");
        *out = qcurv::first_bounded_iterate(n, p);
    });
}

qcurv_status qcurv_regularity_class(int n, double p, double* exponent, int* k, double* beta_lo, double* beta_hi)
{
    return guarded([&] {
        require(exponent, "exponent");
        require(k, "k");
        require(beta_lo, "beta_lo");
        require(beta_hi, "beta_hi");
        const auto rc = qcurv::regularity_class(n, p);
        *exponent = rc.exponent;
        *k = rc.k;
        *beta_lo = rc.beta_lo;
        *beta_hi = rc.beta_hi;
    });
}

qcurv_status qcurv_thresholds(int n, double alpha, double* rho1, double* rho2, double* rho3)
{
    return guarded([&] {
        require(rho1, "rho1");
        require(rho2, "rho2");
        require(rho3, "rho3");
        const auto th = qcurv::thresholds(qcurv::ConformalFactor(alpha, n));
        *rho1 = th.rho1;
        *rho2 = th.rho2;
        *rho3 = th.rho3;
    });
}

qcurv_status qcurv_check_hypothesis(const char* variant, int n, double rg, double a, double f, double lap_f,
                                    int* holds, double* margin)
{
    return guarded([&] {
        require(variant, "variant");
        require(holds, "holds");
        require(margin, "margin");
        const auto d = qcurv::check_theorem_hypothesis(qcurv::DimensionSpec(n), rg, a, f, lap_f,
                                                       qcurv::hypothesis_variant_from_string(variant));
        *holds = d.holds ? 1 : 0;
        *margin = d.margin;
    });
}

qcurv_status qcurv_run(const char* config_json, qcurv_report** out)
{
    return guarded([&] {
        require(config_json, "config_json");
        require(out, "out");
        *out = wrap(qcurv::run(config_json));
    });
}

qcurv_status qcurv_sweep(const char* template_json, const char* axis_json, int workers, qcurv_report** out)
{
    return guarded([&] {
        require(template_json, "template_json");
        require(out, "out");
        const std::string axis = axis_json ? axis_json : "";
        try {
            const auto reports = qcurv::sweep(template_json, axis, workers);
            *out = wrap(qcurv::aggregate(reports, axis));
        } catch (const std::exception& e) {
            // Malformed template or axis: no run happened.
            throw qcurv::ConfigError(std::string("sweep: ") + e.what());
        }
    });
}

int qcurv_report_exit_code(const qcurv_report* report)
{
    return report ? static_cast<int>(report->report.exit_code) : static_cast<int>(qcurv::ExitCode::validation);
}

const char* qcurv_report_json(const qcurv_report* report)
{
    return report ? report->json.c_str() : "";
}

const char* qcurv_report_payload_hash(const qcurv_report* report)
{
    return report ? report->report.payload_hash.c_str() : "";
}

const char* qcurv_report_error(const qcurv_report* report)
{
    return report ? report->report.error.c_str() : "";
}

size_t qcurv_report_warning_count(const qcurv_report* report)
{
    return report ? report->report.warnings.size() : 0;
}

const char* qcurv_report_warning(const qcurv_report* report, size_t index)
{
    if (!report || index >= report->report.warnings.size())
        return "";
    return report->report.warnings[index].c_str();
}

size_t qcurv_report_table_count(const qcurv_report* report)
{
    return report ? report->report.tables.size() : 0;
}

const char* qcurv_report_table_name(const qcurv_report* report, size_t index)
{
    if (!report || index >= report->report.tables.size())
        return "";
    return report->report.tables[index].name.c_str();
}

const char* qcurv_report_table_csv(const qcurv_report* report, size_t index)
{
    if (!report || index >= report->csv.size())
        return "";
    return report->csv[index].c_str();
}

qcurv_status qcurv_report_write(const qcurv_report* report, const char* dir)
{
    return guarded([&] {
        require(report, "report");
        require(dir, "dir");
        qcurv::write_report(report->report, dir);
    });
}

void qcurv_report_free(qcurv_report* report)
{
    delete report;
}

} // extern "C"
