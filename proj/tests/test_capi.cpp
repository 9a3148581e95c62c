#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "qcurv/qcurv.h"

#include <cmath>
#include <cstring>
#include <string>

TEST_CASE("scalar entry points")
{
    double v = 0;
    REQUIRE(qcurv_beta_integral(6, 2, &v) == QCURV_OK);
    CHECK(v == doctest::Approx(1.0 / 30.0));
    REQUIRE(qcurv_beta_integral_quadrature(6, 2, &v) == QCURV_OK);
    CHECK(v == doctest::Approx(1.0 / 30.0).epsilon(1e-12));
    REQUIRE(qcurv_beta_recursion_step(6, 1, 0.05, &v) == QCURV_OK);
    CHECK(v == doctest::Approx(2.0 / 3.0 * 0.05));
    REQUIRE(qcurv_sphere_area(6, &v) == QCURV_OK);
    CHECK(v == doctest::Approx(M_PI * M_PI * M_PI));
    REQUIRE(qcurv_best_sobolev_sq_inv(6, &v) == QCURV_OK);
    CHECK(v == doctest::Approx(247.28445).epsilon(1e-7));
    CHECK(std::strlen(qcurv_version()) > 0);
}

TEST_CASE("errors set the thread's last error")
{
    double v = 0;
    CHECK(qcurv_beta_integral(3, 2, &v) == QCURV_DOMAIN_ERROR);
    CHECK(std::strlen(qcurv_last_error()) > 0);
    CHECK(qcurv_best_sobolev_sq_inv(4, &v) == QCURV_DOMAIN_ERROR);
    CHECK(qcurv_beta_integral(6, 2, nullptr) == QCURV_INVALID_ARGUMENT);
    int holds = 0;
    CHECK(qcurv_check_hypothesis("bogus", 6, 0, 0, 1, 0, &holds, &v) == QCURV_INVALID_ARGUMENT);
    CHECK(qcurv_run(nullptr, nullptr) == QCURV_INVALID_ARGUMENT);
}

TEST_CASE("classification and thresholds")
{
    qcurv_regime regime{};
    double exponent = 0;
    REQUIRE(qcurv_giraud_classify(8, 3.0, 1, &regime, &exponent) == QCURV_OK);
    CHECK(regime == QCURV_REGIME_POWER);
    CHECK(exponent == doctest::Approx(-8.0 / 3.0));
    REQUIRE(qcurv_giraud_classify(8, 2.4, 6, &regime, &exponent) == QCURV_OK);
    CHECK(regime == QCURV_REGIME_LOG);
    int j = 0;
    REQUIRE(qcurv_first_bounded_iterate(8, 3.0, &j) == QCURV_OK);
    CHECK(j == 4);
    int k = 0;
    double lo = 0, hi = 0;
    REQUIRE(qcurv_regularity_class(8, 3.0, &exponent, &k, &lo, &hi) == QCURV_OK);
    CHECK(k == 2);
    CHECK(hi == doctest::Approx(0.625));
    double r1 = 0, r2 = 0, r3 = 0;
    REQUIRE(qcurv_thresholds(6, 1.5, &r1, &r2, &r3) == QCURV_OK);
    CHECK(r1 == doctest::Approx(14.0625));
    CHECK(r2 == doctest::Approx(9.0));
    int holds = 0;
    double margin = 0;
    REQUIRE(qcurv_check_hypothesis("n6", 6, -0.1, 1, 1, 0, &holds, &margin) == QCURV_OK);
    CHECK(holds == 1);
    CHECK(margin == doctest::Approx(2.9));
}

TEST_CASE("reports through opaque handles")
{
    qcurv_report* r = nullptr;
    REQUIRE(qcurv_run(R"({"command": "constants", "parameters": {"n": 8}})", &r) == QCURV_OK);
    CHECK(qcurv_report_exit_code(r) == 0);
    CHECK(std::string(qcurv_report_json(r)).find("\"schema_version\": 1") != std::string::npos);
    CHECK(std::strlen(qcurv_report_payload_hash(r)) == 16);
    CHECK(std::string(qcurv_report_error(r)).empty());
    REQUIRE(qcurv_report_table_count(r) >= 1);
    CHECK(std::string(qcurv_report_table_name(r, 0)) == "beta_lattice");
    CHECK(std::string(qcurv_report_table_csv(r, 0)).rfind("p,q,", 0) == 0);
    CHECK(std::string(qcurv_report_table_name(r, 99)).empty());
    qcurv_report_free(r);

    REQUIRE(qcurv_run(R"({"command": "constants", "parameters": {"n": "x"}})", &r) == QCURV_OK);
    CHECK(qcurv_report_exit_code(r) == 2);
    CHECK(std::strlen(qcurv_report_error(r)) > 0);
    qcurv_report_free(r);

    REQUIRE(qcurv_sweep(R"({"command": "regularity", "parameters": {"n": 8, "p": 3}})", R"({"n": [6, 8, 10]})", 2, &r)
            == QCURV_OK);
    CHECK(qcurv_report_exit_code(r) == 0);
    CHECK(std::string(qcurv_report_table_name(r, 0)) == "sweep_status");
    qcurv_report_free(r);

    REQUIRE(qcurv_run(R"({"command": "thresholds", "parameters": {"n": 6, "alpha": 1.5}})", &r) == QCURV_OK);
    CHECK(qcurv_report_warning_count(r) >= 1);
    CHECK(std::strlen(qcurv_report_warning(r, 0)) > 0);
    qcurv_report_free(r);
    qcurv_report_free(nullptr);
}
