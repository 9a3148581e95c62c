#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "qcurv/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace qcurv;
using nlohmann::json;

namespace {

const Table* find_table(const RunReport& r, const std::string& name)
{
    for (const auto& t : r.tables)
        if (t.name == name)
            return &t;
    return nullptr;
}

}

TEST_CASE("constants run")
{
    const auto r = run(R"({"command": "constants", "parameters": {"n": 6}})");
    REQUIRE(r.exit_code == ExitCode::ok);
    const auto payload = json::parse(r.payload);
    CHECK(payload["best_sobolev_sq_inv"].get<double>() == doctest::Approx(247.28445).epsilon(1e-7));
    const auto doc = json::parse(r.to_json());
    CHECK(doc["schema_version"] == 1);
    CHECK(doc["provenance"]["version"] == version());
    CHECK(doc["provenance"]["config_hash"] == r.config_hash);
    CHECK(doc["config"]["parameters"]["n"] == 6);
    CHECK(find_table(r, "beta_lattice") != nullptr);
}

TEST_CASE("validation errors")
{
    CHECK(run("{not json").exit_code == ExitCode::validation);
    CHECK(run(R"({"command": "frobnicate"})").exit_code == ExitCode::validation);
    CHECK(run(R"({"command": "constants", "parameters": {"n": "six"}})").exit_code == ExitCode::validation);
    CHECK(run(R"({"command": "constants", "parameters": {"m": 6}})").exit_code == ExitCode::validation);
    CHECK(run(R"({"command": "constants", "parameters": {"n": 4}})").exit_code == ExitCode::validation);
    CHECK(run(R"({"command": "thresholds", "parameters": {"alpha": 2.5}})").exit_code == ExitCode::validation);
    const auto r = run(R"({"command": "constants", "parameters": {"n": 3}})");
    CHECK_FALSE(r.error.empty());
    CHECK(r.error.rfind("constants:", 0) == 0);
    CHECK(command_parameters("bogus").empty());
    const auto names = command_parameters("bubble");
    CHECK(std::find(names.begin(), names.end(), "epsilons") != names.end());
}

TEST_CASE("hypothesis exit codes")
{
    const auto ok = run(R"({"command": "check-hypothesis", "parameters": {"variant": "n6", "Rg": -0.1, "a": 1}})");
    CHECK(ok.exit_code == ExitCode::ok);
    CHECK(json::parse(ok.payload)["holds"] == true);
    const auto fail = run(R"({"command": "check-hypothesis", "parameters": {"variant": "n6", "Rg": -4, "a": 1}})");
    CHECK(fail.exit_code == ExitCode::hypothesis_failed);
    CHECK(json::parse(fail.payload)["holds"] == false);
}

TEST_CASE("audit report lists the printed discrepancies as warnings")
{
    const auto r = run(R"({"command": "audit-derivatives", "parameters": {"n": 8, "alpha": 1.2}})");
    REQUIRE(r.exit_code == ExitCode::ok);
    CHECK(json::parse(r.payload)["all_pass"] == true);
    auto mentions = [&](const std::string& s) {
        return std::any_of(r.warnings.begin(), r.warnings.end(),
                           [&](const std::string& w) { return w.find(s) != std::string::npos; });
    };
    CHECK(mentions("bilap_log_a"));
    CHECK(mentions("lap_grad_sq_log_a"));
    for (const auto& w : r.warnings)
        CHECK(w.find('.') < w.find(':'));
}

TEST_CASE("payload hashes are deterministic and ignore the output directory")
{
    const std::string a = R"({"command": "regularity", "parameters": {"n": 8, "p": 3}, "seed": 4})";
    const std::string b = R"({"command": "regularity", "parameters": {"n": 8, "p": 3}, "seed": 4, "output_dir": "x"})";
    const auto ra = run(a), rb = run(b);
    CHECK(ra.payload_hash == rb.payload_hash);
    CHECK(ra.config_hash == rb.config_hash);
    CHECK(ra.payload_hash != run(R"({"command": "regularity", "parameters": {"n": 8, "p": 4}})").payload_hash);
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}

TEST_CASE("csv quoting and number format")
{
    Table t{"t", {"name", "value"}, {{"a,b", "0.10000000000000001"}, {"say \"hi\"", "2"}}};
    CHECK(to_csv(t) == "name,value\n\"a,b\",0.10000000000000001\n\"say \"\"hi\"\"\",2\n");
}

TEST_CASE("sweeps keep grid order and aggregate tables")
{
    const std::string tmpl = R"({"command": "regularity", "parameters": {"n": 8, "p": 3}})";
    const std::string axis = R"({"p": [3, 2.4, 5, 1.0]})";
    const auto one = sweep(tmpl, axis, 1);
    const auto many = sweep(tmpl, axis, 3);
    REQUIRE(one.size() == 4);
    REQUIRE(many.size() == 4);
    for (std::size_t i = 0; i < one.size(); ++i)
        CHECK(one[i].payload_hash == many[i].payload_hash);
    CHECK(json::parse(one[1].payload)["p"] == 2.4);
    CHECK(one[3].exit_code == ExitCode::validation);

    const auto agg = aggregate(many, axis);
    CHECK(agg.exit_code == ExitCode::validation);
    const Table* status = find_table(agg, "sweep_status");
    REQUIRE(status != nullptr);
    CHECK(status->rows.size() == 4);
    const Table* giraud = find_table(agg, "sweep_giraud");
    REQUIRE(giraud != nullptr);
    CHECK(giraud->columns[1] == "p");

    const auto single = sweep(tmpl, "{}", 2);
    CHECK(single.size() == 1);
    CHECK(single[0].payload_hash == run(tmpl).payload_hash);
}

TEST_CASE("bubble sweep over epsilon lists")
{
    const std::string tmpl = R"({"command": "bubble", "parameters": {"n": 8}})";
    const auto reports = sweep(tmpl, R"({"cutoff_fraction": [0.4, 0.5]})", 2);
    REQUIRE(reports.size() == 2);
    for (const auto& r : reports) {
        REQUIRE(r.exit_code == ExitCode::ok);
        const double c0 = json::parse(r.payload)["quotient_fit"]["c0"];
        CHECK(c0 == doctest::Approx(653.82471).epsilon(0.01));
    }
}

TEST_CASE("reports are written as json plus csv")
{
    const auto dir = std::filesystem::temp_directory_path() / "qcurv_harness_test";
    std::filesystem::remove_all(dir);
    const auto r = run(R"({"command": "thresholds", "parameters": {"n": 6, "alpha": 1.5}})");
    REQUIRE(r.exit_code == ExitCode::ok);
    write_report(r, dir.string());
    CHECK(std::filesystem::exists(dir / "report.json"));
    std::ifstream in(dir / "sign_checks.csv");
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str().rfind("condition,upper,holds,worst\n", 0) == 0);
    const auto doc = json::parse(std::ifstream(dir / "report.json"));
    CHECK(doc["payload"]["rho1"].get<double>() == doctest::Approx(14.0625));
    std::filesystem::remove_all(dir);
}

TEST_CASE("continuation run takes its exponents from the path")
{
    const auto r = run(R"({"command": "continuation", "parameters": {"n": 6, "intervals": 255, "rho_min": 0.01,
                          "path": [[1.5, 3.0], [1.9, 3.8]]}})");
    REQUIRE(r.exit_code == ExitCode::ok);
    const Table* t = find_table(r, "continuation");
    REQUIRE(t != nullptr);
    CHECK(t->rows.size() == 3);
    CHECK(json::parse(r.payload)["k_sq_is_empirical_lower_bound"] == true);
    const auto bad = run(R"({"command": "continuation", "parameters": {"path": [[1.9, 3.8], [1.5, 3.0]]}})");
    CHECK(bad.exit_code == ExitCode::validation);
}

TEST_CASE("minimize run reports a converged solve")
{
    const auto r = run(R"({"command": "minimize", "parameters": {"n": 6, "intervals": 255, "rho_min": 0.01}})");
    REQUIRE(r.exit_code == ExitCode::ok);
    const auto payload = json::parse(r.payload);
    CHECK(payload["converged"] == true);
    CHECK(payload["el_residual"].get<double>() < 1e-5);
    CHECK(find_table(r, "profile")->rows.size() == 256);
}
