#include "qcurv/qcurv.h"

#include "CLI11.hpp"
#include "json.hpp"

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using json = nlohmann::json;

const char* const commands[] = {"constants", "audit-derivatives", "thresholds", "check-hypothesis",
                                "bubble",    "minimize",          "continuation", "regularity"};

/// A flag value is taken as JSON when it parses (numbers, lists, null) and as a
/// plain string otherwise, so `--variant n6` and `--n 6` both work.
json flag_value(const std::string& text)
{
    try {
        return json::parse(text);
    } catch (const json::exception&) {
        return text;
    }
}

/// Turns the leftover `--name value` pairs into a parameter object.
json parse_parameters(const std::vector<std::string>& extras)
{
    json params = json::object();
    for (std::size_t i = 0; i < extras.size(); ++i) {
        const std::string& arg = extras[i];
        if (arg.rfind("--", 0) != 0 || arg.size() <= 2)
            throw std::invalid_argument("unexpected argument '" + arg + "'");
        std::string name = arg.substr(2);
        std::string value;
        if (const auto eq = name.find('='); eq != std::string::npos) {
            value = name.substr(eq + 1);
            name = name.substr(0, eq);
        } else {
            if (i + 1 >= extras.size())
                throw std::invalid_argument("parameter --" + name + " needs a value");
            value = extras[++i];
        }
        params[name] = flag_value(value);
    }
    return params;
}

std::string read_file(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw std::invalid_argument("cannot read config file '" + path + "'");
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

int execute(const std::string& command, const std::string& config_path, const std::string& out_dir,
            const long long* seed, int workers, const std::string& axis, const std::vector<std::string>& extras)
{
    json config = json::object();
    try {
        if (!config_path.empty()) {
            config = json::parse(read_file(config_path));
            if (!config.is_object())
                throw std::invalid_argument("config file must hold a JSON object");
            if (config.contains("command") && config["command"] != command)
                throw std::invalid_argument("config file is for command '" + config["command"].dump()
                                            + "', not '" + command + "'");
        }
        config["command"] = command;
        if (!config.contains("parameters"))
            config["parameters"] = json::object();
        const json overrides = parse_parameters(extras);
        for (const auto& [k, v] : overrides.items())
            config["parameters"][k] = v;
        if (seed)
            config["seed"] = *seed;
        if (!out_dir.empty())
            config["output_dir"] = out_dir;
    } catch (const std::exception& e) {
        std::cerr << "qcurv: " << e.what() << "\n";
        return 2;
    }

    qcurv_report* report = nullptr;
    const qcurv_status status = axis.empty() ? qcurv_run(config.dump().c_str(), &report)
                                             : qcurv_sweep(config.dump().c_str(), axis.c_str(), workers, &report);
    if (status != QCURV_OK) {
        std::cerr << "qcurv: " << qcurv_last_error() << "\n";
        return status == QCURV_NUMERICAL_ERROR ? 3 : 2;
    }
    const int code = qcurv_report_exit_code(report);
    if (code == 2) {
        std::cerr << "qcurv: " << qcurv_report_error(report) << "\n";
        qcurv_report_free(report);
        return code;
    }
    const std::string dir = config.value("output_dir", std::string());
    if (!dir.empty() && qcurv_report_write(report, dir.c_str()) != QCURV_OK) {
        std::cerr << "qcurv: " << qcurv_last_error() << "\n";
        qcurv_report_free(report);
        return 3;
    }
    std::cout << qcurv_report_json(report) << "\n";
    for (std::size_t i = 0; i < qcurv_report_warning_count(report); ++i)
        std::cerr << "warning: " << qcurv_report_warning(report, i) << "\n";
    if (code != 0)
        std::cerr << "qcurv: " << qcurv_report_error(report) << "\n";
    qcurv_report_free(report);
    return code;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"qcurv: singular Q-curvature quotient toolkit"};
    app.set_version_flag("--version", std::string(qcurv_version()));
    app.require_subcommand(1);

    std::string config_path, out_dir, axis;
    long long seed = 0;
    int workers = 1;
    std::string chosen;
    for (const char* name : commands) {
        auto* sub = app.add_subcommand(name, std::string("run the ") + name + " pipeline; extra --<param> <value> "
                                                                         "pairs set command parameters");
        sub->add_option("--config", config_path, "JSON run config");
        sub->add_option("--out", out_dir, "directory for report.json and CSV tables");
        sub->add_option("--seed", seed, "random seed");
        sub->add_option("--workers", workers, "parallel runs in a sweep")->check(CLI::PositiveNumber);
        sub->add_option("--axis", axis, "sweep grid as JSON object, e.g. '{\"n\": [6, 8]}'");
        sub->allow_extras();
        sub->callback([&chosen, name] { chosen = name; });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    auto* sub = app.get_subcommand(chosen);
    const bool has_seed = sub->count("--seed") > 0;
    return execute(chosen, config_path, out_dir, has_seed ? &seed : nullptr, workers, axis, sub->remaining());
}
