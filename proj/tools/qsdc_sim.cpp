// qsdc-sim: Monte Carlo driver for the entangled-pair direct communication
// protocol.
//
//   qsdc-sim run <config> [--key=value ...] [--report <path>]
//   qsdc-sim sweep <config> [--key=value ...] [--report <path>]
//   qsdc-sim validate-probe <config>
//
// Exit codes: 0 success, 1 configuration error, 2 I/O error.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "qsdc/harness.hpp"

namespace {

using qsdc::harness::json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitIo = 2;

json load_with_overrides(const std::string& path, const std::vector<std::string>& extras)
{
    json doc = qsdc::harness::load_config_file(path);
    for (const auto& arg : extras) {
        if (arg.rfind("--", 0) != 0 || arg.find('=') == std::string::npos)
            throw qsdc::error(qsdc::errc::config_invalid, "unrecognized argument '" + arg + "' (expected --key=value)");
        const auto eq = arg.find('=');
        qsdc::harness::apply_override(doc, arg.substr(2, eq - 2), qsdc::harness::parse_override_value(arg.substr(eq + 1)));
    }
    return doc;
}

void print_run(const qsdc::harness::AggregateReport& r, const std::string& path)
{
    std::cout << "sessions              " << r.n_sessions << '\n'
              << "abort_rate            " << r.abort_rate << "  (predicted " << r.analytic.expected_abort_probability
              << ")\n"
              << "mean_decoy_error_rate " << r.mean_decoy_error_rate << '\n'
              << "z_decoy_error_rate    " << r.z_decoy_error_rate << "  (predicted " << r.analytic.z_error << ", n="
              << r.decoy_tally.z_checked << ")\n"
              << "x_decoy_error_rate    " << r.x_decoy_error_rate << "  (predicted " << r.analytic.x_error << ", n="
              << r.decoy_tally.x_checked << ")\n"
              << "message_bit_error     " << r.message_bit_error_rate << "  (" << r.bit_errors << "/" << r.bits_delivered
              << ")\n"
              << "delivered_fraction    " << r.delivered_fraction << '\n'
              << "report                " << path << '\n';
}

int validate_probe_command(const std::string& path)
{
    json doc = qsdc::harness::load_config_file(path);
    const json* probe = nullptr;
    if (doc.contains("attack") && doc["attack"].contains("probe"))
        probe = &doc["attack"]["probe"];
    else if (doc.contains("probe"))
        probe = &doc["probe"];
    if (!probe)
        throw qsdc::error(qsdc::errc::config_invalid, "no attack.probe or probe object in " + path);

    // Reuse the attack parser so the accepted probe syntax matches `run`.
    json wrapper = {{"schema_version", qsdc::harness::kSchemaVersion},
                    {"session", json::object()},
                    {"attack", {{"type", "unitary_probe"}, {"probe", *probe}}}};
    qsdc::harness::RunConfig cfg;
    try {
        cfg = qsdc::harness::parse_run_config(wrapper);
    } catch (const qsdc::error& e) {
        std::cout << e.what() << '\n';
        return kExitConfig;
    }
    const auto& iso = std::get<qsdc::UnitaryProbe>(cfg.channel.attack).iso;
    const auto v = qsdc::validate_probe(iso);
    std::cout << "isometry: " << (v.ok() ? "ok" : "INVALID") << '\n';
    for (const auto& violation : v.violations)
        std::cout << "  " << qsdc::to_string(violation.constraint) << " residual " << violation.residual << '\n';
    std::cout << "magnitude relations |alpha'|=|alpha|, |beta'|=|beta|: "
              << (qsdc::satisfies_magnitude_relations(iso) ? "hold" : "do not hold") << '\n';
    if (v.ok()) {
        const auto rates = qsdc::probe_error_rates(iso);
        std::cout << "z_error " << rates.z_error << "\nx_error " << rates.x_error << '\n';
    }
    return v.ok() ? kExitOk : kExitConfig;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Monte Carlo simulator for entangled-pair quantum secure direct communication"};
    app.require_subcommand(1);

    std::string config_path;
    std::string report_override;

    auto* run = app.add_subcommand("run", "run a batch of sessions");
    run->add_option("config", config_path, "config file (JSON)")->required();
    run->add_option("--report", report_override, "report output path");
    run->allow_extras();

    auto* sweep = app.add_subcommand("sweep", "run one batch per point of the config's sweep grid");
    sweep->add_option("config", config_path, "config file (JSON)")->required();
    sweep->add_option("--report", report_override, "report output path");
    sweep->allow_extras();

    auto* validate = app.add_subcommand("validate-probe", "check a probe isometry and print diagnostics");
    validate->add_option("config", config_path, "config file (JSON)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*validate)
            return validate_probe_command(config_path);

        if (*run) {
            json doc = load_with_overrides(config_path, run->remaining());
            auto cfg = qsdc::harness::parse_run_config(doc);
            if (!report_override.empty())
                cfg.report_path = report_override;
            const auto path = qsdc::harness::resolve_report_path(cfg.report_path);
            const auto report = qsdc::harness::run_batch_in_memory(cfg);
            qsdc::harness::write_report(qsdc::harness::to_json(report), path);
            print_run(report, path.string());
            return kExitOk;
        }

        json doc = load_with_overrides(config_path, sweep->remaining());
        const auto axes = qsdc::harness::parse_sweep_axes(doc);
        std::string report_path = report_override;
        if (report_path.empty() && doc.contains("report_path") && doc["report_path"].is_string())
            report_path = doc["report_path"].get<std::string>();
        const auto path = qsdc::harness::resolve_report_path(report_path);
        const auto points = qsdc::harness::sweep(doc, axes);
        qsdc::harness::write_report(qsdc::harness::sweep_to_json(points), path);
        std::cout << qsdc::harness::summary_table(points) << "report " << path.string() << '\n';
        return kExitOk;
    } catch (const qsdc::error& e) {
        std::cerr << "qsdc-sim: " << e.what() << '\n';
        return e.code() == qsdc::errc::io_error ? kExitIo : kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "qsdc-sim: " << e.what() << '\n';
        return kExitConfig;
    }
}
