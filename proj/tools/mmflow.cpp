// mmflow: simulate plastic recurrent networks and verify matrix measure
// flow inequalities along the trajectories.

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>

#include "mmflow/config.hpp"
#include "mmflow/io.hpp"
#include "mmflow/runner.hpp"

namespace {

using namespace mmflow;

Vector parse_value_list(std::string text) {
    if (!text.empty() && text.front() != '[') text = "[" + text + "]";
    Vector out;
    std::string body = text.substr(1, text.size() - 2);
    std::size_t pos = 0;
    while (pos <= body.size()) {
        const auto comma = body.find(',', pos);
        out.push_back(parse_double(body.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos)));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

int cmd_run(const std::string& config, const std::string& out, unsigned jobs) {
    const auto scenarios = load_config(config, seed_from_environment());
    return run(scenarios, out, jobs, std::cout);
}

int cmd_sweep(const std::string& config, const std::string& scenario_name, const std::string& param,
              const std::string& values, const std::string& out, unsigned jobs) {
    const auto scenarios = load_config(config, seed_from_environment());
    const Sweep sweep{param, parse_value_list(values)};
    bool ok = true;
    bool matched = false;
    for (const auto& sc : scenarios) {
        if (!scenario_name.empty() && sc.name != scenario_name) continue;
        matched = true;
        const Scenario swept = with_sweep(sc, sweep);
        const auto results = run_all(expand(swept), out, jobs);
        for (const auto& r : results) {
            std::cout << summary_line(r) << '\n';
            ok = ok && r.as_expected;
        }
        const std::string table = render_sweep_csv(sweep_summary(results), param);
        std::ofstream csv(std::filesystem::path(out) / ("sweep_" + sc.name + ".csv"), std::ios::binary);
        if (!csv) throw std::runtime_error("cannot write sweep table under " + out);
        csv << table;
        std::cout << table;
    }
    if (!matched) throw ValidationError("no scenario named '" + scenario_name + "'");
    return ok ? 0 : 1;
}

struct VerifyArgs {
    std::string trajectory;
    std::string report;
    std::string config;
    std::string scenario;
    std::optional<double> gamma;
    double gamma_amplitude = 0.0;
    double gamma_omega = 0.0;
    std::optional<double> D;
    std::optional<double> k;
};

int cmd_verify(const VerifyArgs& a) {
    std::ifstream in(a.trajectory);
    if (!in) throw std::runtime_error("cannot open " + a.trajectory);
    Trajectory traj = read_trajectory_csv(in);

    VerificationReport report;
    if (!a.config.empty()) {
        const auto scenarios = load_config(a.config, seed_from_environment());
        const Scenario* sc = nullptr;
        for (const auto& s : scenarios)
            if (a.scenario.empty() ? scenarios.size() == 1 : s.name == a.scenario) sc = &s;
        if (sc == nullptr) throw ValidationError("--scenario must name one scenario of " + a.config);
        if (sc->sweep) throw ValidationError("re-verification of swept scenarios needs a single sweep point");
        if (!traj.times.empty() && traj.times.back() < sc->sim.t_end - 0.5 * sc->sim.dt) {
            traj.status = RunStatus::BlowUp;
            traj.blow_up_time = traj.times.back();
        }
        VerifyOptions opts = sc->verify;
        opts.checks.erase("contraction_pair");
        report = verify_trajectory(traj, sc->sim, opts);
    } else {
        if (!a.gamma) throw ValidationError("--gamma is required without --config");
        const GammaSpec gamma{*a.gamma, a.gamma_amplitude, a.gamma_omega};
        report.checks.push_back(check_theorem1(traj, gamma));
        if (a.D && gamma.is_constant() && gamma.gamma0 > 0.0) {
            report.checks.push_back(check_corollary_bound(traj, gamma.gamma0, *a.D));
            if (a.k) report.checks.push_back(check_threshold_crossing(traj, gamma.gamma0, *a.D, *a.k));
        }
        report.status = aggregate_status(report.checks, false);
    }
    std::ofstream out(a.report, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + a.report);
    out << render_report(report);
    std::cout << a.trajectory << ": " << to_string(report.status) << '\n';
    return report.status == ReportStatus::Pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Matrix measure flow simulator and verifier"};
    app.require_subcommand(1);

    std::string config, out, param, values, scenario;
    unsigned jobs = 1;

    auto* run_cmd = app.add_subcommand("run", "Simulate and verify every scenario in a config file");
    run_cmd->add_option("--config", config, "Scenario file")->required()->check(CLI::ExistingFile);
    run_cmd->add_option("--out", out, "Output directory")->required();
    run_cmd->add_option("--jobs", jobs, "Parallel runs")->check(CLI::PositiveNumber);

    auto* sweep_cmd = app.add_subcommand("sweep", "Sweep one numeric parameter of the scenarios in a config file");
    sweep_cmd->add_option("--config", config, "Scenario file")->required()->check(CLI::ExistingFile);
    sweep_cmd->add_option("--scenario", scenario, "Only sweep this scenario");
    sweep_cmd->add_option("--param", param, "Parameter key, e.g. gamma")->required();
    sweep_cmd->add_option("--values", values, "Comma list, e.g. 0.2,0.4,0.8")->required();
    sweep_cmd->add_option("--out", out, "Output directory")->required();
    sweep_cmd->add_option("--jobs", jobs, "Parallel runs")->check(CLI::PositiveNumber);

    VerifyArgs va;
    auto* verify_cmd = app.add_subcommand("verify", "Re-check a stored trajectory CSV");
    verify_cmd->add_option("--trajectory", va.trajectory, "trajectory.csv")->required()->check(CLI::ExistingFile);
    verify_cmd->add_option("--report", va.report, "Report JSON to write")->required();
    verify_cmd->add_option("--config", va.config, "Scenario file the trajectory came from");
    verify_cmd->add_option("--scenario", va.scenario, "Scenario name within --config");
    verify_cmd->add_option("--gamma", va.gamma, "Leak rate gamma0 (without --config)");
    verify_cmd->add_option("--gamma-amplitude", va.gamma_amplitude, "Relative gamma modulation");
    verify_cmd->add_option("--gamma-omega", va.gamma_omega, "Gamma modulation frequency");
    verify_cmd->add_option("--D", va.D, "Drive bound for the corollary envelope");
    verify_cmd->add_option("--k", va.k, "Threshold for the crossing check");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) return cmd_run(config, out, jobs);
        if (*sweep_cmd) return cmd_sweep(config, scenario, param, values, out, jobs);
        if (*verify_cmd) return cmd_verify(va);
    } catch (const ConfigError& e) {
        std::cerr << "config error:\n" << e.what();
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
