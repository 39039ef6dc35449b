#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "mmflow/config.hpp"
#include "mmflow/io.hpp"
#include "mmflow/runner.hpp"

using namespace mmflow;
namespace fs = std::filesystem;

namespace {

const fs::path kScenarios = MMFLOW_SCENARIO_DIR;

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("mmflow_test_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<ParseError> errors_of(std::string_view text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.errors();
    }
    return {};
}

constexpr std::string_view kDong = R"(
[scenario.dong]
n = 3
epsilon = 0.1
gamma = 1.0
rule = dong_hopfield
nu = 0.1
W0_diag = [2.0, 0.5, -1.0]
x0 = [0.1, 0.2, 0.3]
dt = 0.005
t_end = 6
k = 0.5
record_stride = 4
)";

std::vector<RunResult> run_sweep(std::string_view base, const Sweep& sweep, const std::string& tag) {
    const auto sc = with_sweep(parse_config(base).front(), sweep);
    return run_all(expand(sc), fresh_dir(tag), 2);
}

}  // namespace

TEST_CASE("shipped scenario files parse") {
    const auto anti = load_config(kScenarios / "anti_hebbian.cfg");
    REQUIRE(anti.size() == 1);
    CHECK(anti[0].name == "anti_hebbian");
    CHECK(std::holds_alternative<rule::AntiHebbian>(anti[0].sim.rule));
    CHECK(anti[0].sim.n == 4);
    CHECK(anti[0].sim.dt == 0.0025);

    std::size_t count = 0;
    for (const auto& entry : fs::directory_iterator(kScenarios))
        if (entry.path().extension() == ".cfg") count += load_config(entry.path()).size();
    CHECK(count == 8);
}

TEST_CASE("parse errors are anchored to lines") {
    auto errs = errors_of("[scenario.a]\nn = 2\nrule = anti_hebbian\ngamma = -1\n");
    REQUIRE(errs.size() == 1);
    CHECK(errs[0].line == 4);
    CHECK(errs[0].message.find("gamma >= 0") != std::string::npos);

    errs = errors_of("[scenario.a]\nn = 2\nrule = anti_hebbian\nbogus = 3\nepsilon = fast\n");
    REQUIRE(errs.size() == 2);
    CHECK(errs[0].line == 4);
    CHECK(errs[0].message.find("unknown key") != std::string::npos);
    CHECK(errs[1].line == 5);

    errs = errors_of("[scenario.a]\nn = 2\nrule = anti_hebbian\ndt = 0.5\n");
    REQUIRE_FALSE(errs.empty());

    errs = errors_of("[scenario.a]\nn = 2\nrule = anti_hebbian\n[scenario.a]\nn = 2\nrule = anti_hebbian\n");
    REQUIRE(errs.size() == 1);
    CHECK(errs[0].line == 4);

    errs = errors_of("n = 2\n");
    REQUIRE(errs.size() == 1);
    CHECK(errs[0].line == 1);

    errs = errors_of("[scenario.a]\nrule = anti_hebbian\n");
    REQUIRE(errs.size() == 1);
    CHECK(errs[0].line == 1);

    errs = errors_of("[scenario.a]\nn = 2\nrule = anti_hebbian\nnu = 0.5\n");
    REQUIRE(errs.size() == 1);
    CHECK(errs[0].line == 4);

    errs = errors_of("[scenario.a]\nn = 2\nrule = anti_hebbian\nx0 = [1, 2, 3]\n");
    REQUIRE(errs.size() == 1);
    CHECK(errs[0].line == 4);
}

TEST_CASE("list-valued numeric keys expand into sweeps") {
    const auto sc = parse_config("[scenario.s]\nn = 2\nrule = anti_hebbian\ngamma = [0.3, 1, 3]\n").front();
    REQUIRE(sc.sweep.has_value());
    CHECK(sc.sweep->param == "gamma");
    const auto runs = expand(sc);
    REQUIRE(runs.size() == 3);
    CHECK(runs[0].sim.gamma.gamma0 == 0.3);
    CHECK(runs[2].sim.gamma.gamma0 == 3.0);
    CHECK(runs[1].run_name != runs[2].run_name);
    CHECK(runs[2].sim.dt <= max_stable_dt(runs[2].sim));

    CHECK_FALSE(errors_of("[scenario.s]\nn = 2\nrule = anti_hebbian\ngamma = [0.3, -1]\n").empty());
    CHECK_FALSE(errors_of("[scenario.s]\nn = 2\nrule = anti_hebbian\ngamma = [1, 2]\nepsilon = [0.1, 0.2]\n").empty());
    CHECK(is_sweepable("nu"));
    CHECK_FALSE(is_sweepable("rule"));
    CHECK_THROWS_AS(with_sweep(sc, Sweep{"rule", {1.0}}), ConfigError);
}

TEST_CASE("seed override replaces every scenario seed") {
    const auto a = load_config(kScenarios / "anti_hebbian.cfg", 1234);
    const auto b = load_config(kScenarios / "anti_hebbian.cfg");
    CHECK(a[0].sim.seed == 1234);
    CHECK_FALSE(a[0].sim.W0 == b[0].sim.W0);
    CHECK(load_config(kScenarios / "anti_hebbian.cfg", 1234)[0].sim.W0 == a[0].sim.W0);
}

TEST_CASE("render round-trips every shipped fixture") {
    for (const auto& entry : fs::directory_iterator(kScenarios)) {
        if (entry.path().extension() != ".cfg") continue;
        CAPTURE(entry.path().string());
        const auto original = load_config(entry.path());
        ParseOptions opts;
        opts.base_dir = kScenarios;
        const auto again = parse_config(render(original), opts);
        REQUIRE(again.size() == original.size());
        for (std::size_t i = 0; i < again.size(); ++i) {
            CHECK(again[i].name == original[i].name);
            CHECK(config_digest(again[i].sim) == config_digest(original[i].sim));
            CHECK(canonical_config_text(again[i].sim) == canonical_config_text(original[i].sim));
            CHECK(again[i].expect == original[i].expect);
            CHECK(again[i].checks_enabled == original[i].checks_enabled);
            CHECK(render(again[i]) == render(original[i]));
        }
    }
}

TEST_CASE("trajectory csv and report json round-trip") {
    const auto sc = load_config(kScenarios / "hadamard_hebbian.cfg").front();
    const auto run = verify_run(sc.sim);
    std::stringstream csv;
    write_trajectory_csv(csv, run.trajectory);
    std::string header;
    std::getline(std::stringstream(csv.str()), header);
    CHECK(header == kTrajectoryCsvHeader);
    const auto back = read_trajectory_csv(csv);
    CHECK(back.times == run.trajectory.times);
    CHECK(back.channels.mu_W == run.trajectory.channels.mu_W);
    CHECK(back.channels.skew_fro == run.trajectory.channels.skew_fro);
    CHECK(verify_trajectory(back, sc.sim) == run.report);

    const auto json = report_to_json(run.report);
    CHECK(json.contains("status"));
    CHECK(json.contains("config_digest"));
    for (const auto& c : json["checks"])
        for (const char* key : {"name", "passed", "worst_margin", "location_t", "tolerance"}) CHECK(c.contains(key));
    CHECK(report_from_json(nlohmann::json::parse(render_report(run.report))) == run.report);
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(parse_double(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("dense matrix files") {
    std::stringstream ss("# K\n1 2\n\n2 5\n");
    const auto K = read_dense_matrix(ss);
    CHECK(K == SquareMatrix::from_rows({{1, 2}, {2, 5}}));
    std::stringstream out;
    write_dense_matrix(out, K);
    CHECK(read_dense_matrix(out) == K);
    std::stringstream ragged("1 2\n3\n");
    CHECK_THROWS_AS(read_dense_matrix(ragged), ValidationError);
}

TEST_CASE("run writes per-run artifacts and reports expectations") {
    const auto dir = fresh_dir("run");
    std::ostringstream log;
    std::vector<Scenario> scenarios = load_config(kScenarios / "dong_hopfield.cfg");
    for (auto& s : load_config(kScenarios / "hebbian_blowup.cfg")) scenarios.push_back(s);
    CHECK(run(scenarios, dir, 2, log) == 0);
    CHECK(fs::exists(dir / "dong_hopfield" / "trajectory.csv"));
    CHECK(fs::exists(dir / "dong_hopfield" / "report.json"));
    CHECK(fs::exists(dir / "summary.txt"));
    const auto blow = report_from_json(nlohmann::json::parse(slurp(dir / "hebbian_blowup" / "report.json")));
    CHECK(blow.status == ReportStatus::BlowUp);

    // The same blow-up scenario without its expectation fails the exit status.
    auto unexpected = load_config(kScenarios / "hebbian_blowup.cfg");
    unexpected[0].expect = ReportStatus::Pass;
    std::ostringstream log2;
    CHECK(run(unexpected, fresh_dir("run_unexpected"), 1, log2) != 0);
    CHECK(log2.str().find("blow_up") != std::string::npos);
}

TEST_CASE("empty scenario list") {
    const auto dir = fresh_dir("empty");
    std::ostringstream log;
    CHECK(run({}, dir, 4, log) == 0);
    CHECK_FALSE(fs::exists(dir));
}

TEST_CASE("artifacts are byte-identical across runs and job counts") {
    const auto scenarios = load_config(kScenarios / "covariance.cfg");
    const auto a = fresh_dir("det_a");
    const auto b = fresh_dir("det_b");
    std::ostringstream log;
    REQUIRE(run(scenarios, a, 1, log) == 0);
    REQUIRE(run(scenarios, b, 3, log) == 0);
    for (const char* f : {"covariance/trajectory.csv", "covariance/report.json", "summary.txt"})
        CHECK(slurp(a / f) == slurp(b / f));
}

TEST_CASE("sweep summary exposes the crossing boundary in gamma") {
    const auto results = run_sweep(kDong, Sweep{"gamma", {0.2, 0.4, 0.8}}, "sweep_gamma");
    const auto rows = sweep_summary(results);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].crossing_status == CheckStatus::HypothesisUnmet);
    CHECK(rows[1].crossing_status == CheckStatus::HypothesisUnmet);
    CHECK(rows[2].crossing_status == CheckStatus::Pass);
    REQUIRE(rows[2].crossing_time.has_value());
    // mu0 = 2, D = 0.3, k = 0.5, gamma = 0.8: t* = ln(2 / (0.5 - 0.375)) / 0.8.
    CHECK(*rows[2].crossing_time <= std::log(16.0) / 0.8 + 10 * 0.005 * 4);
    for (const auto& r : rows) CHECK(r.status == ReportStatus::Pass);
    const auto csv = render_sweep_csv(rows, "gamma");
    CHECK(csv.rfind("gamma,status,theorem1_margin,crossing_status,crossing_t\n", 0) == 0);
}

TEST_CASE("sweep summary exposes the crossing boundary in nu") {
    // gamma = 1, k = 0.5, n = 3: boundary at nu = gamma k / n = 1/6.
    const auto rows = sweep_summary(run_sweep(kDong, Sweep{"nu", {0.1, 0.16, 0.17, 0.3}}, "sweep_nu"));
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].crossing_status == CheckStatus::Pass);
    CHECK(rows[1].crossing_status == CheckStatus::Pass);
    CHECK(rows[2].crossing_status == CheckStatus::HypothesisUnmet);
    CHECK(rows[3].crossing_status == CheckStatus::HypothesisUnmet);
}

TEST_CASE("sweep summary edge cases") {
    const auto one = sweep_summary(run_sweep(kDong, Sweep{"gamma", {0.8}}, "sweep_one"));
    CHECK(one.size() == 1);

    auto mixed = run_sweep(kDong, Sweep{"gamma", {0.8}}, "sweep_mixed");
    auto other = run_all(expand(load_config(kScenarios / "anti_hebbian.cfg")), fresh_dir("sweep_other"), 1);
    mixed.push_back(other.front());
    CHECK_THROWS_AS(sweep_summary(mixed), ValidationError);
}

TEST_CASE("MMFLOW_SEED parsing") {
    ::unsetenv("MMFLOW_SEED");
    CHECK_FALSE(seed_from_environment().has_value());
    ::setenv("MMFLOW_SEED", "77", 1);
    CHECK(seed_from_environment() == 77u);
    ::setenv("MMFLOW_SEED", "seven", 1);
    CHECK_THROWS_AS(seed_from_environment(), ValidationError);
    ::unsetenv("MMFLOW_SEED");
}
