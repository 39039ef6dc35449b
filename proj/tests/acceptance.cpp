// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>

#include "mmflow/config.hpp"
#include "mmflow/io.hpp"
#include "mmflow/random.hpp"
#include "mmflow/runner.hpp"
#include "oracles.hpp"

using namespace mmflow;
namespace fs = std::filesystem;

namespace {

const fs::path kScenarios = MMFLOW_SCENARIO_DIR;

struct Outcome {
    bool pass = true;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

Scenario scenario(const char* name) { return load_config(kScenarios / (std::string(name) + ".cfg")).front(); }

std::vector<Scenario> all_scenarios() {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(kScenarios))
        if (e.path().extension() == ".cfg") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::vector<Scenario> out;
    for (const auto& f : files)
        for (auto& s : load_config(f)) out.push_back(std::move(s));
    return out;
}

Outcome measure_axioms() {
    std::mt19937_64 gen(20240601);
    std::normal_distribution<double> normal(0.0, 1.0);
    const std::size_t sizes[] = {2, 5, 16};
    const double cs[] = {0.0, 0.5, 1.0, 7.3};
    double worst_sub = -INFINITY, worst_hom = 0.0, worst_dom = -INFINITY;
    bool ok = true;
    for (int pair = 0; pair < 1000; ++pair) {
        const std::size_t n = sizes[pair % 3];
        SquareMatrix A(n), B(n);
        for (double& v : A.values()) v = normal(gen);
        for (double& v : B.values()) v = normal(gen);
        for (auto id : {MeasureId::Mu1, MeasureId::Mu2, MeasureId::MuInf}) {
            const double mA = measure(A, id), mB = measure(B, id);
            const double sub = measure(A + B, id) - mA - mB;
            worst_sub = std::max(worst_sub, sub);
            ok = ok && sub <= 1e-9;
            for (double c : cs) {
                const double err = std::abs(measure(c * A, id) - c * mA);
                worst_hom = std::max(worst_hom, err / ((1.0 + c) * std::abs(mA)));
                ok = ok && err <= 1e-9 * (1.0 + c) * std::abs(mA);
            }
            for (const auto* M : {&A, &B}) {
                const double dom = measure(*M, id) - operator_norm(*M, id);
                worst_dom = std::max(worst_dom, dom);
                ok = ok && dom <= 1e-9;
            }
        }
    }
    return {ok, fmt("max subadditivity excess %.3g, max relative homogeneity error %.3g, max mu - norm %.3g",
                    worst_sub, worst_hom, worst_dom)};
}

Outcome finite_h_probe() {
    std::mt19937_64 gen(777);
    std::normal_distribution<double> normal(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const std::size_t n = 2 + std::size_t(i % 15);
        SquareMatrix W(n);
        for (double& v : W.values()) v = normal(gen);
        worst = std::max(worst, std::abs(mu_2(W) - oracle::finite_h_measure(W, MeasureId::Mu2, 1e-7)));
    }
    return {worst <= 1e-5, fmt("max |mu2 - probe| = %.3g (limit 1e-5)", worst)};
}

// Worst flow-inequality residual after removing what rounding in the two
// mu_W samples of each forward difference can produce.
double positive_residual(const Trajectory& traj, const SimConfig& cfg) {
    const auto& ch = traj.channels;
    const double eps = std::numeric_limits<double>::epsilon();
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
        const double h = traj.times[i + 1] - traj.times[i];
        const double r = dini_forward(ch.mu_W, traj.times, i) + cfg.gamma.at(traj.times[i]) * ch.mu_W[i] - ch.mu_G[i];
        const double scale = std::abs(ch.mu_W[i]) + std::abs(ch.mu_W[i + 1]) + std::abs(ch.mu_G[i]) * h;
        const double noise = 64.0 * eps * std::max(scale, 1.0) / h;
        worst = std::max(worst, r - noise);
    }
    return worst;
}

Outcome theorem1_all() {
    Outcome out;
    for (const auto& sc : all_scenarios()) {
        SimConfig cfg = sc.sim;
        const auto traj = simulate(cfg);
        const double rho = slack(traj);
        const double r = theorem1_residual(traj, cfg.gamma);
        SimConfig half = cfg;
        half.dt = cfg.dt / 2.0;
        const auto traj_half = simulate(half);
        const double r1 = positive_residual(traj, cfg);
        const double r2 = positive_residual(traj_half, half);
        const bool within = r <= rho;
        const bool halves = r2 <= 0.5 * r1;
        out.pass = out.pass && within && halves;
        out.detail += fmt("\n    %-20s residual %.4g <= rho %.4g %s; halved dt: %.4g (ratio %s) %s", sc.name.c_str(),
                          r, rho, within ? "ok" : "VIOLATED", theorem1_residual(traj_half, half.gamma),
                          r1 > 0.0 ? fmt("%.5f", r2 / r1).c_str() : "n/a, none above rounding",
                          halves ? "ok" : "NOT HALVED");
    }
    return out;
}

Outcome corollary() {
    const auto anti = simulate(scenario("anti_hebbian").sim);
    const auto a = check_corollary_bound(anti, 1.0, 0.0);
    const auto dong_cfg = scenario("dong_hopfield").sim;
    const auto dong = simulate(dong_cfg);
    const auto d = check_corollary_bound(dong, 1.0, 0.1 * 3);
    const bool ok = dong_cfg.gamma.gamma0 == 1.0 && a.passed && d.passed;
    return {ok, fmt("anti_hebbian margin %.4g (tol %.4g); dong_hopfield D=0.3 margin %.4g (tol %.4g)", a.worst_margin,
                    a.tolerance_used, d.worst_margin, d.tolerance_used)};
}

Outcome crossing() {
    const auto cfg = scenario("dong_hopfield").sim;
    const auto traj = simulate(cfg);
    const double mu0 = traj.channels.mu_W[0];
    const auto r = check_threshold_crossing(traj, 1.0, 0.3, 0.5);
    const double deadline = std::log(10.0) + 10.0 * sample_spacing(traj);
    const bool setup = std::abs(mu0 - 2.0) < 1e-12 && cfg.n == 3 && cfg.k_threshold == 0.5;
    const bool ok = setup && r.passed && r.observed <= deadline;
    return {ok, fmt("mu_W(0) = %.6g, crossed k = 0.5 at t = %.4f, bound ln 10 + grace = %.4f", mu0, r.observed,
                    deadline)};
}

Outcome symmetry() {
    Outcome out;
    for (const char* name : {"anti_hebbian", "hadamard_hebbian"}) {
        const auto base = scenario(name).sim;
        for (double gamma : {0.3, 1.0, 3.0}) {
            SimConfig cfg = base;
            cfg.gamma.gamma0 = gamma;
            cfg.dt = std::min(cfg.dt, max_stable_dt(cfg));
            if (frobenius_norm(skew_part(cfg.W0)) == 0.0) cfg.W0 = seeded_normal_matrix(derive_seed(cfg.seed, 1), cfg.n, 3.0);
            const auto traj = simulate(cfg);
            const double rate = fit_decay_rate(traj.channels.skew_fro, traj.times);
            const double rel = std::abs(rate - gamma) / gamma;
            out.pass = out.pass && rel <= 0.02;
            out.detail += fmt("\n    %-17s gamma %-4g fitted rate %.6f (rel err %.2e)", name, gamma, rate, rel);
        }
        SimConfig sym = base;
        sym.W0 = symmetric_part(sym.W0);
        const auto traj = simulate(sym);
        double worst = 0.0;
        for (double s : traj.channels.skew_fro) worst = std::max(worst, s);
        out.pass = out.pass && worst < 1e-10;
        out.detail += fmt("\n    %-17s symmetric W0: max skew_fro %.3g", name, worst);
    }
    return out;
}

Outcome schur() {
    std::mt19937_64 gen(4242);
    std::normal_distribution<double> normal(0.0, 1.5);
    const RuleState none;
    double worst = -INFINITY, disagreement = 0.0;
    for (int i = 0; i < 200; ++i) {
        const std::size_t n = 1 + std::size_t(i % 4);
        const auto K = make_psd(derive_seed(99, std::uint64_t(i)), n, 2.0);
        Vector x(n);
        for (double& v : x) v = normal(gen);
        const auto G = evaluate_G(rule::HadamardHebbian{K}, SquareMatrix::zeros(n), x, 0.0, none);
        const double ours = mu_2(G);
        const double ref = oracle::eigen_symmetric(G).back();
        worst = std::max({worst, ours, ref});
        disagreement = std::max(disagreement, std::abs(ours - ref));
    }
    return {worst <= 1e-9 && disagreement <= 1e-12,
            fmt("max mu2 over 200 pairs %.3g, max disagreement with reference eigensolver %.3g", worst, disagreement)};
}

SimConfig frozen(const SquareMatrix& W) {
    SimConfig cfg;
    cfg.n = W.size();
    cfg.epsilon = 0.1;
    cfg.gamma = GammaSpec{1.0, 0.0, 0.0};
    cfg.W0 = W;
    cfg.freeze_weights = true;
    cfg.x0 = Vector(cfg.n, 0.0);
    cfg.input = input::Sinusoid{Vector{0.6, -0.4}, 0.5, 0.0};
    cfg.dt = 0.01;
    cfg.t_end = 10.0;
    return cfg;
}

Outcome contraction() {
    const double c = std::cos(0.7), s = std::sin(0.7);
    const auto Q = SquareMatrix::from_rows({{c, -s}, {s, c}});
    const auto W = Q * SquareMatrix::diagonal(std::vector<double>{-0.5, -1.5}) * Q.transposed();
    const auto good = check_contraction_pair(frozen(W), Vector{2.0, -1.0}, Vector{-1.5, 2.5});
    const auto bad = check_contraction_pair(frozen(SquareMatrix::diagonal(std::vector<double>{2.0, 2.0})),
                                            Vector{1.0, 1.0}, Vector{-1.0, -1.0}, ContractionOptions{0.1, false});
    const bool ok = std::abs(mu_2(W) + 0.5) < 1e-12 && good.passed && good.observed > 0.0 &&
                    bad.status == CheckStatus::Fail;
    return {ok, fmt("mu2 = -0.5: rate %.4f, %.1f decades past 1e-6; diag(2,2): %s (rate %.3g)", good.observed,
                    good.worst_margin, std::string(to_string(bad.status)).c_str(), bad.observed)};
}

Outcome negative_controls() {
    const auto v = scenario("theorem1_violation");
    const auto vr = verify_run(v.sim, v.verify);
    const auto* t1 = vr.report.find("theorem1");
    const auto b = scenario("hebbian_blowup");
    const auto br = verify_run(b.sim, b.verify);
    const bool ok = t1 && !t1->passed && vr.report.status == ReportStatus::Fail &&
                    br.report.status == ReportStatus::BlowUp && br.trajectory.blow_up_time < b.sim.t_end;
    return {ok, fmt("violation fixture theorem1 margin %.4g (%s); blow-up fixture %s at t = %.3f of %.0f",
                    t1 ? t1->worst_margin : 0.0, t1 ? std::string(to_string(t1->status)).c_str() : "missing",
                    std::string(to_string(br.report.status)).c_str(), br.trajectory.blow_up_time, b.sim.t_end)};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome determinism() {
    const auto scenarios = all_scenarios();
    const fs::path root = fs::temp_directory_path() / "mmflow_acceptance_determinism";
    fs::remove_all(root);
    std::ostringstream log;
    run(scenarios, root / "a", 1, log);
    run(scenarios, root / "b", 4, log);
    std::size_t files = 0, differing = 0;
    for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
        if (!e.is_regular_file()) continue;
        ++files;
        const auto other = root / "b" / fs::relative(e.path(), root / "a");
        if (!fs::exists(other) || slurp(e.path()) != slurp(other)) ++differing;
    }
    fs::remove_all(root);
    return {files > 0 && differing == 0, fmt("%zu artifact files compared, %zu differ", files, differing)};
}

}  // namespace

int main() {
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"measure axioms", measure_axioms},
        {"closed form vs finite-h probe", finite_h_probe},
        {"flow inequality and slack scaling", theorem1_all},
        {"corollary envelope", corollary},
        {"finite-time crossing", crossing},
        {"symmetry convergence", symmetry},
        {"Schur product", schur},
        {"contraction pair", contraction},
        {"negative controls", negative_controls},
        {"determinism", determinism},
    };
    int failed = 0;
    int index = 0;
    for (const auto& [name, fn] : criteria) {
        ++index;
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::printf("criterion %d (%s): %s - %s\n", index, name, o.pass ? "PASS" : "FAIL", o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of 10 criteria passed\n", 10 - failed);
    return failed == 0 ? 0 : 1;
}
