#include "mmflow/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mmflow/io.hpp"

namespace mmflow {

std::string_view to_string(CheckStatus s) noexcept {
    switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::HypothesisUnmet: return "hypothesis_unmet";
    case CheckStatus::AssumptionViolated: return "assumption_violated";
    }
    return "?";
}

std::string_view to_string(ReportStatus s) noexcept {
    switch (s) {
    case ReportStatus::Pass: return "pass";
    case ReportStatus::Fail: return "fail";
    case ReportStatus::AssumptionViolated: return "assumption_violated";
    case ReportStatus::BlowUp: return "blow_up";
    }
    return "?";
}

std::optional<ReportStatus> parse_report_status(std::string_view text) noexcept {
    for (auto s : {ReportStatus::Pass, ReportStatus::Fail, ReportStatus::AssumptionViolated,
                   ReportStatus::BlowUp})
        if (to_string(s) == text) return s;
    return std::nullopt;
}

const CheckResult* VerificationReport::find(std::string_view name) const noexcept {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

namespace {

void require_channels(const Trajectory& traj, bool need_mu_g) {
    const std::size_t m = traj.times.size();
    if (m < 2) throw ValidationError("trajectory needs at least two samples");
    if (traj.channels.mu_W.size() != m || (need_mu_g && traj.channels.mu_G.size() != m))
        throw ValidationError("trajectory is missing mu_W/mu_G channels");
}

CheckResult unmet(std::string name, double observed = 0.0) {
    CheckResult r;
    r.name = std::move(name);
    r.status = CheckStatus::HypothesisUnmet;
    r.observed = observed;
    return r;
}

void finish(CheckResult& r) {
    r.passed = r.worst_margin >= 0.0;
    r.status = r.passed ? CheckStatus::Pass : CheckStatus::Fail;
}

}  // namespace

double sample_spacing(const Trajectory& traj) {
    double h = 0.0;
    for (std::size_t i = 0; i + 1 < traj.times.size(); ++i)
        h = std::max(h, traj.times[i + 1] - traj.times[i]);
    return h;
}

double slack(const Trajectory& traj, const SlackRule& rule) {
    double scale = 0.0;
    const auto& ch = traj.channels;
    for (std::size_t i = 0; i < ch.mu_W.size(); ++i) {
        const double g = i < ch.mu_G.size() ? std::abs(ch.mu_G[i]) : 0.0;
        scale = std::max(scale, std::abs(ch.mu_W[i]) + g);
    }
    return rule.C * sample_spacing(traj) * (1.0 + scale);
}

double dini_forward(std::span<const double> values, std::span<const double> times,
                    std::size_t index) {
    if (values.size() != times.size()) throw ValidationError("values/times length mismatch");
    if (index + 1 >= values.size())
        throw ValidationError("dini_forward index " + std::to_string(index) + " out of range");
    const double h = times[index + 1] - times[index];
    if (!(h > 0.0)) throw ValidationError("times must be strictly increasing");
    return (values[index + 1] - values[index]) / h;
}

double theorem1_residual(const Trajectory& traj, const GammaSpec& gamma) {
    require_channels(traj, true);
    const auto& ch = traj.channels;
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
        const double lhs = dini_forward(ch.mu_W, traj.times, i);
        const double rhs = -gamma.at(traj.times[i]) * ch.mu_W[i] + ch.mu_G[i];
        worst = std::max(worst, lhs - rhs);
    }
    return worst;
}

CheckResult check_theorem1(const Trajectory& traj, const GammaSpec& gamma, const SlackRule& rule) {
    require_channels(traj, true);
    const auto& ch = traj.channels;
    CheckResult r;
    r.name = "theorem1";
    r.tolerance_used = slack(traj, rule);
    r.worst_margin = std::numeric_limits<double>::infinity();
    r.observed = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
        const double residual = dini_forward(ch.mu_W, traj.times, i) +
                                gamma.at(traj.times[i]) * ch.mu_W[i] - ch.mu_G[i];
        const double margin = r.tolerance_used - residual;
        r.observed = std::max(r.observed, residual);
        if (margin < r.worst_margin) {
            r.worst_margin = margin;
            r.location = traj.times[i];
        }
    }
    finish(r);
    return r;
}

CheckResult check_corollary_bound(const Trajectory& traj, double gamma, double D,
                                  const SlackRule& rule) {
    if (!(gamma > 0.0)) throw ValidationError("corollary bound needs gamma > 0");
    require_channels(traj, false);
    const auto& mu = traj.channels.mu_W;
    CheckResult r;
    r.name = "corollary";
    r.tolerance_used = slack(traj, rule);
    r.worst_margin = std::numeric_limits<double>::infinity();
    r.observed = D;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const double envelope = mu[0] * std::exp(-gamma * traj.times[i]) + D / gamma;
        const double margin = envelope + r.tolerance_used - mu[i];
        if (margin < r.worst_margin) {
            r.worst_margin = margin;
            r.location = traj.times[i];
        }
    }
    finish(r);
    return r;
}

double crossing_time_bound(double mu0, double gamma, double D, double k) {
    if (mu0 <= k) return 0.0;
    return std::log(mu0 / (k - D / gamma)) / gamma;
}

CheckResult check_threshold_crossing(const Trajectory& traj, double gamma, double D, double k,
                                     const SlackRule& rule) {
    require_channels(traj, false);
    if (!(gamma > 0.0) || D / k >= gamma) return unmet("crossing");
    const auto& mu = traj.channels.mu_W;
    CheckResult r;
    r.name = "crossing";
    r.tolerance_used = slack(traj, rule);

    const double deadline = crossing_time_bound(mu[0], gamma, D, k) + 10.0 * sample_spacing(traj);
    std::size_t cross = traj.size();
    if (mu[0] <= k) {
        cross = 0;
    } else {
        for (std::size_t i = 0; i < traj.size(); ++i)
            if (mu[i] < k) {
                cross = i;
                break;
            }
    }
    if (cross == traj.size()) {
        // Never crossed: only a failure if the horizon reached the deadline.
        if (traj.times.back() < deadline) return unmet("crossing", deadline);
        r.worst_margin = deadline - traj.times.back();
        r.location = traj.times.back();
        r.observed = deadline;
        finish(r);
        return r;
    }

    const double t_cross = traj.times[cross];
    r.observed = t_cross;
    r.location = t_cross;
    r.worst_margin = deadline - t_cross;
    for (std::size_t i = cross; i < traj.size(); ++i) {
        const double margin = k + r.tolerance_used - mu[i];
        if (margin < r.worst_margin) {
            r.worst_margin = margin;
            r.location = traj.times[i];
        }
    }
    finish(r);
    return r;
}

double fit_decay_rate(std::span<const double> values, std::span<const double> times,
                      FitWindow window) {
    if (values.size() != times.size()) throw ValidationError("values/times length mismatch");
    double n = 0, st = 0, sy = 0, stt = 0, sty = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double t = times[i];
        if (t < window.t_begin || t > window.t_end) continue;
        if (!(values[i] >= 1e-12)) continue;
        const double y = std::log(values[i]);
        n += 1;
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
    }
    if (n < 3) throw ValidationError("decay fit needs at least 3 samples above the 1e-12 floor");
    const double denom = n * stt - st * st;
    if (!(denom > 0.0)) throw ValidationError("decay fit samples share one time");
    return -(n * sty - st * sy) / denom;
}

CheckResult check_skew_decay(const Trajectory& traj, const GammaSpec& gamma) {
    const auto& skew = traj.channels.skew_fro;
    if (skew.size() != traj.size() || traj.size() < 2)
        throw ValidationError("trajectory is missing the skew_fro channel");
    if (skew[0] == 0.0) return unmet("skew_decay");
    CheckResult r;
    r.name = "skew_decay";
    r.tolerance_used = 1e-6;
    r.worst_margin = std::numeric_limits<double>::infinity();
    // Rounding in W - W^T sets an absolute floor near eps |W|. Only channel
    // data is used so a trajectory read back from CSV verifies identically.
    double w_scale = std::max(1.0, skew[0]);
    for (double m : traj.channels.mu_W) w_scale = std::max(w_scale, std::abs(m));
    const double floor = 1e-7 * w_scale;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const double expected = skew[0] * std::exp(-gamma.integral(traj.times[i]));
        if (expected < floor) break;
        const double rel = std::abs(skew[i] - expected) / expected;
        const double margin = r.tolerance_used - rel;
        r.observed = std::max(r.observed, rel);
        if (margin < r.worst_margin) {
            r.worst_margin = margin;
            r.location = traj.times[i];
        }
    }
    if (!std::isfinite(r.worst_margin)) return unmet("skew_decay");
    finish(r);
    return r;
}

CheckResult check_skew_rate(const Trajectory& traj, double gamma) {
    const auto& skew = traj.channels.skew_fro;
    if (skew.size() != traj.size()) throw ValidationError("trajectory is missing the skew_fro channel");
    if (!(gamma > 0.0) || skew.empty() || skew[0] == 0.0) return unmet("skew_rate");
    double rate = 0.0;
    try {
        rate = fit_decay_rate(skew, traj.times);
    } catch (const ValidationError&) {
        return unmet("skew_rate");
    }
    CheckResult r;
    r.name = "skew_rate";
    r.tolerance_used = 0.02;
    r.observed = rate;
    r.worst_margin = r.tolerance_used - std::abs(rate - gamma) / gamma;
    r.location = traj.times.back();
    finish(r);
    return r;
}

CheckResult check_symmetry_preserved(const Trajectory& traj) {
    const auto& skew = traj.channels.skew_fro;
    if (skew.size() != traj.size()) throw ValidationError("trajectory is missing the skew_fro channel");
    if (skew.empty() || skew[0] != 0.0) return unmet("symmetry");
    CheckResult r;
    r.name = "symmetry";
    r.tolerance_used = 1e-10;
    r.worst_margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < skew.size(); ++i) {
        const double margin = r.tolerance_used - skew[i];
        r.observed = std::max(r.observed, skew[i]);
        if (margin < r.worst_margin) {
            r.worst_margin = margin;
            r.location = traj.times[i];
        }
    }
    finish(r);
    return r;
}

CheckResult check_sigma_assumption(const Trajectory& traj, double sigma_sq) {
    const auto& dev = traj.channels.phi_dev_sq;
    if (dev.size() != traj.size()) throw ValidationError("trajectory is missing the phi_dev_sq channel");
    CheckResult r;
    r.name = "sigma_assumption";
    r.tolerance_used = sigma_sq;
    r.worst_margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < dev.size(); ++i) {
        r.observed = std::max(r.observed, dev[i]);
        if (sigma_sq - dev[i] < r.worst_margin) {
            r.worst_margin = sigma_sq - dev[i];
            r.location = traj.times[i];
        }
    }
    if (!std::isfinite(r.worst_margin)) r.worst_margin = 0.0;
    r.passed = r.worst_margin >= 0.0;
    r.status = r.passed ? CheckStatus::Pass : CheckStatus::AssumptionViolated;
    return r;
}

CheckResult check_contraction_pair(const SimConfig& cfg_in, std::span<const double> x0_a,
                                   std::span<const double> x0_b, const ContractionOptions& opts) {
    SimConfig cfg = cfg_in;
    cfg.record_stride = 1;
    validate_config(cfg);
    if (x0_a.size() != cfg.n || x0_b.size() != cfg.n)
        throw ValidationError("contraction pair initial conditions must have length n");

    const Trajectory path = simulate(cfg);
    if (path.status == RunStatus::BlowUp) return unmet("contraction_pair");

    const double k = (1.0 - opts.margin) / kSlopeBound;
    std::size_t start = 0;
    if (opts.require_threshold) {
        start = path.size();
        for (std::size_t i = 0; i < path.size(); ++i)
            if (path.channels.mu_W[i] < k) {
                start = i;
                break;
            }
        if (start == path.size()) return unmet("contraction_pair");
    }

    const auto xa = replay_neural(cfg, x0_a, path.W_samples);
    const auto xb = replay_neural(cfg, x0_b, path.W_samples);
    Vector dist(xa.size());
    for (std::size_t i = 0; i < xa.size(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < cfg.n; ++j) s += (xa[i][j] - xb[i][j]) * (xa[i][j] - xb[i][j]);
        dist[i] = std::sqrt(s);
    }

    CheckResult r;
    r.name = "contraction_pair";
    r.tolerance_used = 1e-6;
    r.location = path.times[start];
    const double d0 = dist[start];
    const double d_end = dist.back();
    if (d0 == 0.0) {
        // Coincident trajectories stay coincident.
        r.worst_margin = d_end == 0.0 ? 0.0 : -d_end;
        r.observed = 0.0;
        finish(r);
        return r;
    }
    double rate = 0.0;
    bool have_rate = true;
    try {
        rate = fit_decay_rate(std::span<const double>(dist).subspan(start),
                              std::span<const double>(path.times).subspan(start));
    } catch (const ValidationError&) {
        have_rate = false;
    }
    r.observed = have_rate ? rate : 0.0;
    // Orders of magnitude of decay beyond the required 1e-6.
    const double ratio = d_end / d0;
    const double decades = ratio > 0.0 ? -std::log10(ratio) + std::log10(r.tolerance_used) : 300.0;
    r.worst_margin = decades;
    if (have_rate && rate <= 0.0) r.worst_margin = std::min(r.worst_margin, rate);
    finish(r);
    return r;
}

ReportStatus aggregate_status(const std::vector<CheckResult>& checks, bool blew_up) noexcept {
    if (blew_up) return ReportStatus::BlowUp;
    bool violated = false;
    for (const auto& c : checks) {
        if (c.status == CheckStatus::Fail) return ReportStatus::Fail;
        if (c.status == CheckStatus::AssumptionViolated) violated = true;
    }
    return violated ? ReportStatus::AssumptionViolated : ReportStatus::Pass;
}

VerificationReport verify_trajectory(const Trajectory& traj_in, const SimConfig& cfg,
                                     const VerifyOptions& opts) {
    auto enabled = [&](const std::string& name) {
        return opts.checks.empty() || opts.checks.contains(name);
    };
    const Trajectory* traj = &traj_in;
    Trajectory corrupted;
    if (opts.fault_mu_w_growth != 0.0) {
        corrupted = traj_in;
        for (std::size_t i = 0; i < corrupted.size(); ++i)
            corrupted.channels.mu_W[i] *= std::exp(opts.fault_mu_w_growth * corrupted.times[i]);
        traj = &corrupted;
    }

    VerificationReport report;
    report.config_digest = config_digest(cfg);
    const bool blew_up = traj->status == RunStatus::BlowUp;
    if (traj->size() < 2) {
        report.status = aggregate_status(report.checks, blew_up);
        return report;
    }

    const bool frozen = cfg.freeze_weights;
    const bool constant_gamma = cfg.gamma.is_constant();
    const double gamma = cfg.gamma.gamma0;
    const DriveBound bound = bound_D(cfg.rule, cfg.n);
    const bool bound_applies = bound.measure == cfg.measure_id ||
                               std::holds_alternative<rule::GradientFlow>(cfg.rule);

    bool sigma_violated = false;
    if (const auto* cov = std::get_if<rule::Covariance>(&cfg.rule); cov && enabled("sigma_assumption")) {
        report.checks.push_back(check_sigma_assumption(*traj, cov->sigma_sq));
        sigma_violated = !report.checks.back().passed;
    }
    auto skipped_for_assumption = [](std::string name) {
        CheckResult r;
        r.name = std::move(name);
        r.status = CheckStatus::AssumptionViolated;
        r.passed = false;
        return r;
    };

    if (enabled("theorem1") && !frozen) report.checks.push_back(check_theorem1(*traj, cfg.gamma, opts.slack));

    const bool corollary_ok = !frozen && constant_gamma && gamma > 0.0 && bound_applies;
    if (enabled("corollary")) {
        if (!corollary_ok) report.checks.push_back(unmet("corollary"));
        else if (sigma_violated) report.checks.push_back(skipped_for_assumption("corollary"));
        else report.checks.push_back(check_corollary_bound(*traj, gamma, bound.D, opts.slack));
    }
    if (enabled("crossing")) {
        if (!corollary_ok) report.checks.push_back(unmet("crossing"));
        else if (sigma_violated) report.checks.push_back(skipped_for_assumption("crossing"));
        else
            report.checks.push_back(
                check_threshold_crossing(*traj, gamma, bound.D, cfg.k_threshold, opts.slack));
    }

    const bool symmetric_drive = std::holds_alternative<rule::AntiHebbian>(cfg.rule) ||
                                 std::holds_alternative<rule::HadamardHebbian>(cfg.rule);
    if (symmetric_drive && !frozen) {
        if (enabled("skew_decay")) report.checks.push_back(check_skew_decay(*traj, cfg.gamma));
        if (enabled("skew_rate")) {
            report.checks.push_back(constant_gamma ? check_skew_rate(*traj, gamma) : unmet("skew_rate"));
        }
        if (enabled("symmetry")) report.checks.push_back(check_symmetry_preserved(*traj));
    }

    // Opt-in only: it re-simulates.
    if (!opts.checks.empty() && opts.checks.contains("contraction_pair") && !blew_up) {
        Vector xb = opts.contraction_x0_b.value_or(Vector{});
        if (xb.empty()) {
            xb = cfg.x0;
            for (double& v : xb) v = -v;
        }
        report.checks.push_back(check_contraction_pair(cfg, cfg.x0, xb));
    }

    report.status = aggregate_status(report.checks, blew_up);
    return report;
}

VerifiedRun verify_run(const SimConfig& cfg_in, const VerifyOptions& opts) {
    SimConfig cfg = cfg_in;
    validate_config(cfg);
    VerifiedRun out{simulate(cfg), {}};
    out.report = verify_trajectory(out.trajectory, cfg, opts);
    return out;
}

}  // namespace mmflow
