#pragma once

#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "mmflow/dynamics.hpp"

namespace mmflow {

enum class CheckStatus { Pass, Fail, HypothesisUnmet, AssumptionViolated };
enum class ReportStatus { Pass, Fail, AssumptionViolated, BlowUp };

std::string_view to_string(CheckStatus s) noexcept;
std::string_view to_string(ReportStatus s) noexcept;
std::optional<ReportStatus> parse_report_status(std::string_view text) noexcept;

struct CheckResult {
    std::string name;
    bool passed = true;
    double worst_margin = 0.0;    // signed slack; negative means violated beyond tolerance
    double location = 0.0;        // time of the worst margin
    double tolerance_used = 0.0;
    CheckStatus status = CheckStatus::Pass;
    double observed = 0.0;        // check-specific scalar: residual, crossing time, rate...

    friend bool operator==(const CheckResult&, const CheckResult&) = default;
};

struct VerificationReport {
    std::vector<CheckResult> checks;
    std::string config_digest;
    ReportStatus status = ReportStatus::Pass;

    const CheckResult* find(std::string_view name) const noexcept;
    friend bool operator==(const VerificationReport&, const VerificationReport&) = default;
};

/// Inequality slack rho = C * h * (1 + max_t(|mu_W| + |mu_G|)), h the largest
/// sample spacing of the trajectory.
struct SlackRule {
    double C = 10.0;
};

double sample_spacing(const Trajectory& traj);
double slack(const Trajectory& traj, const SlackRule& rule = {});

/// Forward difference (values[i+1] - values[i]) / (times[i+1] - times[i]).
double dini_forward(std::span<const double> values, std::span<const double> times,
                    std::size_t index);

/// max_i [dini(mu_W, i) + gamma(t_i) mu_W[i] - mu_G[i]], no slack applied.
double theorem1_residual(const Trajectory& traj, const GammaSpec& gamma);

CheckResult check_theorem1(const Trajectory& traj, const GammaSpec& gamma,
                           const SlackRule& rule = {});

/// mu_W(t) <= mu_W(0) e^{-gamma t} + D / gamma + rho. Requires gamma > 0.
CheckResult check_corollary_bound(const Trajectory& traj, double gamma, double D,
                                  const SlackRule& rule = {});

/// Crossing time bound t* = ln(mu_W(0) / (k - D/gamma)) / gamma.
double crossing_time_bound(double mu0, double gamma, double D, double k);

/// mu_W drops below k by t* + 10 h and stays below k + rho afterwards.
/// D / k >= gamma is reported as HypothesisUnmet.
CheckResult check_threshold_crossing(const Trajectory& traj, double gamma, double D, double k,
                                     const SlackRule& rule = {});

struct FitWindow {
    double t_begin = -INFINITY;
    double t_end = INFINITY;
};

/// Negated least-squares slope of log(values) against time over the window;
/// values below 1e-12 are dropped. Needs at least three usable samples.
double fit_decay_rate(std::span<const double> values, std::span<const double> times,
                      FitWindow window = {});

/// skew_fro(t) against skew_fro(0) exp(-int_0^t gamma) to relative 1e-6.
CheckResult check_skew_decay(const Trajectory& traj, const GammaSpec& gamma);
/// Fitted skew_fro decay rate against gamma within 2 percent (constant gamma).
CheckResult check_skew_rate(const Trajectory& traj, double gamma);
/// skew_fro < 1e-10 throughout (for symmetric W0).
CheckResult check_symmetry_preserved(const Trajectory& traj);
/// sup_t |phi - <phi>|^2 <= sigma_sq; AssumptionViolated otherwise.
CheckResult check_sigma_assumption(const Trajectory& traj, double sigma_sq);

struct ContractionOptions {
    double margin = 0.1;            // threshold k = (1 - margin) / g
    bool require_threshold = true;  // false: measure convergence over the whole run
};

/// Two neural runs from x0_a and x0_b sharing one replayed W path.
CheckResult check_contraction_pair(const SimConfig& cfg, std::span<const double> x0_a,
                                   std::span<const double> x0_b,
                                   const ContractionOptions& opts = {});

struct VerifyOptions {
    /// Empty: every applicable check. Otherwise only the named ones.
    std::set<std::string> checks;
    SlackRule slack{};
    /// Multiply the mu_W channel by exp(rate * t) before checking (negative fixture).
    double fault_mu_w_growth = 0.0;
    /// Second initial condition for contraction_pair; defaults to -x0.
    std::optional<Vector> contraction_x0_b;
};

inline const std::vector<std::string>& known_check_names() {
    static const std::vector<std::string> names{"theorem1",  "corollary",        "crossing",
                                                "skew_decay", "skew_rate",       "symmetry",
                                                "sigma_assumption", "contraction_pair"};
    return names;
}

/// Run every applicable check for cfg against an already simulated trajectory.
VerificationReport verify_trajectory(const Trajectory& traj, const SimConfig& cfg,
                                     const VerifyOptions& opts = {});

struct VerifiedRun {
    Trajectory trajectory;
    VerificationReport report;
};

VerifiedRun verify_run(const SimConfig& cfg, const VerifyOptions& opts = {});

/// Aggregate status: blow_up, else fail, else assumption_violated, else pass.
ReportStatus aggregate_status(const std::vector<CheckResult>& checks, bool blew_up) noexcept;

}  // namespace mmflow
