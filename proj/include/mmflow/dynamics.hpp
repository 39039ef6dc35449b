#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <variant>

#include "mmflow/matrix.hpp"
#include "mmflow/measures.hpp"
#include "mmflow/rules.hpp"

namespace mmflow {

/// Leak rate gamma(t) = gamma0 * (1 + amplitude * sin(omega t)), amplitude in [0, 1).
struct GammaSpec {
    double gamma0 = 1.0;
    double amplitude = 0.0;
    double omega = 0.0;

    double at(double t) const noexcept;
    /// Closed-form integral of gamma over [0, t].
    double integral(double t) const noexcept;
    double max() const noexcept { return gamma0 * (1.0 + amplitude); }
    double min() const noexcept { return gamma0 * (1.0 - amplitude); }
    bool is_constant() const noexcept { return amplitude == 0.0 || omega == 0.0; }

    friend bool operator==(const GammaSpec&, const GammaSpec&) = default;
};

namespace input {
struct Zero {
    friend bool operator==(const Zero&, const Zero&) = default;
};
struct Constant {
    Vector c;
    friend bool operator==(const Constant&, const Constant&) = default;
};
/// amplitude * sin(2 pi frequency t + phase), componentwise.
struct Sinusoid {
    Vector amplitude;
    double frequency = 1.0;
    double phase = 0.0;
    friend bool operator==(const Sinusoid&, const Sinusoid&) = default;
};
/// c on [t_on, t_off), zero elsewhere.
struct Pulse {
    Vector c;
    double t_on = 0.0;
    double t_off = 0.0;
    friend bool operator==(const Pulse&, const Pulse&) = default;
};
}  // namespace input

using InputSpec = std::variant<input::Zero, input::Constant, input::Sinusoid, input::Pulse>;

Vector eval_input(const InputSpec& spec, double t, std::size_t n);

struct SimConfig {
    std::size_t n = 1;
    double epsilon = 0.1;
    GammaSpec gamma{};
    RuleSpec rule = rule::AntiHebbian{};
    MeasureId measure_id = MeasureId::Mu2;
    InputSpec input = input::Zero{};
    Vector x0{0.0};
    SquareMatrix W0{1};
    double dt = 0.01;
    double t_end = 1.0;
    std::uint64_t seed = 0;
    double k_threshold = 1.0;
    std::size_t record_stride = 1;
    /// Hold W fixed at W0 (dW/dt = 0); used for frozen-weight contraction runs.
    bool freeze_weights = false;
};

/// Largest admissible step: min(epsilon / 10, 0.01 / max(gamma_max, 1)).
double max_stable_dt(const SimConfig& cfg) noexcept;

/// Throws ValidationError on any violated invariant; validates the rule too.
void validate_config(SimConfig& cfg);

enum class RunStatus { Completed, BlowUp };

inline constexpr double kBlowUpThreshold = 1e12;

struct Channels {
    Vector mu_W;
    Vector mu_G;
    Vector skew_fro;
    Vector x_norm;
    Vector phi_dev_sq;
};

struct Trajectory {
    Vector times;
    std::vector<Vector> x_samples;
    std::vector<SquareMatrix> W_samples;
    Channels channels;
    RunStatus status = RunStatus::Completed;
    double blow_up_time = 0.0;

    std::size_t size() const noexcept { return times.size(); }
};

/// (-x + W tanh(x) + u(t)) / epsilon
Vector neural_derivative(std::span<const double> x, const SquareMatrix& W, double t,
                         const SimConfig& cfg);

/// -gamma(t) W + G(W, x, t), or zero when weights are frozen.
SquareMatrix weight_derivative(const SquareMatrix& W, std::span<const double> x, double t,
                               const SimConfig& cfg, const RuleState& state);

struct StepResult {
    Vector x;
    SquareMatrix W;
    bool finite = true;
};

/// One classical RK4 step of size cfg.dt on (x, W). Appends phi(x') at t + dt
/// to `state` when the rule keeps history and the step is finite.
StepResult step_rk4(std::span<const double> x, const SquareMatrix& W, double t,
                    const SimConfig& cfg, RuleState& state);

/// Fresh rule history seeded with phi(x0) at t = 0.
RuleState initial_rule_state(const SimConfig& cfg);

/// Integrate from (x0, W0) to t_end. On blow-up the trajectory holds every
/// finite sample recorded before it.
Trajectory simulate(const SimConfig& cfg);

/// Integrate only the neural equation from `x0`, with W(t) replayed from
/// `weight_path` (one matrix per step, t = i * dt; midpoints interpolated).
/// Returns the x state at every step.
std::vector<Vector> replay_neural(const SimConfig& cfg, std::span<const double> x0,
                                  std::span<const SquareMatrix> weight_path);

/// Number of integration steps for cfg (round(t_end / dt)).
std::size_t step_count(const SimConfig& cfg) noexcept;

}  // namespace mmflow
