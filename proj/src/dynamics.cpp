#include "mmflow/dynamics.hpp"

#include <cmath>
#include <numbers>

namespace mmflow {

double GammaSpec::at(double t) const noexcept {
    return gamma0 * (1.0 + amplitude * std::sin(omega * t));
}

double GammaSpec::integral(double t) const noexcept {
    if (is_constant()) return gamma0 * t;
    return gamma0 * (t + amplitude * (1.0 - std::cos(omega * t)) / omega);
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

void require_length(const Vector& v, std::size_t n, const char* what) {
    if (v.size() != n) {
        throw ValidationError(std::string(what) + " has length " + std::to_string(v.size()) +
                              ", expected n = " + std::to_string(n));
    }
    require_finite(v, what);
}

bool uses_history(const RuleSpec& rule) { return std::holds_alternative<rule::Covariance>(rule); }

bool state_exceeds(std::span<const double> x, const SquareMatrix& W) {
    if (!all_finite(x) || !W.all_finite()) return true;
    return norm2(x) > kBlowUpThreshold || frobenius_norm(W) > kBlowUpThreshold;
}

}  // namespace

Vector eval_input(const InputSpec& spec, double t, std::size_t n) {
    return std::visit(
        overloaded{
            [n](const input::Zero&) { return Vector(n, 0.0); },
            [](const input::Constant& c) { return c.c; },
            [t](const input::Sinusoid& s) {
                const double arg = 2.0 * std::numbers::pi * s.frequency * t + s.phase;
                const double w = std::sin(arg);
                Vector u(s.amplitude.size());
                for (std::size_t i = 0; i < u.size(); ++i) u[i] = s.amplitude[i] * w;
                return u;
            },
            [t](const input::Pulse& p) {
                if (t >= p.t_on && t < p.t_off) return p.c;
                return Vector(p.c.size(), 0.0);
            },
        },
        spec);
}

double max_stable_dt(const SimConfig& cfg) noexcept {
    return std::min(cfg.epsilon / 10.0, 0.01 / std::max(cfg.gamma.max(), 1.0));
}

void validate_config(SimConfig& cfg) {
    if (cfg.n == 0) throw ValidationError("n must be positive");
    if (!std::isfinite(cfg.epsilon) || cfg.epsilon <= 0.0)
        throw ValidationError("epsilon must be > 0");
    if (!std::isfinite(cfg.gamma.gamma0) || cfg.gamma.gamma0 < 0.0)
        throw ValidationError("gamma must be >= 0");
    if (!(cfg.gamma.amplitude >= 0.0 && cfg.gamma.amplitude < 1.0))
        throw ValidationError("gamma_amplitude must lie in [0, 1)");
    if (!std::isfinite(cfg.gamma.omega)) throw ValidationError("gamma_omega must be finite");
    if (!std::isfinite(cfg.dt) || cfg.dt <= 0.0) throw ValidationError("dt must be > 0");
    if (!std::isfinite(cfg.t_end) || cfg.t_end < cfg.dt)
        throw ValidationError("t_end must be >= dt");
    const double limit = max_stable_dt(cfg);
    if (cfg.dt > limit * (1.0 + 1e-12)) {
        throw ValidationError("dt = " + std::to_string(cfg.dt) +
                              " violates the stiffness guard dt <= min(epsilon/10, 0.01/max(gamma,1)) = " +
                              std::to_string(limit));
    }
    if (!std::isfinite(cfg.k_threshold) || cfg.k_threshold <= 0.0)
        throw ValidationError("k must be > 0");
    if (cfg.record_stride == 0) throw ValidationError("record_stride must be positive");
    require_length(cfg.x0, cfg.n, "x0");
    if (cfg.W0.size() != cfg.n) throw ValidationError("W0 dimension does not match n");
    require_finite(cfg.W0, "W0");
    std::visit(overloaded{
                   [](const input::Zero&) {},
                   [&](const input::Constant& c) { require_length(c.c, cfg.n, "input constant"); },
                   [&](const input::Sinusoid& s) {
                       require_length(s.amplitude, cfg.n, "input amplitude");
                       if (!std::isfinite(s.frequency) || !std::isfinite(s.phase))
                           throw ValidationError("input frequency/phase must be finite");
                   },
                   [&](const input::Pulse& p) {
                       require_length(p.c, cfg.n, "input pulse");
                       if (!std::isfinite(p.t_on) || !std::isfinite(p.t_off))
                           throw ValidationError("pulse times must be finite");
                   },
               },
               cfg.input);
    validate_rule(cfg.rule, cfg.n);
}

Vector neural_derivative(std::span<const double> x, const SquareMatrix& W, double t,
                         const SimConfig& cfg) {
    const Vector phi = firing_rate(x);
    Vector dx = W * std::span<const double>(phi);
    const Vector u = eval_input(cfg.input, t, x.size());
    const double inv_eps = 1.0 / cfg.epsilon;
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] = (dx[i] - x[i] + u[i]) * inv_eps;
    return dx;
}

SquareMatrix weight_derivative(const SquareMatrix& W, std::span<const double> x, double t,
                               const SimConfig& cfg, const RuleState& state) {
    if (cfg.freeze_weights) return SquareMatrix(W.size());
    SquareMatrix dW = evaluate_G(cfg.rule, W, x, t, state);
    dW.add_scaled(-cfg.gamma.at(t), W);
    return dW;
}

RuleState initial_rule_state(const SimConfig& cfg) {
    if (const auto* cov = std::get_if<rule::Covariance>(&cfg.rule)) {
        RuleState state(cov->delta);
        state.push(0.0, firing_rate(cfg.x0));
        return state;
    }
    return RuleState{};
}

StepResult step_rk4(std::span<const double> x, const SquareMatrix& W, double t,
                    const SimConfig& cfg, RuleState& state) {
    const double h = cfg.dt;
    const std::size_t n = x.size();

    auto shifted = [n](std::span<const double> base, const Vector& d, double c) {
        Vector out(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = base[i] + c * d[i];
        return out;
    };

    const Vector k1x = neural_derivative(x, W, t, cfg);
    const SquareMatrix k1w = weight_derivative(W, x, t, cfg, state);

    const Vector x2 = shifted(x, k1x, 0.5 * h);
    const SquareMatrix W2 = SquareMatrix(W).add_scaled(0.5 * h, k1w);
    const Vector k2x = neural_derivative(x2, W2, t + 0.5 * h, cfg);
    const SquareMatrix k2w = weight_derivative(W2, x2, t + 0.5 * h, cfg, state);

    const Vector x3 = shifted(x, k2x, 0.5 * h);
    const SquareMatrix W3 = SquareMatrix(W).add_scaled(0.5 * h, k2w);
    const Vector k3x = neural_derivative(x3, W3, t + 0.5 * h, cfg);
    const SquareMatrix k3w = weight_derivative(W3, x3, t + 0.5 * h, cfg, state);

    const Vector x4 = shifted(x, k3x, h);
    const SquareMatrix W4 = SquareMatrix(W).add_scaled(h, k3w);
    const Vector k4x = neural_derivative(x4, W4, t + h, cfg);
    const SquareMatrix k4w = weight_derivative(W4, x4, t + h, cfg, state);

    StepResult out{Vector(n), W, true};
    for (std::size_t i = 0; i < n; ++i)
        out.x[i] = x[i] + h / 6.0 * (k1x[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i]);
    auto wv = out.W.values();
    const auto a = k1w.values(), b = k2w.values(), c = k3w.values(), d = k4w.values();
    for (std::size_t k = 0; k < wv.size(); ++k)
        wv[k] += h / 6.0 * (a[k] + 2.0 * b[k] + 2.0 * c[k] + d[k]);

    out.finite = all_finite(out.x) && out.W.all_finite();
    if (out.finite && uses_history(cfg.rule)) state.push(t + h, firing_rate(out.x));
    return out;
}

std::size_t step_count(const SimConfig& cfg) noexcept {
    return static_cast<std::size_t>(std::llround(cfg.t_end / cfg.dt));
}

Trajectory simulate(const SimConfig& cfg_in) {
    SimConfig cfg = cfg_in;
    validate_config(cfg);

    Trajectory traj;
    RuleState state = initial_rule_state(cfg);
    Vector x = cfg.x0;
    SquareMatrix W = cfg.W0;

    auto record = [&](double t) {
        const SquareMatrix G = evaluate_G(cfg.rule, W, x, t, state);
        traj.times.push_back(t);
        traj.x_samples.push_back(x);
        traj.W_samples.push_back(W);
        traj.channels.mu_W.push_back(measure(W, cfg.measure_id));
        traj.channels.mu_G.push_back(measure(G, cfg.measure_id));
        traj.channels.skew_fro.push_back(frobenius_norm(skew_part(W)));
        traj.channels.x_norm.push_back(norm2(x));
        traj.channels.phi_dev_sq.push_back(phi_deviation_sq(cfg.rule, x, t, state));
    };

    const std::size_t steps = step_count(cfg);
    record(0.0);
    for (std::size_t i = 0; i < steps; ++i) {
        const double t = static_cast<double>(i) * cfg.dt;
        StepResult next = step_rk4(x, W, t, cfg, state);
        const double t_next = static_cast<double>(i + 1) * cfg.dt;
        if (!next.finite || state_exceeds(next.x, next.W)) {
            traj.status = RunStatus::BlowUp;
            traj.blow_up_time = t_next;
            return traj;
        }
        x = std::move(next.x);
        W = std::move(next.W);
        if ((i + 1) % cfg.record_stride == 0 || i + 1 == steps) record(t_next);
    }
    return traj;
}

std::vector<Vector> replay_neural(const SimConfig& cfg, std::span<const double> x0,
                                  std::span<const SquareMatrix> weight_path) {
    if (weight_path.empty()) throw ValidationError("empty weight path");
    if (x0.size() != weight_path.front().size())
        throw ValidationError("x0 length does not match the weight path dimension");
    const std::size_t n = x0.size();
    const double h = cfg.dt;

    std::vector<Vector> xs;
    xs.reserve(weight_path.size());
    xs.emplace_back(x0.begin(), x0.end());
    for (std::size_t i = 0; i + 1 < weight_path.size(); ++i) {
        const double t = static_cast<double>(i) * h;
        const SquareMatrix& W0 = weight_path[i];
        const SquareMatrix& W1 = weight_path[i + 1];
        const SquareMatrix Wm = 0.5 * (W0 + W1);
        const Vector& x = xs.back();

        auto shifted = [n](const Vector& base, const Vector& d, double c) {
            Vector out(n);
            for (std::size_t k = 0; k < n; ++k) out[k] = base[k] + c * d[k];
            return out;
        };
        const Vector k1 = neural_derivative(x, W0, t, cfg);
        const Vector k2 = neural_derivative(shifted(x, k1, 0.5 * h), Wm, t + 0.5 * h, cfg);
        const Vector k3 = neural_derivative(shifted(x, k2, 0.5 * h), Wm, t + 0.5 * h, cfg);
        const Vector k4 = neural_derivative(shifted(x, k3, h), W1, t + h, cfg);
        Vector next(n);
        for (std::size_t k = 0; k < n; ++k)
            next[k] = x[k] + h / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
        xs.push_back(std::move(next));
    }
    return xs;
}

}  // namespace mmflow
