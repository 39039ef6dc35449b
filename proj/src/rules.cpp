#include "mmflow/rules.hpp"

#include <algorithm>
#include <cmath>

#include "mmflow/random.hpp"

namespace mmflow {

Vector firing_rate(std::span<const double> x) {
    Vector phi(x.size());
    std::transform(x.begin(), x.end(), phi.begin(), [](double v) { return std::tanh(v); });
    return phi;
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

void require_nonnegative(double v, const char* what) {
    if (!std::isfinite(v) || v < 0.0) {
        throw ValidationError(std::string(what) + " must be finite and >= 0, got " +
                              std::to_string(v));
    }
}

void require_positive(double v, const char* what) {
    if (!std::isfinite(v) || v <= 0.0) {
        throw ValidationError(std::string(what) + " must be finite and > 0, got " +
                              std::to_string(v));
    }
}

void require_dimension(const SquareMatrix& m, std::size_t n, const char* what) {
    if (m.size() != n) {
        throw ValidationError(std::string(what) + " is " + std::to_string(m.size()) + "x" +
                              std::to_string(m.size()) + ", expected n = " + std::to_string(n));
    }
}

}  // namespace

std::string_view rule_name(const RuleSpec& rule) noexcept {
    return std::visit(overloaded{
                          [](const rule::AntiHebbian&) { return std::string_view("anti_hebbian"); },
                          [](const rule::HadamardHebbian&) { return std::string_view("hadamard_hebbian"); },
                          [](const rule::DongHopfield&) { return std::string_view("dong_hopfield"); },
                          [](const rule::Covariance&) { return std::string_view("covariance"); },
                          [](const rule::Presynaptic&) { return std::string_view("presynaptic"); },
                          [](const rule::GradientFlow&) { return std::string_view("gradient_flow"); },
                      },
                      rule);
}

void validate_rule(RuleSpec& spec, std::size_t n) {
    std::visit(overloaded{
                   [](rule::AntiHebbian&) {},
                   [n](rule::HadamardHebbian& r) {
                       require_dimension(r.K, n, "K");
                       require_finite(r.K, "K");
                       const double fro = frobenius_norm(r.K);
                       for (std::size_t i = 0; i < n; ++i)
                           for (std::size_t j = i + 1; j < n; ++j)
                               if (std::abs(r.K(i, j) - r.K(j, i)) > 1e-12 * std::max(1.0, fro))
                                   throw ValidationError("K must be symmetric");
                       r.K = symmetric_part(r.K);
                       const double lo = symmetric_eigenvalues(r.K).front();
                       if (lo < -1e-10 * fro) {
                           throw ValidationError("K must be positive semi-definite (min eigenvalue " +
                                                 std::to_string(lo) + ")");
                       }
                   },
                   [](rule::DongHopfield& r) { require_nonnegative(r.nu, "nu"); },
                   [](rule::Covariance& r) {
                       require_nonnegative(r.nu, "nu");
                       require_positive(r.delta, "delta");
                       require_nonnegative(r.sigma_sq, "sigma_sq");
                   },
                   [n](rule::Presynaptic& r) {
                       if (r.b.size() != n) {
                           throw ValidationError("b has length " + std::to_string(r.b.size()) +
                                                 ", expected n = " + std::to_string(n));
                       }
                       require_finite(r.b, "b");
                       require_positive(r.phi_max, "phi_max");
                   },
                   [n](rule::GradientFlow& r) {
                       require_dimension(r.target, n, "target");
                       require_finite(r.target, "target");
                       require_positive(r.lipschitz_L, "lipschitz_L");
                   },
               },
               spec);
}

void RuleState::push(double t, Vector phi) {
    if (!samples_.empty() && !(t > samples_.back().t)) {
        throw ValidationError("rule history times must be strictly increasing");
    }
    samples_.push_back({t, std::move(phi)});
    // Keep exactly one sample at or before t - window so the window stays covered.
    while (samples_.size() >= 2 && samples_[1].t <= t - window_) samples_.pop_front();
}

Vector running_average(const RuleState& state, double t, double delta, bool normalize) {
    if (state.empty()) throw ValidationError("running average of an empty history");
    const auto& s = state.samples();
    const std::size_t n = s.front().phi.size();

    auto value_at = [&](double tau) {
        if (tau <= s.front().t) return s.front().phi;
        if (tau >= s.back().t) return s.back().phi;
        auto it = std::upper_bound(s.begin(), s.end(), tau,
                                   [](double v, const RuleState::Sample& smp) { return v < smp.t; });
        const auto& hi = *it;
        const auto& lo = *(it - 1);
        const double w = (tau - lo.t) / (hi.t - lo.t);
        Vector out(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = (1.0 - w) * lo.phi[i] + w * hi.phi[i];
        return out;
    };

    const double end = std::min(t, s.back().t);
    const double start = std::max(end - delta, s.front().t);
    if (!(end > start)) {
        if (normalize) return value_at(end);
        return Vector(n, 0.0);
    }

    // Breakpoints: window ends plus every interior sample time.
    Vector integral(n, 0.0);
    double prev_t = start;
    Vector prev_v = value_at(start);
    for (const auto& smp : s) {
        if (smp.t <= start) continue;
        const double cur_t = std::min(smp.t, end);
        const Vector cur_v = smp.t <= end ? smp.phi : value_at(end);
        const double h = cur_t - prev_t;
        for (std::size_t i = 0; i < n; ++i) integral[i] += 0.5 * h * (prev_v[i] + cur_v[i]);
        prev_t = cur_t;
        prev_v = cur_v;
        if (smp.t >= end) break;
    }
    if (normalize) {
        const double len = end - start;
        for (double& v : integral) v /= len;
    }
    return integral;
}

SquareMatrix evaluate_G(const RuleSpec& spec, const SquareMatrix& W, std::span<const double> x,
                        double t, const RuleState& state) {
    const std::size_t n = W.size();
    if (x.size() != n) {
        throw ValidationError("state x has length " + std::to_string(x.size()) +
                              ", W is " + std::to_string(n) + "x" + std::to_string(n));
    }
    return std::visit(
        overloaded{
            [&](const rule::AntiHebbian&) {
                const Vector phi = firing_rate(x);
                return -outer(phi, phi);
            },
            [&](const rule::HadamardHebbian& r) {
                const Vector phi = firing_rate(x);
                return -hadamard(r.K, outer(phi, phi));
            },
            [&](const rule::DongHopfield& r) {
                const Vector phi = firing_rate(x);
                return r.nu * outer(phi, phi);
            },
            [&](const rule::Covariance& r) {
                const Vector avg = running_average(state, t, r.delta, r.normalize_window);
                Vector dev = firing_rate(x);
                for (std::size_t i = 0; i < n; ++i) dev[i] -= avg[i];
                return r.nu * outer(dev, dev);
            },
            [&](const rule::Presynaptic& r) {
                const Vector phi = firing_rate(x);
                SquareMatrix G(n);
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < n; ++j) G(i, j) = r.b[i] * phi[j];
                return G;
            },
            [&](const rule::GradientFlow& r) {
                SquareMatrix grad = W - r.target;
                const double size = std::max({frobenius_norm(grad), operator_norm(grad, MeasureId::Mu1),
                                              operator_norm(grad, MeasureId::MuInf)});
                if (size > r.lipschitz_L) grad *= r.lipschitz_L / size;
                return -grad;
            },
        },
        spec);
}

double phi_deviation_sq(const RuleSpec& spec, std::span<const double> x, double t,
                        const RuleState& state) {
    const auto* cov = std::get_if<rule::Covariance>(&spec);
    if (cov == nullptr) return 0.0;
    const Vector avg = running_average(state, t, cov->delta, cov->normalize_window);
    Vector dev = firing_rate(x);
    for (std::size_t i = 0; i < dev.size(); ++i) dev[i] -= avg[i];
    return dot(dev, dev);
}

DriveBound bound_D(const RuleSpec& spec, std::size_t n) {
    const double dn = static_cast<double>(n);
    return std::visit(
        overloaded{
            [](const rule::AntiHebbian&) { return DriveBound{0.0, MeasureId::Mu2}; },
            [](const rule::HadamardHebbian&) { return DriveBound{0.0, MeasureId::Mu2}; },
            [dn](const rule::DongHopfield& r) { return DriveBound{r.nu * dn, MeasureId::Mu2}; },
            [](const rule::Covariance& r) { return DriveBound{r.nu * r.sigma_sq, MeasureId::Mu2}; },
            [dn](const rule::Presynaptic& r) {
                double b_max = 0.0;
                for (double b : r.b) b_max = std::max(b_max, std::abs(b));
                return DriveBound{dn * b_max * r.phi_max, MeasureId::Mu1};
            },
            [](const rule::GradientFlow& r) { return DriveBound{r.lipschitz_L, MeasureId::Mu2}; },
        },
        spec);
}

SquareMatrix make_psd(std::uint64_t seed, std::size_t n, double scale) {
    if (!(scale > 0.0)) throw ValidationError("make_psd scale must be > 0");
    const SquareMatrix A = seeded_normal_matrix(seed, n);
    SquareMatrix K(n);
    const double c = scale / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k) s += A(i, k) * A(j, k);
            K(i, j) = c * s;
        }
    return K;
}

}  // namespace mmflow
