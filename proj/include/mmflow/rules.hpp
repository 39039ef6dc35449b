#pragma once

#include <cstdint>
#include <deque>
#include <string_view>
#include <variant>

#include "mmflow/matrix.hpp"
#include "mmflow/measures.hpp"

namespace mmflow {

/// Firing-rate nonlinearity, tanh componentwise. Slope bound g = 1, |phi| <= 1.
Vector firing_rate(std::span<const double> x);
inline constexpr double kSlopeBound = 1.0;

namespace rule {

/// dW/dt drive -phi phi^T.
struct AntiHebbian {
    friend bool operator==(const AntiHebbian&, const AntiHebbian&) = default;
};

/// dW/dt drive -K o phi phi^T with K symmetric PSD (o = Hadamard product).
struct HadamardHebbian {
    SquareMatrix K;
    friend bool operator==(const HadamardHebbian&, const HadamardHebbian&) = default;
};

/// dW/dt drive nu phi phi^T.
struct DongHopfield {
    double nu = 0.0;
    friend bool operator==(const DongHopfield&, const DongHopfield&) = default;
};

/// dW/dt drive nu (phi - <phi>)(phi - <phi>)^T, <phi> a windowed average.
struct Covariance {
    double nu = 0.0;
    double delta = 1.0;
    double sigma_sq = 0.0;          // assumed cap on |phi - <phi>|^2
    bool normalize_window = true;   // false: literal unnormalized integral
    friend bool operator==(const Covariance&, const Covariance&) = default;
};

/// dW_ij/dt drive b_i phi(x_j).
struct Presynaptic {
    Vector b;
    double phi_max = 1.0;
    friend bool operator==(const Presynaptic&, const Presynaptic&) = default;
};

/// dW/dt drive -grad L_task for L_task = 0.5 |W - target|_F^2, gradient
/// clipped so that its Frobenius, 1- and inf-norms are all <= lipschitz_L.
struct GradientFlow {
    SquareMatrix target;
    double lipschitz_L = 1.0;
    friend bool operator==(const GradientFlow&, const GradientFlow&) = default;
};

}  // namespace rule

using RuleSpec = std::variant<rule::AntiHebbian, rule::HadamardHebbian, rule::DongHopfield,
                              rule::Covariance, rule::Presynaptic, rule::GradientFlow>;

std::string_view rule_name(const RuleSpec& rule) noexcept;

/// Checks parameter ranges and, for HadamardHebbian, symmetry and positive
/// semi-definiteness of K (min eigenvalue >= -1e-10 |K|_F). Symmetrizes K in
/// place when it is symmetric up to rounding. Throws ValidationError.
void validate_rule(RuleSpec& rule, std::size_t n);

/// Sliding history of (time, firing-rate) samples for the covariance rule.
class RuleState {
public:
    struct Sample {
        double t;
        Vector phi;
    };

    /// `window` is the span that must stay covered; 0 keeps only the latest sample.
    explicit RuleState(double window = 0.0) : window_(window) {}

    /// Times must be strictly increasing.
    void push(double t, Vector phi);

    bool empty() const noexcept { return samples_.empty(); }
    std::size_t size() const noexcept { return samples_.size(); }
    const std::deque<Sample>& samples() const noexcept { return samples_; }
    double span() const noexcept {
        return samples_.empty() ? 0.0 : samples_.back().t - samples_.front().t;
    }

private:
    double window_;
    std::deque<Sample> samples_;
};

/// Trapezoidal integral of the piecewise-linear history over
/// [max(t - delta, t_first), min(t, t_last)], divided by the covered length
/// when `normalize` is set. A zero-length window yields the sample value
/// (normalized) or zero (unnormalized).
Vector running_average(const RuleState& state, double t, double delta, bool normalize = true);

/// The plasticity drive G(W, x, t); the leak -gamma W is not included.
SquareMatrix evaluate_G(const RuleSpec& rule, const SquareMatrix& W, std::span<const double> x,
                        double t, const RuleState& state);

/// |phi(x) - <phi>|^2 for the covariance rule, 0 for every other rule.
double phi_deviation_sq(const RuleSpec& rule, std::span<const double> x, double t,
                        const RuleState& state);

struct DriveBound {
    double D;
    MeasureId measure;
};

/// Analytic bound mu[G] <= D together with the measure it holds under.
DriveBound bound_D(const RuleSpec& rule, std::size_t n);

/// K = scale * A A^T / n with A standard normal from `seed`.
SquareMatrix make_psd(std::uint64_t seed, std::size_t n, double scale);

}  // namespace mmflow
