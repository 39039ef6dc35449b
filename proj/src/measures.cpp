#include "mmflow/measures.hpp"

#include <algorithm>
#include <cmath>

namespace mmflow {

std::string_view to_string(MeasureId id) noexcept {
    switch (id) {
    case MeasureId::Mu1: return "mu1";
    case MeasureId::Mu2: return "mu2";
    case MeasureId::MuInf: return "muinf";
    }
    return "?";
}

std::optional<MeasureId> parse_measure_id(std::string_view text) noexcept {
    if (text == "mu1") return MeasureId::Mu1;
    if (text == "mu2") return MeasureId::Mu2;
    if (text == "muinf") return MeasureId::MuInf;
    return std::nullopt;
}

Vector symmetric_eigenvalues(const SquareMatrix& S, const JacobiOptions& opts) {
    require_finite(S, "symmetric eigenproblem input");
    const std::size_t n = S.size();
    SquareMatrix a(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) a(i, j) = a(j, i) = S(i, j);

    const double total = frobenius_norm(a);
    auto off_norm = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * a(i, j) * a(i, j);
        return std::sqrt(s);
    };

    for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
        if (off_norm() <= opts.relative_tolerance * total) break;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                // Rutishauser's stable rotation.
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = std::copysign(1.0, theta) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const double tau = s / (1.0 + c);

                a(p, p) -= t * apq;
                a(q, q) += t * apq;
                a(p, q) = a(q, p) = 0.0;
                for (std::size_t r = 0; r < n; ++r) {
                    if (r == p || r == q) continue;
                    const double arp = a(r, p);
                    const double arq = a(r, q);
                    a(r, p) = a(p, r) = arp - s * (arq + tau * arp);
                    a(r, q) = a(q, r) = arq + s * (arp - tau * arq);
                }
            }
        }
    }

    Vector eig(n);
    for (std::size_t i = 0; i < n; ++i) eig[i] = a(i, i);
    std::sort(eig.begin(), eig.end());
    return eig;
}

double mu_2(const SquareMatrix& W) {
    require_finite(W, "mu_2 input");
    return symmetric_eigenvalues(symmetric_part(W)).back();
}

double mu_1(const SquareMatrix& W) {
    require_finite(W, "mu_1 input");
    const std::size_t n = W.size();
    double best = -INFINITY;
    for (std::size_t j = 0; j < n; ++j) {
        double col = W(j, j);
        for (std::size_t i = 0; i < n; ++i)
            if (i != j) col += std::abs(W(i, j));
        best = std::max(best, col);
    }
    return best;
}

double mu_inf(const SquareMatrix& W) {
    require_finite(W, "mu_inf input");
    const std::size_t n = W.size();
    double best = -INFINITY;
    for (std::size_t i = 0; i < n; ++i) {
        double row = W(i, i);
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) row += std::abs(W(i, j));
        best = std::max(best, row);
    }
    return best;
}

double measure(const SquareMatrix& W, MeasureId id) {
    switch (id) {
    case MeasureId::Mu1: return mu_1(W);
    case MeasureId::Mu2: return mu_2(W);
    case MeasureId::MuInf: return mu_inf(W);
    }
    throw ValidationError("unknown measure id");
}

double operator_norm(const SquareMatrix& W, MeasureId id) {
    require_finite(W, "operator_norm input");
    const std::size_t n = W.size();
    switch (id) {
    case MeasureId::Mu1: {
        double best = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            double col = 0.0;
            for (std::size_t i = 0; i < n; ++i) col += std::abs(W(i, j));
            best = std::max(best, col);
        }
        return best;
    }
    case MeasureId::MuInf: {
        double best = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < n; ++j) row += std::abs(W(i, j));
            best = std::max(best, row);
        }
        return best;
    }
    case MeasureId::Mu2: {
        // Largest singular value: sqrt of the top eigenvalue of W^T W.
        const double top = symmetric_eigenvalues(W.transposed() * W).back();
        return std::sqrt(std::max(top, 0.0));
    }
    }
    throw ValidationError("unknown measure id");
}

SquareMatrix symmetric_part(const SquareMatrix& W) {
    require_finite(W, "symmetric_part input");
    const std::size_t n = W.size();
    SquareMatrix s(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) s(i, j) = 0.5 * (W(i, j) + W(j, i));
    return s;
}

SquareMatrix skew_part(const SquareMatrix& W) {
    require_finite(W, "skew_part input");
    const std::size_t n = W.size();
    SquareMatrix s(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) s(i, j) = 0.5 * (W(i, j) - W(j, i));
    return s;
}

double frobenius_norm(const SquareMatrix& W) {
    require_finite(W, "frobenius_norm input");
    double s = 0.0;
    for (double v : W.values()) s += v * v;
    return std::sqrt(s);
}

}  // namespace mmflow
