#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "mmflow/matrix.hpp"

namespace mmflow {

/// Which induced norm a matrix measure (logarithmic norm) is taken against.
enum class MeasureId { Mu1, Mu2, MuInf };

std::string_view to_string(MeasureId id) noexcept;
std::optional<MeasureId> parse_measure_id(std::string_view text) noexcept;

/// mu_2[W] = largest eigenvalue of (W + W^T)/2.
double mu_2(const SquareMatrix& W);

/// mu_1[W] = max over columns j of W_jj + sum_{i != j} |W_ij|.
double mu_1(const SquareMatrix& W);

/// mu_inf[W] = max over rows i of W_ii + sum_{j != i} |W_ij|.
double mu_inf(const SquareMatrix& W);

double measure(const SquareMatrix& W, MeasureId id);

/// Norm induced by the same vector norm as `measure(W, id)`; always
/// dominates it.
double operator_norm(const SquareMatrix& W, MeasureId id);

SquareMatrix symmetric_part(const SquareMatrix& W);
SquareMatrix skew_part(const SquareMatrix& W);
double frobenius_norm(const SquareMatrix& W);

struct JacobiOptions {
    double relative_tolerance = 1e-12;  // off-diagonal Frobenius / total Frobenius
    int max_sweeps = 100;
};

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
/// Only the upper triangle is read.
Vector symmetric_eigenvalues(const SquareMatrix& S, const JacobiOptions& opts = {});

}  // namespace mmflow
