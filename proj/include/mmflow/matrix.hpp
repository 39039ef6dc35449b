#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mmflow {

using Vector = std::vector<double>;

/// Raised for any contract violation on inputs: dimension mismatches,
/// non-finite entries, out-of-range parameters.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Dense real n x n matrix, row-major.
///
/// Construction only enforces squareness and n >= 1. Finiteness is checked
/// by the operations that consume a matrix (see require_finite), so that a
/// corrupted matrix can still be built, stored and reported on.
class SquareMatrix {
public:
    explicit SquareMatrix(std::size_t n);
    SquareMatrix(std::size_t n, std::vector<double> row_major);

    static SquareMatrix zeros(std::size_t n) { return SquareMatrix(n); }
    static SquareMatrix identity(std::size_t n);
    static SquareMatrix diagonal(std::span<const double> diag);
    static SquareMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

    std::size_t size() const noexcept { return n_; }

    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * n_ + j]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * n_ + j]; }

    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }

    SquareMatrix transposed() const;
    bool all_finite() const noexcept;
    double max_abs() const noexcept;

    SquareMatrix& operator+=(const SquareMatrix& rhs);
    SquareMatrix& operator-=(const SquareMatrix& rhs);
    SquareMatrix& operator*=(double c) noexcept;

    /// this += c * rhs
    SquareMatrix& add_scaled(double c, const SquareMatrix& rhs);

    friend bool operator==(const SquareMatrix&, const SquareMatrix&) = default;

private:
    std::size_t n_;
    std::vector<double> data_;
};

SquareMatrix operator+(SquareMatrix lhs, const SquareMatrix& rhs);
SquareMatrix operator-(SquareMatrix lhs, const SquareMatrix& rhs);
SquareMatrix operator-(SquareMatrix m);
SquareMatrix operator*(double c, SquareMatrix m);
SquareMatrix operator*(const SquareMatrix& a, const SquareMatrix& b);
Vector operator*(const SquareMatrix& m, std::span<const double> v);

SquareMatrix hadamard(const SquareMatrix& a, const SquareMatrix& b);
SquareMatrix outer(std::span<const double> a, std::span<const double> b);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> v);
bool all_finite(std::span<const double> v) noexcept;

/// Throws ValidationError naming `what` if any entry is NaN or infinite.
void require_finite(const SquareMatrix& m, const std::string& what = "matrix");
void require_finite(std::span<const double> v, const std::string& what = "vector");
void require_same_size(const SquareMatrix& a, const SquareMatrix& b);

}  // namespace mmflow
