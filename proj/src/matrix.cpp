#include "mmflow/matrix.hpp"

#include <algorithm>
#include <cmath>

namespace mmflow {

SquareMatrix::SquareMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {
    if (n == 0) throw ValidationError("matrix dimension must be positive");
}

SquareMatrix::SquareMatrix(std::size_t n, std::vector<double> row_major)
    : n_(n), data_(std::move(row_major)) {
    if (n == 0) throw ValidationError("matrix dimension must be positive");
    if (data_.size() != n * n) {
        throw ValidationError("matrix data has " + std::to_string(data_.size()) +
                              " entries, expected " + std::to_string(n * n));
    }
}

SquareMatrix SquareMatrix::identity(std::size_t n) {
    SquareMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

SquareMatrix SquareMatrix::diagonal(std::span<const double> diag) {
    SquareMatrix m(diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
    return m;
}

SquareMatrix SquareMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t n = rows.size();
    std::vector<double> data;
    data.reserve(n * n);
    for (const auto& row : rows) {
        if (row.size() != n) throw ValidationError("matrix rows must form a square");
        data.insert(data.end(), row.begin(), row.end());
    }
    return SquareMatrix(n, std::move(data));
}

SquareMatrix SquareMatrix::transposed() const {
    SquareMatrix t(n_);
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < n_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

bool SquareMatrix::all_finite() const noexcept { return mmflow::all_finite(data_); }

double SquareMatrix::max_abs() const noexcept {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

SquareMatrix& SquareMatrix::operator+=(const SquareMatrix& rhs) {
    require_same_size(*this, rhs);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += rhs.data_[k];
    return *this;
}

SquareMatrix& SquareMatrix::operator-=(const SquareMatrix& rhs) {
    require_same_size(*this, rhs);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= rhs.data_[k];
    return *this;
}

SquareMatrix& SquareMatrix::operator*=(double c) noexcept {
    for (double& v : data_) v *= c;
    return *this;
}

SquareMatrix& SquareMatrix::add_scaled(double c, const SquareMatrix& rhs) {
    require_same_size(*this, rhs);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += c * rhs.data_[k];
    return *this;
}

SquareMatrix operator+(SquareMatrix lhs, const SquareMatrix& rhs) { return lhs += rhs; }
SquareMatrix operator-(SquareMatrix lhs, const SquareMatrix& rhs) { return lhs -= rhs; }
SquareMatrix operator-(SquareMatrix m) { return m *= -1.0; }
SquareMatrix operator*(double c, SquareMatrix m) { return m *= c; }

SquareMatrix operator*(const SquareMatrix& a, const SquareMatrix& b) {
    require_same_size(a, b);
    const std::size_t n = a.size();
    SquareMatrix c(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) {
            const double aik = a(i, k);
            for (std::size_t j = 0; j < n; ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

Vector operator*(const SquareMatrix& m, std::span<const double> v) {
    const std::size_t n = m.size();
    if (v.size() != n) {
        throw ValidationError("matrix-vector size mismatch: " + std::to_string(n) + " vs " +
                              std::to_string(v.size()));
    }
    Vector out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += m(i, j) * v[j];
        out[i] = s;
    }
    return out;
}

SquareMatrix hadamard(const SquareMatrix& a, const SquareMatrix& b) {
    require_same_size(a, b);
    SquareMatrix c = a;
    auto cv = c.values();
    auto bv = b.values();
    for (std::size_t k = 0; k < cv.size(); ++k) cv[k] *= bv[k];
    return c;
}

SquareMatrix outer(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ValidationError("outer product of unequal lengths");
    SquareMatrix m(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) m(i, j) = a[i] * b[j];
    return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ValidationError("dot product of unequal lengths");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

bool all_finite(std::span<const double> v) noexcept {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

void require_finite(const SquareMatrix& m, const std::string& what) {
    if (!m.all_finite()) throw ValidationError(what + " has non-finite entries");
}

void require_finite(std::span<const double> v, const std::string& what) {
    if (!all_finite(v)) throw ValidationError(what + " has non-finite entries");
}

void require_same_size(const SquareMatrix& a, const SquareMatrix& b) {
    if (a.size() != b.size()) {
        throw ValidationError("matrix dimension mismatch: " + std::to_string(a.size()) + " vs " +
                              std::to_string(b.size()));
    }
}

}  // namespace mmflow
