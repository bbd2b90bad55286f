#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace beamalign {

using Complex = std::complex<double>;
using ComplexVector = std::vector<Complex>;
using RealVector = std::vector<double>;

/// Raised by the Cholesky factorization when a pivot is not strictly positive.
/// Callers typically respond by adding diagonal jitter and retrying.
class NotPositiveDefinite : public std::runtime_error {
public:
    NotPositiveDefinite(std::size_t pivot, double value);

    std::size_t pivot() const noexcept { return pivot_; }
    double value() const noexcept { return value_; }

private:
    std::size_t pivot_;
    double value_;
};

/// Dense row-major matrix with dimensions fixed at construction.
template <typename T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return data_.empty(); }

    T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::vector<T> column(std::size_t c) const {
        std::vector<T> out(rows_);
        for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
        return out;
    }

    std::span<const T> data() const noexcept { return data_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

using ComplexMatrix = Matrix<Complex>;
using RealMatrix = Matrix<double>;

// Scalar helpers so the factorization code reads the same for real and complex.
inline double conj_of(double x) { return x; }
inline Complex conj_of(const Complex& x) { return std::conj(x); }
inline double real_of(double x) { return x; }
inline double real_of(const Complex& x) { return x.real(); }
inline double abs2(double x) { return x * x; }
inline double abs2(const Complex& x) { return std::norm(x); }

/// y = A x
template <typename T>
std::vector<T> multiply(const Matrix<T>& a, std::span<const T> x) {
    if (x.size() != a.cols()) throw std::invalid_argument("multiply: dimension mismatch");
    std::vector<T> y(a.rows(), T{});
    for (std::size_t r = 0; r < a.rows(); ++r) {
        T acc{};
        const auto row = a.row(r);
        for (std::size_t c = 0; c < a.cols(); ++c) acc += row[c] * x[c];
        y[r] = acc;
    }
    return y;
}

template <typename T>
std::vector<T> multiply(const Matrix<T>& a, const std::vector<T>& x) {
    return multiply(a, std::span<const T>(x));
}

template <typename T>
Matrix<T> multiply(const Matrix<T>& a, const Matrix<T>& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("multiply: dimension mismatch");
    Matrix<T> out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const T aik = a(i, k);
            for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
        }
    return out;
}

template <typename T>
Matrix<T> adjoint(const Matrix<T>& a) {
    Matrix<T> out(a.cols(), a.rows());
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) out(c, r) = conj_of(a(r, c));
    return out;
}

/// Inner product x^H y.
template <typename T>
T dot(std::span<const T> x, std::span<const T> y) {
    if (x.size() != y.size()) throw std::invalid_argument("dot: dimension mismatch");
    T acc{};
    for (std::size_t i = 0; i < x.size(); ++i) acc += conj_of(x[i]) * y[i];
    return acc;
}

template <typename T>
double norm2(std::span<const T> x) {
    double acc = 0.0;
    for (const auto& v : x) acc += abs2(v);
    return std::sqrt(acc);
}

/// Largest |A(i,j) - conj(A(j,i))| over the matrix; 0 for exactly Hermitian input.
template <typename T>
double hermitian_defect(const Matrix<T>& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("hermitian_defect: matrix not square");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = i; j < a.cols(); ++j)
            worst = std::max(worst, std::sqrt(abs2(a(i, j) - conj_of(a(j, i)))));
    return worst;
}

/// Lower-triangular factor L with A = L L^H for a Hermitian positive-definite A.
template <typename T>
class CholeskyFactor {
public:
    explicit CholeskyFactor(const Matrix<T>& a);

    std::size_t size() const noexcept { return lower_.rows(); }
    const Matrix<T>& lower() const noexcept { return lower_; }

    /// Solves L z = b.
    std::vector<T> solve_lower(std::span<const T> b) const;
    /// Solves A x = b via the two triangular sweeps.
    std::vector<T> solve(std::span<const T> b) const;

private:
    Matrix<T> lower_;
};

/// Solves A x = b for Hermitian positive-definite A without forming A^-1.
/// Throws NotPositiveDefinite when a pivot is <= 0.
template <typename T>
std::vector<T> hermitian_solve(const Matrix<T>& a, std::span<const T> b) {
    return CholeskyFactor<T>(a).solve(b);
}

template <typename T>
std::vector<T> hermitian_solve(const Matrix<T>& a, const std::vector<T>& b) {
    return CholeskyFactor<T>(a).solve(std::span<const T>(b));
}

extern template class CholeskyFactor<double>;
extern template class CholeskyFactor<Complex>;

double std_normal_pdf(double x);
double std_normal_cdf(double x);

/// Seeded random stream. Every stream is fully determined by its seed; streams
/// for independent work items are derived from a master seed with derive().
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    Rng(const Rng&) = delete;
    Rng& operator=(const Rng&) = delete;
    Rng(Rng&&) = default;
    Rng& operator=(Rng&&) = default;

    /// Mixes a master seed with a path of integer labels (trial, method, ...).
    static std::uint64_t derive(std::uint64_t master, std::initializer_list<std::uint64_t> labels);

    double uniform(double lo, double hi);
    double normal(double mean = 0.0, double stddev = 1.0);
    /// Uniform integer in [0, n).
    std::size_t index(std::size_t n);

    /// k distinct indices from [0, n), in draw order.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

    std::mt19937_64& engine() noexcept { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// i.i.d. CN(0, variance) entries: real and imaginary parts each N(0, variance/2).
ComplexVector sample_complex_gaussian(Rng& rng, std::size_t n, double variance);

}  // namespace beamalign
