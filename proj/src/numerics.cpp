#include "beamalign/numerics.hpp"

#include <numbers>
#include <numeric>

namespace beamalign {

NotPositiveDefinite::NotPositiveDefinite(std::size_t pivot, double value)
    : std::runtime_error("matrix is not positive definite (pivot " + std::to_string(pivot) +
                         " = " + std::to_string(value) + ")"),
      pivot_(pivot),
      value_(value) {}

template <typename T>
CholeskyFactor<T>::CholeskyFactor(const Matrix<T>& a) : lower_(a.rows(), a.cols()) {
    if (a.rows() != a.cols()) throw std::invalid_argument("cholesky: matrix not square");
#ifndef NDEBUG
    if (hermitian_defect(a) >= 1e-12) throw std::invalid_argument("cholesky: matrix not Hermitian");
#endif
    const std::size_t n = a.rows();
    for (std::size_t j = 0; j < n; ++j) {
        const auto lj = lower_.row(j);
        double diag = real_of(a(j, j));
        for (std::size_t k = 0; k < j; ++k) diag -= abs2(lj[k]);
        if (!(diag > 0.0)) throw NotPositiveDefinite(j, diag);
        const double ljj = std::sqrt(diag);
        lj[j] = T{ljj};
        for (std::size_t i = j + 1; i < n; ++i) {
            const auto li = lower_.row(i);
            T acc = a(i, j);
            for (std::size_t k = 0; k < j; ++k) acc -= li[k] * conj_of(lj[k]);
            li[j] = acc / ljj;
        }
    }
}

template <typename T>
std::vector<T> CholeskyFactor<T>::solve_lower(std::span<const T> b) const {
    const std::size_t n = size();
    if (b.size() != n) throw std::invalid_argument("cholesky solve: dimension mismatch");
    std::vector<T> z(b.begin(), b.end());
    for (std::size_t i = 0; i < n; ++i) {
        const auto li = lower_.row(i);
        T acc = z[i];
        for (std::size_t k = 0; k < i; ++k) acc -= li[k] * z[k];
        z[i] = acc / real_of(li[i]);
    }
    return z;
}

template <typename T>
std::vector<T> CholeskyFactor<T>::solve(std::span<const T> b) const {
    std::vector<T> x = solve_lower(b);
    const std::size_t n = size();
    // Back substitution with L^H.
    for (std::size_t ii = n; ii-- > 0;) {
        T acc = x[ii];
        for (std::size_t k = ii + 1; k < n; ++k) acc -= conj_of(lower_(k, ii)) * x[k];
        x[ii] = acc / real_of(lower_(ii, ii));
    }
    return x;
}

template class CholeskyFactor<double>;
template class CholeskyFactor<Complex>;

double std_normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double std_normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t Rng::derive(std::uint64_t master, std::initializer_list<std::uint64_t> labels) {
    std::uint64_t h = splitmix64(master);
    for (const auto label : labels) h = splitmix64(h ^ splitmix64(label + 0x632BE59BD9B4E019ULL));
    return h;
}

double Rng::uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
}

double Rng::normal(double mean, double stddev) {
    return mean + stddev * normal_(engine_);
}

std::size_t Rng::index(std::size_t n) {
    if (n == 0) throw std::invalid_argument("Rng::index: empty range");
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
}

std::vector<std::size_t> Rng::sample_without_replacement(std::size_t n, std::size_t k) {
    if (k > n) throw std::invalid_argument("sample_without_replacement: k > n");
    // Partial Fisher-Yates.
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) std::swap(pool[i], pool[i + index(n - i)]);
    pool.resize(k);
    return pool;
}

ComplexVector sample_complex_gaussian(Rng& rng, std::size_t n, double variance) {
    if (variance < 0.0) throw std::invalid_argument("sample_complex_gaussian: negative variance");
    ComplexVector out(n);
    const double sd = std::sqrt(variance / 2.0);
    for (auto& v : out) {
        const double re = rng.normal();
        const double im = rng.normal();
        v = Complex(sd * re, sd * im);
    }
    return out;
}

}  // namespace beamalign
