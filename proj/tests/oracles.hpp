#pragma once

// Test-only reference computations. Nothing here calls into the library's
// gate kernels; states are plain amplitude vectors and operators are dense
// matrices built from their definitions.

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "qsdc/probe.hpp"
#include "qsdc/rng.hpp"
#include "qsdc/statevector.hpp"

namespace oracle {

using cd = std::complex<double>;
using Vec = std::vector<cd>;

struct Mat {
    std::size_t rows = 0, cols = 0;
    std::vector<cd> data;

    Mat(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c) {}
    cd& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    cd operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    static Mat identity(std::size_t n)
    {
        Mat m(n, n);
        for (std::size_t i = 0; i < n; ++i)
            m(i, i) = 1.0;
        return m;
    }
};

inline Mat kron(const Mat& a, const Mat& b)
{
    Mat m(a.rows * b.rows, a.cols * b.cols);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < a.cols; ++j)
            for (std::size_t k = 0; k < b.rows; ++k)
                for (std::size_t l = 0; l < b.cols; ++l)
                    m(i * b.rows + k, j * b.cols + l) = a(i, j) * b(k, l);
    return m;
}

inline Vec matvec(const Mat& m, const Vec& v)
{
    Vec out(m.rows);
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j)
            out[i] += m(i, j) * v[j];
    return out;
}

inline Vec kron(const Vec& a, const Vec& b)
{
    Vec out;
    for (auto x : a)
        for (auto y : b)
            out.push_back(x * y);
    return out;
}

inline double norm2(const Vec& v)
{
    double s = 0;
    for (auto z : v)
        s += std::norm(z);
    return s;
}

/// CNOT on n qubits as a permutation matrix; qubit 0 is the most
/// significant bit of the basis index.
inline Mat cnot_matrix(std::size_t n_qubits, std::size_t control, std::size_t target)
{
    const std::size_t dim = std::size_t{1} << n_qubits;
    Mat m(dim, dim);
    for (std::size_t x = 0; x < dim; ++x) {
        const std::size_t cbit = (x >> (n_qubits - 1 - control)) & 1u;
        const std::size_t y = cbit ? x ^ (std::size_t{1} << (n_qubits - 1 - target)) : x;
        m(y, x) = 1.0;
    }
    return m;
}

/// The probe as an explicit 8x2 matrix; row index = qubit * 4 + ancilla.
inline Mat probe_matrix(const qsdc::ProbeIsometry& iso)
{
    Mat m(8, 2);
    for (std::size_t j = 0; j < 4; ++j) {
        m(0 * 4 + j, 0) = iso.alpha * iso.eps00[j];
        m(1 * 4 + j, 0) = iso.beta * iso.eps01[j];
        m(0 * 4 + j, 1) = iso.beta_p * iso.eps10[j];
        m(1 * 4 + j, 1) = iso.alpha_p * iso.eps11[j];
    }
    return m;
}

/// Probability that a probed X decoy reads the wrong sign: project the
/// qubit of E|s> onto the opposite X eigenstate with (|-><-| (x) I4).
inline double probe_x_flip_probability(const qsdc::ProbeIsometry& iso, bool prepared_minus)
{
    const double h = 1.0 / std::sqrt(2.0);
    const Vec input = prepared_minus ? Vec{h, -h} : Vec{h, h};
    const Vec wrong = prepared_minus ? Vec{h, h} : Vec{h, -h};
    Mat proj(2, 2);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            proj(i, j) = wrong[i] * std::conj(wrong[j]);
    const Vec out = matvec(kron(proj, Mat::identity(4)), matvec(probe_matrix(iso), input));
    return norm2(out);
}

/// E^dagger E for the 8x2 probe matrix.
inline Mat gram(const Mat& e)
{
    Mat g(e.cols, e.cols);
    for (std::size_t i = 0; i < e.cols; ++i)
        for (std::size_t j = 0; j < e.cols; ++j)
            for (std::size_t k = 0; k < e.rows; ++k)
                g(i, j) += std::conj(e(k, i)) * e(k, j);
    return g;
}

/// Exact binomial pmf by multiplicative combination.
inline long double binom_pmf(unsigned n, unsigned k, long double p)
{
    long double c = 1;
    for (unsigned i = 1; i <= k; ++i)
        c = c * (n - k + i) / i;
    return c * std::pow(p, (long double)k) * std::pow(1 - p, (long double)(n - k));
}

inline double three_sigma(double p, double n) { return 3.0 * std::sqrt(p * (1.0 - p) / n); }

/// Random normalized state with the given dims, Gaussian amplitudes.
inline qsdc::StateVector random_state(std::vector<std::size_t> dims, qsdc::Rng& rng)
{
    std::size_t total = 1;
    for (auto d : dims)
        total *= d;
    auto gauss = [&] {
        double u1 = rng.uniform();
        while (u1 <= 0)
            u1 = rng.uniform();
        return std::sqrt(-2 * std::log(u1)) * std::cos(2 * M_PI * rng.uniform());
    };
    std::vector<cd> amps(total);
    double n = 0;
    for (auto& z : amps) {
        z = cd(gauss(), gauss());
        n += std::norm(z);
    }
    for (auto& z : amps)
        z /= std::sqrt(n);
    return qsdc::StateVector(std::move(dims), std::move(amps));
}

/// Random (a, b) with |a|^2 + |b|^2 = 1 and random phases.
inline std::pair<cd, cd> random_pair_amplitudes(qsdc::Rng& rng)
{
    const double t = rng.uniform() * M_PI / 2;
    return {std::polar(std::cos(t), 2 * M_PI * rng.uniform()), std::polar(std::sin(t), 2 * M_PI * rng.uniform())};
}

inline Vec to_vec(const qsdc::StateVector& s) { return Vec(s.amps().begin(), s.amps().end()); }

} // namespace oracle
