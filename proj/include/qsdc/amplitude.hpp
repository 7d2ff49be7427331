#pragma once

#include <array>
#include <cmath>
#include <complex>

namespace qsdc {

using Amplitude = std::complex<double>;

// Vector in Eve's 4-dimensional probe space.
using AncillaVector = std::array<Amplitude, 4>;

inline constexpr double kNormTolerance = 1e-9;

inline bool is_finite(Amplitude z) noexcept { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

/// <u|v>, conjugate-linear in the first argument.
inline Amplitude inner(const AncillaVector& u, const AncillaVector& v) noexcept
{
    Amplitude s{};
    for (std::size_t i = 0; i < u.size(); ++i)
        s += std::conj(u[i]) * v[i];
    return s;
}

inline double norm_squared(const AncillaVector& v) noexcept
{
    double s = 0.0;
    for (const auto& z : v)
        s += std::norm(z);
    return s;
}

inline AncillaVector ancilla_basis(std::size_t k)
{
    AncillaVector v{};
    v.at(k) = 1.0;
    return v;
}

} // namespace qsdc
