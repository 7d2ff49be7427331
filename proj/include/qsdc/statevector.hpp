#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qsdc/amplitude.hpp"
#include "qsdc/error.hpp"
#include "qsdc/probe.hpp"

namespace qsdc {

enum class Basis : std::uint8_t { Z, X };

inline const char* to_string(Basis b) noexcept { return b == Basis::Z ? "Z" : "X"; }

enum class DecoyState : std::uint8_t { Zero, One, Plus, Minus };

inline const char* to_string(DecoyState s) noexcept
{
    switch (s) {
    case DecoyState::Zero: return "0";
    case DecoyState::One: return "1";
    case DecoyState::Plus: return "+";
    case DecoyState::Minus: return "-";
    }
    return "?";
}

constexpr Basis basis_of(DecoyState s) noexcept
{
    return (s == DecoyState::Zero || s == DecoyState::One) ? Basis::Z : Basis::X;
}

// Outcome bit of the eigenstate in its own basis: |0>,|+> -> 0, |1>,|-> -> 1.
constexpr std::uint8_t eigenvalue_bit(DecoyState s) noexcept
{
    return (s == DecoyState::One || s == DecoyState::Minus) ? 1 : 0;
}

inline constexpr std::size_t kQubitDim = 2;
inline constexpr std::size_t kAncillaDim = 4;
inline constexpr std::size_t kMaxRegisterDim = 64;

/// Dense pure state over a small register of subsystems.
///
/// Subsystem 0 is the leftmost ket label and the flat index is big-endian
/// over subsystems, so |a A B> = |1 0 1> lives at index 0b101 for qubits.
/// Instances are always normalized; every operation returns a new value.
class StateVector {
public:
    StateVector(std::vector<std::size_t> dims, std::vector<Amplitude> amps)
        : dims_(std::move(dims)), amps_(std::move(amps))
    {
        if (dims_.empty())
            throw error(errc::dimension_mismatch, "state needs at least one subsystem");
        std::size_t total = 1;
        for (auto d : dims_) {
            if (d < 2)
                throw error(errc::dimension_mismatch, "subsystem dimension must be >= 2");
            total *= d;
        }
        if (total > kMaxRegisterDim)
            throw error(errc::register_too_large, "register dimension " + std::to_string(total));
        if (total != amps_.size())
            throw error(errc::dimension_mismatch,
                        "expected " + std::to_string(total) + " amplitudes, got " + std::to_string(amps_.size()));
        for (const auto& z : amps_)
            if (!is_finite(z))
                throw error(errc::not_normalized, "non-finite amplitude");
        const double n = norm_squared();
        if (std::abs(n - 1.0) > kNormTolerance)
            throw error(errc::not_normalized, "squared norm " + std::to_string(n));
    }

    /// Computational basis state |bit> of one qubit.
    static StateVector qubit(std::uint8_t bit)
    {
        std::vector<Amplitude> amps(2);
        amps[bit & 1u] = 1.0;
        return StateVector({kQubitDim}, std::move(amps));
    }

    std::span<const Amplitude> amps() const noexcept { return amps_; }
    std::span<const std::size_t> dims() const noexcept { return dims_; }
    std::size_t num_subsystems() const noexcept { return dims_.size(); }
    std::size_t dimension() const noexcept { return amps_.size(); }
    Amplitude operator[](std::size_t i) const { return amps_.at(i); }

    double norm_squared() const noexcept
    {
        return std::accumulate(amps_.begin(), amps_.end(), 0.0,
                               [](double s, const Amplitude& z) { return s + std::norm(z); });
    }

    /// Product of the dimensions of subsystems after `k`.
    std::size_t stride(std::size_t k) const
    {
        check_index(k);
        std::size_t s = 1;
        for (std::size_t j = k + 1; j < dims_.size(); ++j)
            s *= dims_[j];
        return s;
    }

    void check_index(std::size_t k) const
    {
        if (k >= dims_.size())
            throw error(errc::index_out_of_range,
                        "subsystem " + std::to_string(k) + " of " + std::to_string(dims_.size()));
    }

    void check_qubit(std::size_t k) const
    {
        check_index(k);
        if (dims_[k] != kQubitDim)
            throw error(errc::index_out_of_range, "subsystem " + std::to_string(k) + " is not a qubit");
    }

    friend bool operator==(const StateVector&, const StateVector&) = default;

private:
    struct unchecked_t {};

    // Gate results are norm-preserving by construction; skip revalidation.
    StateVector(unchecked_t, std::vector<std::size_t> dims, std::vector<Amplitude> amps)
        : dims_(std::move(dims)), amps_(std::move(amps))
    {
    }

    friend StateVector tensor(const StateVector&, const StateVector&);
    friend StateVector apply_cnot(const StateVector&, std::size_t, std::size_t);
    friend StateVector apply_single_qubit(const StateVector&, std::size_t, const std::array<Amplitude, 4>&);
    friend StateVector apply_isometry(const StateVector&, std::size_t, const ProbeIsometry&);
    friend StateVector project_and_renormalize(const StateVector&, std::size_t, std::uint8_t);

    std::vector<std::size_t> dims_;
    std::vector<Amplitude> amps_;
};

struct MeasurementRecord {
    std::size_t subsystem = 0;
    Basis basis = Basis::Z;
    std::uint8_t outcome = 0;
    double outcome_prob = 0.0;
};

struct Measurement {
    MeasurementRecord record;
    StateVector state;
};

/// a|00> + b|11> over qubit order (A, B). Call as qsdc::make_pair when an
/// argument is not already an Amplitude; ADL also finds std::make_pair.
inline StateVector make_pair(Amplitude a, Amplitude b)
{
    if (!is_finite(a) || !is_finite(b))
        throw error(errc::not_normalized, "non-finite pair amplitude");
    const double n = std::norm(a) + std::norm(b);
    if (std::abs(n - 1.0) > kNormTolerance)
        throw error(errc::not_normalized, "|a|^2 + |b|^2 = " + std::to_string(n));
    return StateVector({kQubitDim, kQubitDim}, {a, 0.0, 0.0, b});
}

inline StateVector make_decoy(DecoyState which)
{
    const double h = 1.0 / std::sqrt(2.0);
    switch (which) {
    case DecoyState::Zero: return StateVector({kQubitDim}, {1.0, 0.0});
    case DecoyState::One: return StateVector({kQubitDim}, {0.0, 1.0});
    case DecoyState::Plus: return StateVector({kQubitDim}, {h, h});
    case DecoyState::Minus: return StateVector({kQubitDim}, {h, -h});
    }
    throw error(errc::index_out_of_range, "unknown decoy state");
}

/// Kronecker product; left's subsystems come first.
inline StateVector tensor(const StateVector& left, const StateVector& right)
{
    const std::size_t total = left.dimension() * right.dimension();
    if (total > kMaxRegisterDim)
        throw error(errc::register_too_large, "register dimension " + std::to_string(total));
    std::vector<std::size_t> dims(left.dims_);
    dims.insert(dims.end(), right.dims_.begin(), right.dims_.end());
    std::vector<Amplitude> amps;
    amps.reserve(total);
    for (const auto& l : left.amps_)
        for (const auto& r : right.amps_)
            amps.push_back(l * r);
    return StateVector(StateVector::unchecked_t{}, std::move(dims), std::move(amps));
}

inline StateVector apply_cnot(const StateVector& state, std::size_t control, std::size_t target)
{
    state.check_qubit(control);
    state.check_qubit(target);
    if (control == target)
        throw error(errc::same_index, "control and target are both " + std::to_string(control));
    const std::size_t cs = state.stride(control);
    const std::size_t ts = state.stride(target);
    std::vector<Amplitude> amps(state.amps_);
    for (std::size_t i = 0; i < amps.size(); ++i) {
        const bool c = (i / cs) % 2 == 1;
        const bool t = (i / ts) % 2 == 1;
        if (c && !t)
            std::swap(amps[i], amps[i + ts]);
    }
    return StateVector(StateVector::unchecked_t{}, state.dims_, std::move(amps));
}

/// Applies a 2x2 matrix {m00, m01, m10, m11} (row-major) to one qubit.
/// The caller supplies a unitary; the result is not renormalized.
inline StateVector apply_single_qubit(const StateVector& state, std::size_t k, const std::array<Amplitude, 4>& m)
{
    state.check_qubit(k);
    const std::size_t s = state.stride(k);
    std::vector<Amplitude> amps(state.amps_);
    for (std::size_t i = 0; i < amps.size(); ++i) {
        if ((i / s) % 2 == 1)
            continue;
        const Amplitude x0 = state.amps_[i];
        const Amplitude x1 = state.amps_[i + s];
        amps[i] = m[0] * x0 + m[1] * x1;
        amps[i + s] = m[2] * x0 + m[3] * x1;
    }
    return StateVector(StateVector::unchecked_t{}, state.dims_, std::move(amps));
}

inline const std::array<Amplitude, 4>& hadamard()
{
    static const double h = 1.0 / std::sqrt(2.0);
    static const std::array<Amplitude, 4> m{h, h, h, -h};
    return m;
}

/// Z-basis outcome probabilities of qubit k.
inline std::array<double, 2> z_probabilities(const StateVector& state, std::size_t k)
{
    state.check_qubit(k);
    const std::size_t s = state.stride(k);
    std::array<double, 2> p{0.0, 0.0};
    const auto amps = state.amps();
    for (std::size_t i = 0; i < amps.size(); ++i)
        p[(i / s) % 2] += std::norm(amps[i]);
    return p;
}

/// Outcome probabilities of qubit k in the given basis (Born rule).
inline std::array<double, 2> outcome_probabilities(const StateVector& state, std::size_t k, Basis basis)
{
    if (basis == Basis::Z)
        return z_probabilities(state, k);
    return z_probabilities(apply_single_qubit(state, k, hadamard()), k);
}

/// Keeps the branch where qubit k reads `bit` in Z and renormalizes it.
inline StateVector project_and_renormalize(const StateVector& state, std::size_t k, std::uint8_t bit)
{
    state.check_qubit(k);
    const std::size_t s = state.stride(k);
    std::vector<Amplitude> amps(state.amps_.size());
    double n = 0.0;
    for (std::size_t i = 0; i < amps.size(); ++i) {
        if ((i / s) % 2 == bit) {
            amps[i] = state.amps_[i];
            n += std::norm(amps[i]);
        }
    }
    if (n <= 0.0)
        throw error(errc::not_normalized, "projection onto a zero-probability branch");
    const double scale = 1.0 / std::sqrt(n);
    for (auto& z : amps)
        z *= scale;
    return StateVector(StateVector::unchecked_t{}, state.dims_, std::move(amps));
}

/// Projective measurement of qubit `subsystem`.
///
/// Outcome 0 is returned iff `rand` < P(0). Branches whose probability is
/// below 1e-14 are treated as impossible so that eigenstates give their
/// eigenvalue for every rand in [0, 1).
inline Measurement measure(const StateVector& state, std::size_t subsystem, Basis basis, double rand)
{
    constexpr double kNegligible = 1e-14;
    state.check_qubit(subsystem);
    const StateVector rotated = basis == Basis::Z ? state : apply_single_qubit(state, subsystem, hadamard());
    const auto p = z_probabilities(rotated, subsystem);

    std::uint8_t outcome;
    if (p[1] < kNegligible)
        outcome = 0;
    else if (p[0] < kNegligible)
        outcome = 1;
    else
        outcome = rand < p[0] ? 0 : 1;

    StateVector collapsed = project_and_renormalize(rotated, subsystem, outcome);
    if (basis == Basis::X)
        collapsed = apply_single_qubit(collapsed, subsystem, hadamard());
    return {MeasurementRecord{subsystem, basis, outcome, p[outcome]}, std::move(collapsed)};
}

/// Replaces qubit `subsystem` with (qubit, 4-dim ancilla) through Eve's probe.
/// The ancilla is inserted directly after the qubit.
inline StateVector apply_isometry(const StateVector& state, std::size_t subsystem, const ProbeIsometry& iso)
{
    state.check_qubit(subsystem);
    if (const auto v = validate_probe(iso); !v.ok())
        throw error(errc::invalid_isometry, describe(v));

    const std::size_t suffix = state.stride(subsystem);
    const std::size_t out_total = state.dimension() * kAncillaDim;
    if (out_total > kMaxRegisterDim)
        throw error(errc::register_too_large, "register dimension " + std::to_string(out_total));

    std::vector<std::size_t> dims(state.dims_);
    dims.insert(dims.begin() + static_cast<std::ptrdiff_t>(subsystem) + 1, kAncillaDim);

    std::vector<Amplitude> amps(out_total);
    const auto& in = state.amps_;
    for (std::size_t i = 0; i < in.size(); ++i) {
        if (in[i] == Amplitude{})
            continue;
        const std::size_t prefix = i / (2 * suffix);
        const std::size_t q = (i / suffix) % 2;
        const std::size_t rest = i % suffix;
        // Image of |q>: (amplitude on |0>, probe state), (amplitude on |1>, probe state).
        const Amplitude c0 = q == 0 ? iso.alpha : iso.beta_p;
        const Amplitude c1 = q == 0 ? iso.beta : iso.alpha_p;
        const AncillaVector& e0 = q == 0 ? iso.eps00 : iso.eps10;
        const AncillaVector& e1 = q == 0 ? iso.eps01 : iso.eps11;
        for (std::size_t j = 0; j < kAncillaDim; ++j) {
            const std::size_t out0 = ((prefix * 2 + 0) * kAncillaDim + j) * suffix + rest;
            const std::size_t out1 = ((prefix * 2 + 1) * kAncillaDim + j) * suffix + rest;
            amps[out0] += in[i] * c0 * e0[j];
            amps[out1] += in[i] * c1 * e1[j];
        }
    }
    return StateVector(StateVector::unchecked_t{}, std::move(dims), std::move(amps));
}

} // namespace qsdc
