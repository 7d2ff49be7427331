#pragma once

#include <cmath>
#include <string>
#include <type_traits>
#include <variant>

#include "qsdc/error.hpp"
#include "qsdc/probe.hpp"
#include "qsdc/rng.hpp"
#include "qsdc/statevector.hpp"

namespace qsdc {

enum class BasisStrategy : std::uint8_t { RandomZX, AlwaysZ, AlwaysX };

struct NoAttack {
    friend bool operator==(const NoAttack&, const NoAttack&) = default;
};

/// Eve measures each photon in transit and forwards the eigenstate she saw.
struct InterceptResend {
    BasisStrategy basis_strategy = BasisStrategy::RandomZX;
};

/// Eve entangles each photon with a fresh 4-dim probe.
struct UnitaryProbe {
    ProbeIsometry iso;
};

/// Eve keeps a fraction of the photons and forwards the rest untouched.
struct CaptureFraction {
    double capture_prob = 0.0;
};

using AttackModel = std::variant<NoAttack, InterceptResend, UnitaryProbe, CaptureFraction>;

inline const char* attack_name(const AttackModel& m) noexcept
{
    switch (m.index()) {
    case 0: return "none";
    case 1: return "intercept_resend";
    case 2: return "unitary_probe";
    case 3: return "capture";
    }
    return "unknown";
}

/// Throws if the model's parameters are out of range.
inline void validate_attack(const AttackModel& model)
{
    if (const auto* p = std::get_if<UnitaryProbe>(&model)) {
        if (const auto v = validate_probe(p->iso); !v.ok())
            throw error(errc::invalid_isometry, describe(v));
    }
    if (const auto* c = std::get_if<CaptureFraction>(&model)) {
        if (!(c->capture_prob >= 0.0 && c->capture_prob <= 1.0))
            throw error(errc::config_invalid, "capture_prob must lie in [0, 1]");
    }
}

struct AttackResult {
    StateVector state;
    bool captured = false;
};

/// Applies `model` to qubit `qubit` of `state`.
///
/// Intercept-resend is a projective measurement: the collapsed state is
/// exactly the re-prepared eigenstate with the rest of the register, so no
/// separate re-preparation step is needed. A unitary probe appends Eve's
/// ancilla directly after `qubit`.
inline AttackResult attack_qubit(const StateVector& state, std::size_t qubit, const AttackModel& model, Rng& rng)
{
    return std::visit(
        [&](const auto& m) -> AttackResult {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, NoAttack>) {
                return {state, false};
            } else if constexpr (std::is_same_v<M, InterceptResend>) {
                Basis basis = Basis::Z;
                switch (m.basis_strategy) {
                case BasisStrategy::RandomZX: basis = rng.bit() ? Basis::X : Basis::Z; break;
                case BasisStrategy::AlwaysZ: basis = Basis::Z; break;
                case BasisStrategy::AlwaysX: basis = Basis::X; break;
                }
                return {measure(state, qubit, basis, rng.uniform()).state, false};
            } else if constexpr (std::is_same_v<M, UnitaryProbe>) {
                return {apply_isometry(state, qubit, m.iso), false};
            } else {
                return {state, rng.bernoulli(m.capture_prob)};
            }
        },
        model);
}

struct ProbeErrorRates {
    double z_error = 0.0;
    double x_error = 0.0;
};

/// Closed-form decoy error probabilities under a probe.
///
/// Z decoys: |0> flips with |beta|^2 and |1> with |beta'|^2. X decoys: the
/// wrong-sign branch of E|+,e> is (1/2)(alpha eps00 - beta eps01 + beta' eps10
/// - alpha' eps11), and of E|-,e> is (1/2)(alpha eps00 + beta eps01 - beta'
/// eps10 - alpha' eps11); the error is the mean of their squared norms.
inline ProbeErrorRates probe_error_rates(const ProbeIsometry& iso)
{
    if (const auto v = validate_probe(iso); !v.ok())
        throw error(errc::invalid_isometry, describe(v));

    auto branch_norm = [&](double s_beta, double s_beta_p, double s_alpha_p) {
        double n = 0.0;
        for (std::size_t j = 0; j < kAncillaDim; ++j) {
            const Amplitude z = iso.alpha * iso.eps00[j] + s_beta * iso.beta * iso.eps01[j]
                                + s_beta_p * iso.beta_p * iso.eps10[j] + s_alpha_p * iso.alpha_p * iso.eps11[j];
            n += std::norm(z);
        }
        return 0.25 * n;
    };
    const double plus_err = branch_norm(-1.0, +1.0, -1.0);
    const double minus_err = branch_norm(+1.0, -1.0, -1.0);
    return {0.5 * (std::norm(iso.beta) + std::norm(iso.beta_p)), 0.5 * (plus_err + minus_err)};
}

/// The probe that leaves both the photon and Eve's ancilla untouched:
/// alpha = alpha' = 1 with a shared probe state eps00 = eps11. (With the
/// default orthonormal eps vectors the same amplitudes instead record the Z
/// value in the ancilla and disturb X-basis photons.)
inline ProbeIsometry identity_probe()
{
    ProbeIsometry iso;
    iso.eps11 = iso.eps00;
    return iso;
}

/// Symmetric probe with |beta|^2 = |beta'|^2 = e and orthonormal probe states.
inline ProbeIsometry probe_from_error_rate(double e)
{
    if (!(e >= 0.0 && e <= 1.0))
        throw error(errc::config_invalid, "probe error rate must lie in [0, 1]");
    ProbeIsometry iso;
    iso.alpha = iso.alpha_p = std::sqrt(1.0 - e);
    iso.beta = iso.beta_p = std::sqrt(e);
    return iso;
}

/// Haar-like random probe: two random orthonormal columns in C^2 (x) C^4,
/// split into (amplitude, unit probe state) per qubit branch. The probe
/// states are generally not orthogonal to each other.
inline ProbeIsometry random_probe(Rng& rng)
{
    using Column = std::array<Amplitude, 8>;
    auto gaussian = [&] {
        // Box-Muller on our own uniforms keeps the stream portable.
        double u1 = rng.uniform();
        while (u1 <= 0.0)
            u1 = rng.uniform();
        const double u2 = rng.uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    };
    auto random_column = [&] {
        Column c;
        for (auto& z : c)
            z = Amplitude(gaussian(), gaussian());
        return c;
    };
    auto normalize = [](Column& c) {
        double n = 0.0;
        for (auto& z : c)
            n += std::norm(z);
        n = std::sqrt(n);
        for (auto& z : c)
            z /= n;
    };

    Column v0 = random_column();
    normalize(v0);
    Column v1 = random_column();
    Amplitude proj{};
    for (std::size_t i = 0; i < 8; ++i)
        proj += std::conj(v0[i]) * v1[i];
    for (std::size_t i = 0; i < 8; ++i)
        v1[i] -= proj * v0[i];
    normalize(v1);

    // Splits the half [offset, offset+4) into magnitude and unit direction.
    auto split = [](const Column& c, std::size_t offset, Amplitude& amp, AncillaVector& eps) {
        double n = 0.0;
        for (std::size_t j = 0; j < 4; ++j)
            n += std::norm(c[offset + j]);
        n = std::sqrt(n);
        amp = n;
        for (std::size_t j = 0; j < 4; ++j)
            eps[j] = c[offset + j] / n;
    };
    ProbeIsometry iso;
    split(v0, 0, iso.alpha, iso.eps00);
    split(v0, 4, iso.beta, iso.eps01);
    split(v1, 0, iso.beta_p, iso.eps10);
    split(v1, 4, iso.alpha_p, iso.eps11);
    return iso;
}

} // namespace qsdc
