#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "qsdc/adversary.hpp"
#include "qsdc/error.hpp"
#include "qsdc/rng.hpp"
#include "qsdc/statevector.hpp"

namespace qsdc {

// Within a pair state the qubit order is (A, B, [Eve's ancilla]).
inline constexpr std::size_t kPairQubitA = 0;
inline constexpr std::size_t kPairQubitB = 1;

/// B half of pair `pair_index`; its quantum state lives in the joint pair
/// state the session keeps for that index.
struct SignalPhoton {
    std::size_t pair_index = 0;
};

struct DecoyPhoton {
    std::size_t decoy_id = 0;
    StateVector state;
};

struct PhotonSlot {
    std::size_t position = 0; // index in the transmitted frame
    std::variant<SignalPhoton, DecoyPhoton> photon;

    bool is_decoy() const noexcept { return std::holds_alternative<DecoyPhoton>(photon); }
};

/// A transmitted frame, or the part of it that arrived. Slots are ordered by
/// position; a received sequence keeps the sender's positions so the
/// receiver can tell which frame slots are missing.
struct PhotonSequence {
    std::size_t frame_length = 0;
    std::vector<PhotonSlot> slots;

    const PhotonSlot* find(std::size_t position) const
    {
        for (const auto& s : slots)
            if (s.position == position)
                return &s;
        return nullptr;
    }
};

struct ChannelModel {
    double loss_prob = 0.0;
    AttackModel attack = NoAttack{};
    // true: Eve sits at the channel head and forwards over a lossless line,
    // so the capture coin is thrown before the loss coin and the attack hits
    // photons that may still be lost. false: natural loss happens first and
    // Eve only sees photons that would have arrived.
    bool eve_lossless_forwarding = true;
};

inline void validate_channel(const ChannelModel& model)
{
    if (!(model.loss_prob >= 0.0 && model.loss_prob <= 1.0))
        throw error(errc::config_invalid, "loss_prob must lie in [0, 1]");
    validate_attack(model.attack);
}

enum class DeliveryStatus : std::uint8_t { Delivered, Lost, Captured };

struct DeliveryOutcome {
    std::vector<DeliveryStatus> status; // one entry per transmitted slot

    std::size_t count(DeliveryStatus s) const
    {
        std::size_t n = 0;
        for (auto x : status)
            n += x == s;
        return n;
    }
};

struct Transmission {
    PhotonSequence delivered;
    DeliveryOutcome outcome;
};

/// Sends `sequence` through the channel.
///
/// Attacks on signal photons act on the joint pair states in `pair_states`,
/// which is how entanglement with Alice's retained A photons is preserved.
/// Captured and lost photons are both simply absent from `delivered`.
inline Transmission transmit(const PhotonSequence& sequence, std::span<StateVector> pair_states,
                             const ChannelModel& model, Rng& rng)
{
    validate_channel(model);
    Transmission out;
    out.delivered.frame_length = sequence.frame_length;
    out.outcome.status.reserve(sequence.slots.size());

    for (const auto& slot : sequence.slots) {
        StateVector* signal_state = nullptr;
        std::optional<DecoyPhoton> decoy_copy;
        const StateVector* current = nullptr;
        std::size_t qubit = 0;
        if (const auto* s = std::get_if<SignalPhoton>(&slot.photon)) {
            if (s->pair_index >= pair_states.size())
                throw error(errc::index_out_of_range, "no pair state for pair " + std::to_string(s->pair_index));
            signal_state = &pair_states[s->pair_index];
            current = signal_state;
            qubit = kPairQubitB;
        } else {
            decoy_copy = std::get<DecoyPhoton>(slot.photon);
            current = &decoy_copy->state;
        }

        auto apply_attack = [&]() -> bool {
            AttackResult r = attack_qubit(*current, qubit, model.attack, rng);
            if (signal_state)
                *signal_state = std::move(r.state);
            else
                decoy_copy->state = std::move(r.state);
            return r.captured;
        };

        DeliveryStatus status = DeliveryStatus::Delivered;
        if (model.eve_lossless_forwarding) {
            if (apply_attack())
                status = DeliveryStatus::Captured;
            else if (rng.bernoulli(model.loss_prob))
                status = DeliveryStatus::Lost;
        } else {
            if (rng.bernoulli(model.loss_prob))
                status = DeliveryStatus::Lost;
            else if (apply_attack())
                status = DeliveryStatus::Captured;
        }

        out.outcome.status.push_back(status);
        if (status != DeliveryStatus::Delivered)
            continue;
        if (signal_state)
            out.delivered.slots.push_back(slot);
        else
            out.delivered.slots.push_back({slot.position, std::move(*decoy_copy)});
    }
    return out;
}

/// Pair indices (ascending) whose B photon was delivered.
inline std::vector<std::size_t> reconcile(const DeliveryOutcome& outcome, const PhotonSequence& layout)
{
    if (outcome.status.size() != layout.slots.size())
        throw error(errc::dimension_mismatch, "delivery outcome does not match the sequence layout");
    std::vector<std::size_t> indices;
    for (std::size_t i = 0; i < layout.slots.size(); ++i) {
        const auto* s = std::get_if<SignalPhoton>(&layout.slots[i].photon);
        if (s && outcome.status[i] == DeliveryStatus::Delivered)
            indices.push_back(s->pair_index);
    }
    std::sort(indices.begin(), indices.end());
    return indices;
}

} // namespace qsdc
