#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qsdc/channel.hpp"
#include "qsdc/error.hpp"
#include "qsdc/rng.hpp"
#include "qsdc/statevector.hpp"

namespace qsdc {

using Bit = std::uint8_t;

struct PairParams {
    Amplitude a{1.0 / std::sqrt(2.0)};
    Amplitude b{1.0 / std::sqrt(2.0)};
};

/// Which decoy states Alice draws from.
enum class DecoyBases : std::uint8_t { ZX, Z, X };

inline std::size_t default_decoy_count(std::size_t n_pairs) { return std::max<std::size_t>(16, n_pairs / 4); }

struct SessionConfig {
    std::size_t n_pairs = 1;
    std::size_t n_decoys = 16;
    PairParams pair_params;
    double error_threshold = 0.05;
    std::uint64_t rng_seed = 0;
    DecoyBases decoy_bases = DecoyBases::ZX;
    // Drawn uniformly from the session stream when absent.
    std::optional<std::vector<Bit>> message;

    static SessionConfig with_defaults(std::size_t n_pairs)
    {
        SessionConfig c;
        c.n_pairs = n_pairs;
        c.n_decoys = default_decoy_count(n_pairs);
        return c;
    }
};

inline void validate_session_config(const SessionConfig& c)
{
    if (c.n_pairs < 1)
        throw error(errc::config_invalid, "n_pairs must be >= 1");
    if (!(c.error_threshold >= 0.0 && c.error_threshold <= 1.0))
        throw error(errc::config_invalid, "error_threshold must lie in [0, 1]");
    const auto& p = c.pair_params;
    if (!is_finite(p.a) || !is_finite(p.b) || std::abs(std::norm(p.a) + std::norm(p.b) - 1.0) > kNormTolerance)
        throw error(errc::not_normalized, "pair amplitudes must satisfy |a|^2 + |b|^2 = 1");
    if (c.message) {
        if (c.message->size() != c.n_pairs)
            throw error(errc::config_invalid, "message length must equal n_pairs");
        for (Bit bit : *c.message)
            if (bit > 1)
                throw error(errc::config_invalid, "message bits must be 0 or 1");
    }
}

struct DecoyRecord {
    std::size_t position = 0;
    DecoyState prepared = DecoyState::Zero;
    Basis basis = Basis::Z;
};

// Classical messages, in the order the protocol exchanges them.

struct ReceiptAck {
    std::size_t count = 0;
};

struct DecoyAnnouncement {
    std::size_t position = 0;
    Basis basis = Basis::Z;
};

struct DecoyDisclosure {
    std::vector<DecoyAnnouncement> entries;
};

struct DecoyOutcome {
    std::size_t position = 0;
    Bit outcome = 0;
};

struct DecoyResults {
    std::vector<DecoyOutcome> entries;
};

enum class AbortReason : std::uint8_t { none, error_rate_exceeded, no_decoys_checked };

inline const char* to_string(AbortReason r) noexcept
{
    switch (r) {
    case AbortReason::none: return "none";
    case AbortReason::error_rate_exceeded: return "error_rate_exceeded";
    case AbortReason::no_decoys_checked: return "no_decoys_checked";
    }
    return "unknown";
}

struct AbortNotice {
    double error_rate = 0.0;
    AbortReason reason = AbortReason::error_rate_exceeded;
};

struct ReceivedIndices {
    std::vector<std::size_t> indices;
};

struct PairOutcome {
    std::size_t pair_index = 0;
    Bit outcome = 0;
};

struct ResultDisclosure {
    std::vector<PairOutcome> entries;
};

using ClassicalMessage
    = std::variant<ReceiptAck, DecoyDisclosure, DecoyResults, AbortNotice, ReceivedIndices, ResultDisclosure>;

/// True iff the transcript follows ReceiptAck, DecoyDisclosure, DecoyResults,
/// then either AbortNotice or ReceivedIndices followed by ResultDisclosure.
/// A prefix of that sequence is also accepted.
inline bool transcript_well_ordered(const std::vector<ClassicalMessage>& transcript)
{
    constexpr std::size_t kAck = 0, kDisclosure = 1, kResults = 2, kAbort = 3, kIndices = 4, kResultDisclosure = 5;
    constexpr std::size_t kStart = 6;
    std::size_t prev = kStart;
    for (const auto& m : transcript) {
        const std::size_t tag = m.index();
        bool ok = false;
        switch (prev) {
        case kStart: ok = tag == kAck; break;
        case kAck: ok = tag == kDisclosure; break;
        case kDisclosure: ok = tag == kResults; break;
        case kResults: ok = tag == kAbort || tag == kIndices; break;
        case kIndices: ok = tag == kResultDisclosure; break;
        default: ok = false; break;
        }
        if (!ok)
            return false;
        prev = tag;
    }
    return true;
}

struct Preparation {
    // Joint (A, B) state of every pair, in pair order. Alice holds the A
    // halves; the B halves travel in b_sequence by reference.
    std::vector<StateVector> pair_states;
    PhotonSequence b_sequence;
    std::vector<DecoyRecord> decoy_records;
};

inline DecoyState draw_decoy_state(DecoyBases bases, Rng& rng)
{
    switch (bases) {
    case DecoyBases::Z: return rng.bit() ? DecoyState::One : DecoyState::Zero;
    case DecoyBases::X: return rng.bit() ? DecoyState::Minus : DecoyState::Plus;
    case DecoyBases::ZX: break;
    }
    return static_cast<DecoyState>(rng.below(4));
}

/// Prepares N pairs and a B sequence with decoys at uniformly random
/// distinct positions. Signal photons keep pair order.
inline Preparation alice_prepare(const SessionConfig& config, Rng& rng)
{
    validate_session_config(config);
    const std::size_t n = config.n_pairs;
    const std::size_t total = n + config.n_decoys;

    Preparation prep;
    prep.pair_states.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        prep.pair_states.push_back(make_pair(config.pair_params.a, config.pair_params.b));

    // Partial Fisher-Yates picks the decoy positions.
    std::vector<std::size_t> order(total);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = 0; i < config.n_decoys; ++i)
        std::swap(order[i], order[i + rng.below(total - i)]);
    std::vector<std::size_t> decoy_positions(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(config.n_decoys));
    std::sort(decoy_positions.begin(), decoy_positions.end());

    std::vector<bool> is_decoy(total, false);
    for (auto p : decoy_positions)
        is_decoy[p] = true;

    prep.b_sequence.frame_length = total;
    prep.b_sequence.slots.reserve(total);
    std::size_t next_pair = 0;
    std::size_t next_decoy = 0;
    for (std::size_t pos = 0; pos < total; ++pos) {
        if (is_decoy[pos]) {
            const DecoyState s = draw_decoy_state(config.decoy_bases, rng);
            prep.decoy_records.push_back({pos, s, basis_of(s)});
            prep.b_sequence.slots.push_back({pos, DecoyPhoton{next_decoy++, make_decoy(s)}});
        } else {
            prep.b_sequence.slots.push_back({pos, SignalPhoton{next_pair++}});
        }
    }
    return prep;
}

inline DecoyDisclosure disclose_decoys(const std::vector<DecoyRecord>& records)
{
    DecoyDisclosure d;
    d.entries.reserve(records.size());
    for (const auto& r : records)
        d.entries.push_back({r.position, r.basis});
    return d;
}

/// Bob measures every disclosed decoy he received in its announced basis.
/// Disclosed positions inside the frame that never arrived are skipped.
inline DecoyResults bob_check_decoys(const PhotonSequence& received, const DecoyDisclosure& disclosure, Rng& rng)
{
    DecoyResults out;
    for (const auto& entry : disclosure.entries) {
        if (entry.position >= received.frame_length)
            throw error(errc::position_missing, "position " + std::to_string(entry.position) + " outside the frame");
        const PhotonSlot* slot = received.find(entry.position);
        if (!slot)
            continue; // lost in transit
        const auto* decoy = std::get_if<DecoyPhoton>(&slot->photon);
        if (!decoy)
            throw error(errc::position_missing, "no decoy at position " + std::to_string(entry.position));
        const auto m = measure(decoy->state, 0, entry.basis, rng.uniform());
        out.entries.push_back({entry.position, m.record.outcome});
    }
    return out;
}

struct DecoyTally {
    std::size_t z_checked = 0;
    std::size_t z_errors = 0;
    std::size_t x_checked = 0;
    std::size_t x_errors = 0;

    std::size_t checked() const noexcept { return z_checked + x_checked; }
    std::size_t errors() const noexcept { return z_errors + x_errors; }
};

/// Per-basis error counts of Bob's decoy results against Alice's records.
inline DecoyTally tally_decoys(const std::vector<DecoyRecord>& records, const DecoyResults& results)
{
    DecoyTally t;
    for (const auto& r : results.entries) {
        const auto it = std::find_if(records.begin(), records.end(),
                                     [&](const DecoyRecord& d) { return d.position == r.position; });
        if (it == records.end())
            throw error(errc::position_missing, "result for unknown decoy position " + std::to_string(r.position));
        const bool wrong = r.outcome != eigenvalue_bit(it->prepared);
        if (it->basis == Basis::Z) {
            ++t.z_checked;
            t.z_errors += wrong;
        } else {
            ++t.x_checked;
            t.x_errors += wrong;
        }
    }
    return t;
}

/// Fraction of checked decoys whose outcome differs from the prepared
/// eigenvalue. Zero checked decoys is an error rather than a pass.
inline double alice_error_rate(const std::vector<DecoyRecord>& records, const DecoyResults& results)
{
    const DecoyTally t = tally_decoys(records, results);
    if (t.checked() == 0)
        throw error(errc::empty_check, "no decoys were checked");
    return static_cast<double>(t.errors()) / static_cast<double>(t.checked());
}

// Subsystem layout after encoding: (a, A, B, [Eve's ancilla]).
inline constexpr std::size_t kEncodedQubitMessage = 0;
inline constexpr std::size_t kEncodedQubitA = 1;
inline constexpr std::size_t kEncodedQubitB = 2;

/// |bit>_a (x) pair, then CNOT with A as control and a as target.
inline StateVector alice_encode(const StateVector& pair_state, Bit bit)
{
    return apply_cnot(tensor(StateVector::qubit(bit), pair_state), kEncodedQubitA, kEncodedQubitMessage);
}

struct Encoding {
    Bit alice_outcome = 0;
    StateVector post_state;
};

inline Encoding alice_encode_and_measure(const StateVector& pair_state, Bit bit, Rng& rng)
{
    auto m = measure(alice_encode(pair_state, bit), kEncodedQubitMessage, Basis::Z, rng.uniform());
    return {m.record.outcome, std::move(m.state)};
}

inline Bit bob_measure_signal(const StateVector& post_state, Rng& rng)
{
    return measure(post_state, kEncodedQubitB, Basis::Z, rng.uniform()).record.outcome;
}

/// Alice's result XOR Bob's result.
constexpr Bit decode(Bit alice_outcome, Bit bob_outcome) noexcept { return (alice_outcome ^ bob_outcome) & 1u; }

struct SessionReport {
    bool aborted = false;
    AbortReason abort_reason = AbortReason::none;
    double decoy_error_rate = 0.0; // 0 when no decoy was checked
    std::size_t decoys_checked = 0;
    DecoyTally decoy_tally;
    std::vector<Bit> sent_bits;
    std::vector<bool> delivered_mask;
    std::vector<Bit> decoded_bits; // one per set delivered_mask entry, in pair order
    std::vector<ClassicalMessage> transcript;

    std::size_t bits_delivered() const noexcept { return decoded_bits.size(); }

    std::size_t bit_errors() const
    {
        std::size_t errors = 0;
        std::size_t k = 0;
        for (std::size_t i = 0; i < delivered_mask.size(); ++i)
            if (delivered_mask[i])
                errors += decoded_bits[k++] != sent_bits[i];
        return errors;
    }
};

/// Runs one full session between simulated Alice and Bob.
inline SessionReport run_session(const SessionConfig& config, const ChannelModel& channel)
{
    validate_session_config(config);
    validate_channel(channel);
    Rng rng(config.rng_seed);

    Preparation prep = alice_prepare(config, rng);

    SessionReport report;
    if (config.message) {
        report.sent_bits = *config.message;
    } else {
        report.sent_bits.resize(config.n_pairs);
        for (auto& bit : report.sent_bits)
            bit = rng.bit();
    }
    report.delivered_mask.assign(config.n_pairs, false);

    Transmission tx = transmit(prep.b_sequence, prep.pair_states, channel, rng);
    report.transcript.emplace_back(ReceiptAck{tx.delivered.slots.size()});

    DecoyDisclosure disclosure = disclose_decoys(prep.decoy_records);
    report.transcript.emplace_back(disclosure);

    DecoyResults results = bob_check_decoys(tx.delivered, disclosure, rng);
    report.transcript.emplace_back(results);

    report.decoy_tally = tally_decoys(prep.decoy_records, results);
    report.decoys_checked = report.decoy_tally.checked();
    try {
        report.decoy_error_rate = alice_error_rate(prep.decoy_records, results);
        if (report.decoy_error_rate > config.error_threshold)
            report.abort_reason = AbortReason::error_rate_exceeded;
    } catch (const error& e) {
        if (e.code() != errc::empty_check)
            throw;
        report.abort_reason = AbortReason::no_decoys_checked;
    }
    if (report.abort_reason != AbortReason::none) {
        report.aborted = true;
        report.transcript.emplace_back(AbortNotice{report.decoy_error_rate, report.abort_reason});
        return report;
    }

    const std::vector<std::size_t> received = reconcile(tx.outcome, prep.b_sequence);
    report.transcript.emplace_back(ReceivedIndices{received});

    // Alice encodes and measures every pair before Bob measures.
    std::vector<Encoding> encodings;
    encodings.reserve(config.n_pairs);
    for (std::size_t i = 0; i < config.n_pairs; ++i)
        encodings.push_back(alice_encode_and_measure(prep.pair_states[i], report.sent_bits[i], rng));

    ResultDisclosure disclosed;
    std::vector<Bit> bob_outcomes;
    for (std::size_t i : received) {
        bob_outcomes.push_back(bob_measure_signal(encodings[i].post_state, rng));
        disclosed.entries.push_back({i, encodings[i].alice_outcome});
    }
    report.transcript.emplace_back(disclosed);

    for (std::size_t k = 0; k < received.size(); ++k) {
        report.delivered_mask[received[k]] = true;
        report.decoded_bits.push_back(decode(disclosed.entries[k].outcome, bob_outcomes[k]));
    }
    return report;
}

} // namespace qsdc
