#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "qsdc/adversary.hpp"
#include "qsdc/channel.hpp"
#include "qsdc/error.hpp"
#include "qsdc/protocol.hpp"
#include "qsdc/rng.hpp"

namespace qsdc::harness {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kReportDirEnv = "QSDC_REPORT_DIR";
inline constexpr const char* kDefaultReportName = "qsdc-report.json";

enum class PairMode { fixed, random };

struct RunConfig {
    SessionConfig session; // session.rng_seed is the batch seed
    PairMode pair_mode = PairMode::fixed;
    ChannelModel channel;
    std::size_t n_sessions = 1;
    std::size_t threads = 0; // 0: hardware concurrency
    std::string report_path;
};

// ---------------------------------------------------------------------------
// Config parsing

namespace detail {

class Diagnostics {
public:
    void add(const std::string& field, const std::string& message) { items_.push_back(field + ": " + message); }
    bool empty() const noexcept { return items_.empty(); }

    [[noreturn]] void raise() const
    {
        std::string s;
        for (const auto& i : items_)
            s += "\n  " + i;
        throw error(errc::config_invalid, "invalid configuration:" + s);
    }

private:
    std::vector<std::string> items_;
};

inline void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> known,
                           Diagnostics& diag)
{
    std::set<std::string> allowed(known.begin(), known.end());
    for (const auto& [key, _] : obj.items())
        if (!allowed.count(key))
            diag.add(where.empty() ? key : where + "." + key, "unknown field");
}

inline std::optional<Amplitude> read_amplitude(const json& j, const std::string& field, Diagnostics& diag)
{
    if (j.is_number())
        return Amplitude(j.get<double>(), 0.0);
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return Amplitude(j[0].get<double>(), j[1].get<double>());
    diag.add(field, "expected a number or [re, im]");
    return std::nullopt;
}

inline json amplitude_to_json(Amplitude z)
{
    if (z.imag() == 0.0)
        return z.real();
    return json::array({z.real(), z.imag()});
}

template <class T>
bool read_number(const json& obj, const char* key, const std::string& where, T& out, Diagnostics& diag)
{
    if (!obj.contains(key))
        return false;
    const json& v = obj.at(key);
    const std::string field = where + "." + key;
    if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) {
            diag.add(field, "expected a number");
            return false;
        }
        out = v.get<T>();
    } else {
        if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0)) {
            diag.add(field, "expected a non-negative integer");
            return false;
        }
        out = v.get<T>();
    }
    return true;
}

inline void parse_session(const json& j, RunConfig& cfg, Diagnostics& diag)
{
    if (!j.is_object()) {
        diag.add("session", "expected an object");
        return;
    }
    reject_unknown(j, "session", {"n_pairs", "n_decoys", "pair", "error_threshold", "rng_seed", "decoy_bases", "message"},
                   diag);
    SessionConfig& s = cfg.session;
    read_number(j, "n_pairs", "session", s.n_pairs, diag);
    if (s.n_pairs < 1)
        diag.add("session.n_pairs", "must be >= 1");
    if (!read_number(j, "n_decoys", "session", s.n_decoys, diag))
        s.n_decoys = default_decoy_count(s.n_pairs);
    read_number(j, "error_threshold", "session", s.error_threshold, diag);
    if (!(s.error_threshold >= 0.0 && s.error_threshold <= 1.0))
        diag.add("session.error_threshold", "must lie in [0, 1]");
    read_number(j, "rng_seed", "session", s.rng_seed, diag);

    if (j.contains("decoy_bases")) {
        const json& v = j["decoy_bases"];
        if (v == "ZX")
            s.decoy_bases = DecoyBases::ZX;
        else if (v == "Z")
            s.decoy_bases = DecoyBases::Z;
        else if (v == "X")
            s.decoy_bases = DecoyBases::X;
        else
            diag.add("session.decoy_bases", "expected \"ZX\", \"Z\" or \"X\"");
    }

    if (j.contains("pair")) {
        const json& p = j["pair"];
        if (p == "random") {
            cfg.pair_mode = PairMode::random;
        } else if (p.is_object()) {
            reject_unknown(p, "session.pair", {"a", "b"}, diag);
            if (!p.contains("a")) {
                diag.add("session.pair.a", "required");
            } else if (auto a = read_amplitude(p["a"], "session.pair.a", diag)) {
                std::optional<Amplitude> b;
                if (p.contains("b"))
                    b = read_amplitude(p["b"], "session.pair.b", diag);
                else if (std::norm(*a) <= 1.0 + kNormTolerance)
                    b = Amplitude(std::sqrt(std::max(0.0, 1.0 - std::norm(*a))), 0.0);
                if (b) {
                    s.pair_params = {*a, *b};
                    if (std::abs(std::norm(*a) + std::norm(*b) - 1.0) > kNormTolerance)
                        diag.add("session.pair", "|a|^2 + |b|^2 must equal 1");
                } else if (!p.contains("b")) {
                    diag.add("session.pair.a", "|a| must not exceed 1");
                }
            }
        } else {
            diag.add("session.pair", "expected {\"a\": ..., \"b\": ...} or \"random\"");
        }
    }

    if (j.contains("message")) {
        const json& m = j["message"];
        if (!m.is_string()) {
            diag.add("session.message", "expected a string of 0/1 characters");
        } else {
            std::vector<Bit> bits;
            for (char c : m.get<std::string>()) {
                if (c != '0' && c != '1') {
                    diag.add("session.message", "expected only 0/1 characters");
                    break;
                }
                bits.push_back(static_cast<Bit>(c - '0'));
            }
            if (bits.size() != s.n_pairs)
                diag.add("session.message", "length must equal session.n_pairs");
            s.message = std::move(bits);
        }
    }
}

inline std::optional<AncillaVector> read_ancilla(const json& j, const std::string& field, Diagnostics& diag)
{
    if (!j.is_array() || j.size() != kAncillaDim) {
        diag.add(field, "expected an array of 4 amplitudes");
        return std::nullopt;
    }
    AncillaVector v{};
    for (std::size_t i = 0; i < kAncillaDim; ++i) {
        auto z = read_amplitude(j[i], field + "[" + std::to_string(i) + "]", diag);
        if (!z)
            return std::nullopt;
        v[i] = *z;
    }
    return v;
}

inline std::optional<ProbeIsometry> parse_probe(const json& j, const std::string& where, Diagnostics& diag)
{
    if (!j.is_object()) {
        diag.add(where, "expected an object");
        return std::nullopt;
    }
    reject_unknown(j, where, {"beta_sq", "alpha", "beta", "beta_p", "alpha_p", "eps00", "eps01", "eps10", "eps11"},
                   diag);
    ProbeIsometry iso;
    if (j.contains("beta_sq")) {
        const json& e = j["beta_sq"];
        if (!e.is_number() || e.get<double>() < 0.0 || e.get<double>() > 1.0) {
            diag.add(where + ".beta_sq", "expected a number in [0, 1]");
            return std::nullopt;
        }
        iso = probe_from_error_rate(e.get<double>());
        for (const char* k : {"alpha", "beta", "beta_p", "alpha_p"})
            if (j.contains(k))
                diag.add(where + "." + k, "cannot be combined with beta_sq");
        return iso;
    }
    bool ok = true;
    auto amp = [&](const char* key, Amplitude& out) {
        if (!j.contains(key)) {
            diag.add(where + "." + key, "required (or give beta_sq)");
            ok = false;
        } else if (auto z = read_amplitude(j[key], where + "." + key, diag)) {
            out = *z;
        } else {
            ok = false;
        }
    };
    amp("alpha", iso.alpha);
    amp("beta", iso.beta);
    amp("beta_p", iso.beta_p);
    amp("alpha_p", iso.alpha_p);
    auto eps = [&](const char* key, AncillaVector& out) {
        if (!j.contains(key))
            return;
        if (auto v = read_ancilla(j[key], where + "." + key, diag))
            out = *v;
        else
            ok = false;
    };
    eps("eps00", iso.eps00);
    eps("eps01", iso.eps01);
    eps("eps10", iso.eps10);
    eps("eps11", iso.eps11);
    if (!ok)
        return std::nullopt;
    return iso;
}

inline void parse_attack(const json& j, RunConfig& cfg, Diagnostics& diag)
{
    if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) {
        diag.add("attack.type", "required string");
        return;
    }
    const std::string type = j["type"];
    if (type == "none") {
        reject_unknown(j, "attack", {"type"}, diag);
        cfg.channel.attack = NoAttack{};
    } else if (type == "intercept_resend") {
        reject_unknown(j, "attack", {"type", "basis_strategy"}, diag);
        InterceptResend ir;
        const std::string strategy = j.value("basis_strategy", std::string("random_zx"));
        if (strategy == "random_zx")
            ir.basis_strategy = BasisStrategy::RandomZX;
        else if (strategy == "always_z")
            ir.basis_strategy = BasisStrategy::AlwaysZ;
        else if (strategy == "always_x")
            ir.basis_strategy = BasisStrategy::AlwaysX;
        else
            diag.add("attack.basis_strategy", "expected random_zx, always_z or always_x");
        cfg.channel.attack = ir;
    } else if (type == "unitary_probe") {
        reject_unknown(j, "attack", {"type", "probe"}, diag);
        if (!j.contains("probe")) {
            diag.add("attack.probe", "required");
            return;
        }
        if (auto iso = parse_probe(j["probe"], "attack.probe", diag)) {
            if (const auto v = validate_probe(*iso); !v.ok())
                diag.add("attack.probe", "not an isometry: " + describe(v));
            cfg.channel.attack = UnitaryProbe{*iso};
        }
    } else if (type == "capture") {
        reject_unknown(j, "attack", {"type", "capture_prob"}, diag);
        CaptureFraction c;
        read_number(j, "capture_prob", "attack", c.capture_prob, diag);
        if (!(c.capture_prob >= 0.0 && c.capture_prob <= 1.0))
            diag.add("attack.capture_prob", "must lie in [0, 1]");
        cfg.channel.attack = c;
    } else {
        diag.add("attack.type", "expected none, intercept_resend, unitary_probe or capture");
    }
}

} // namespace detail

/// Parses and validates a run configuration document. All problems are
/// collected and raised together as one config_invalid error.
inline RunConfig parse_run_config(const json& doc)
{
    detail::Diagnostics diag;
    RunConfig cfg;
    if (!doc.is_object()) {
        diag.add("<root>", "expected an object");
        diag.raise();
    }
    detail::reject_unknown(doc, "",
                           {"schema_version", "session", "channel", "attack", "n_sessions", "threads", "report_path",
                            "sweep"},
                           diag);
    if (!doc.contains("schema_version"))
        diag.add("schema_version", "required");
    else if (doc["schema_version"] != kSchemaVersion)
        diag.add("schema_version", "unsupported (expected " + std::to_string(kSchemaVersion) + ")");

    cfg.session.n_decoys = default_decoy_count(cfg.session.n_pairs);
    if (doc.contains("session"))
        detail::parse_session(doc["session"], cfg, diag);
    else
        diag.add("session", "required");

    if (doc.contains("channel")) {
        const json& c = doc["channel"];
        if (!c.is_object()) {
            diag.add("channel", "expected an object");
        } else {
            detail::reject_unknown(c, "channel", {"loss_prob", "eve_lossless_forwarding"}, diag);
            detail::read_number(c, "loss_prob", "channel", cfg.channel.loss_prob, diag);
            if (!(cfg.channel.loss_prob >= 0.0 && cfg.channel.loss_prob <= 1.0))
                diag.add("channel.loss_prob", "must lie in [0, 1]");
            if (c.contains("eve_lossless_forwarding")) {
                if (c["eve_lossless_forwarding"].is_boolean())
                    cfg.channel.eve_lossless_forwarding = c["eve_lossless_forwarding"].get<bool>();
                else
                    diag.add("channel.eve_lossless_forwarding", "expected a boolean");
            }
        }
    }

    if (doc.contains("attack"))
        detail::parse_attack(doc["attack"], cfg, diag);

    detail::read_number(doc, "n_sessions", "", cfg.n_sessions, diag);
    if (cfg.n_sessions < 1)
        diag.add("n_sessions", "must be >= 1");
    detail::read_number(doc, "threads", "", cfg.threads, diag);
    if (doc.contains("report_path")) {
        if (doc["report_path"].is_string())
            cfg.report_path = doc["report_path"].get<std::string>();
        else
            diag.add("report_path", "expected a string");
    }

    if (!diag.empty())
        diag.raise();
    return cfg;
}

/// Canonical form of a parsed config; echoed into every report.
inline json config_to_json(const RunConfig& cfg)
{
    const SessionConfig& s = cfg.session;
    json session = {
        {"n_pairs", s.n_pairs},
        {"n_decoys", s.n_decoys},
        {"error_threshold", s.error_threshold},
        {"rng_seed", s.rng_seed},
        {"decoy_bases", s.decoy_bases == DecoyBases::ZX ? "ZX" : s.decoy_bases == DecoyBases::Z ? "Z" : "X"},
    };
    if (cfg.pair_mode == PairMode::random)
        session["pair"] = "random";
    else
        session["pair"] = {{"a", detail::amplitude_to_json(s.pair_params.a)},
                           {"b", detail::amplitude_to_json(s.pair_params.b)}};
    if (s.message) {
        std::string m;
        for (Bit b : *s.message)
            m += static_cast<char>('0' + b);
        session["message"] = m;
    }

    json attack = {{"type", attack_name(cfg.channel.attack)}};
    if (const auto* ir = std::get_if<InterceptResend>(&cfg.channel.attack)) {
        attack["basis_strategy"] = ir->basis_strategy == BasisStrategy::RandomZX ? "random_zx"
                                   : ir->basis_strategy == BasisStrategy::AlwaysZ ? "always_z"
                                                                                   : "always_x";
    } else if (const auto* p = std::get_if<UnitaryProbe>(&cfg.channel.attack)) {
        auto vec = [](const AncillaVector& v) {
            json a = json::array();
            for (const auto& z : v)
                a.push_back(detail::amplitude_to_json(z));
            return a;
        };
        attack["probe"] = {
            {"alpha", detail::amplitude_to_json(p->iso.alpha)},     {"beta", detail::amplitude_to_json(p->iso.beta)},
            {"beta_p", detail::amplitude_to_json(p->iso.beta_p)},   {"alpha_p", detail::amplitude_to_json(p->iso.alpha_p)},
            {"eps00", vec(p->iso.eps00)}, {"eps01", vec(p->iso.eps01)}, {"eps10", vec(p->iso.eps10)},
            {"eps11", vec(p->iso.eps11)},
        };
    } else if (const auto* c = std::get_if<CaptureFraction>(&cfg.channel.attack)) {
        attack["capture_prob"] = c->capture_prob;
    }

    json out = {
        {"schema_version", kSchemaVersion},
        {"session", session},
        {"channel",
         {{"loss_prob", cfg.channel.loss_prob}, {"eve_lossless_forwarding", cfg.channel.eve_lossless_forwarding}}},
        {"attack", attack},
        {"n_sessions", cfg.n_sessions},
    };
    return out;
}

// ---------------------------------------------------------------------------
// Overrides

/// Parses the right-hand side of --key=value: JSON when it parses as JSON,
/// otherwise a plain string.
inline json parse_override_value(const std::string& text)
{
    json v = json::parse(text, nullptr, false);
    if (v.is_discarded())
        return text;
    return v;
}

/// Sets a dotted path such as "attack.probe.beta_sq", creating objects on the way.
inline void apply_override(json& doc, const std::string& dotted_key, const json& value)
{
    if (dotted_key.empty())
        throw error(errc::config_invalid, "empty override key");
    json* node = &doc;
    std::size_t start = 0;
    while (true) {
        const std::size_t dot = dotted_key.find('.', start);
        const std::string part = dotted_key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty())
            throw error(errc::config_invalid, "malformed override key '" + dotted_key + "'");
        if (!node->is_object())
            *node = json::object();
        if (dot == std::string::npos) {
            (*node)[part] = value;
            return;
        }
        node = &(*node)[part];
        start = dot + 1;
    }
}

// ---------------------------------------------------------------------------
// Analytic predictions

struct AnalyticPredictions {
    double z_error = 0.0;
    double x_error = 0.0;
    double expected_detection = 0.0; // per checked decoy, over the configured decoy mix
    double expected_abort_probability = 0.0;
};

/// P(abort) when each of `n_decoys` decoys is checked with probability
/// `keep` and errs independently with probability `p`; mirrors the session
/// rule (abort iff errors/checked > threshold, or nothing was checked).
inline double abort_probability(std::size_t n_decoys, double keep, double p, double threshold)
{
    auto log_binom_pmf = [](std::size_t n, std::size_t k, double q) {
        if (q <= 0.0)
            return k == 0 ? 0.0 : -INFINITY;
        if (q >= 1.0)
            return k == n ? 0.0 : -INFINITY;
        return std::lgamma(double(n) + 1) - std::lgamma(double(k) + 1) - std::lgamma(double(n - k) + 1)
               + double(k) * std::log(q) + double(n - k) * std::log1p(-q);
    };
    double total = 0.0;
    for (std::size_t m = 0; m <= n_decoys; ++m) {
        const double pm = std::exp(log_binom_pmf(n_decoys, m, keep));
        if (pm == 0.0)
            continue;
        if (m == 0) {
            total += pm;
            continue;
        }
        double abort_given_m = 0.0;
        for (std::size_t k = 0; k <= m; ++k)
            if (static_cast<double>(k) / static_cast<double>(m) > threshold)
                abort_given_m += std::exp(log_binom_pmf(m, k, p));
        total += pm * std::min(1.0, abort_given_m);
    }
    return std::min(1.0, total);
}

inline AnalyticPredictions analytic_predictions(const RunConfig& cfg)
{
    AnalyticPredictions a;
    double capture = 0.0;
    std::visit(
        [&](const auto& m) {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, InterceptResend>) {
                switch (m.basis_strategy) {
                case BasisStrategy::RandomZX: a.z_error = a.x_error = 0.25; break;
                case BasisStrategy::AlwaysZ: a.z_error = 0.0; a.x_error = 0.5; break;
                case BasisStrategy::AlwaysX: a.z_error = 0.5; a.x_error = 0.0; break;
                }
            } else if constexpr (std::is_same_v<M, UnitaryProbe>) {
                const auto r = probe_error_rates(m.iso);
                a.z_error = r.z_error;
                a.x_error = r.x_error;
            } else if constexpr (std::is_same_v<M, CaptureFraction>) {
                capture = m.capture_prob;
            }
        },
        cfg.channel.attack);

    switch (cfg.session.decoy_bases) {
    case DecoyBases::ZX: a.expected_detection = 0.5 * (a.z_error + a.x_error); break;
    case DecoyBases::Z: a.expected_detection = a.z_error; break;
    case DecoyBases::X: a.expected_detection = a.x_error; break;
    }
    const double keep = (1.0 - capture) * (1.0 - cfg.channel.loss_prob);
    a.expected_abort_probability
        = abort_probability(cfg.session.n_decoys, keep, a.expected_detection, cfg.session.error_threshold);
    return a;
}

// ---------------------------------------------------------------------------
// Batches

struct SessionSummary {
    bool aborted = false;
    AbortReason abort_reason = AbortReason::none;
    double decoy_error_rate = 0.0;
    DecoyTally tally;
    std::size_t n_pairs = 0;
    std::size_t bits_delivered = 0;
    std::size_t bit_errors = 0;
};

struct AggregateReport {
    std::size_t n_sessions = 0;
    std::size_t aborted_sessions = 0;
    std::size_t sessions_without_decoy_check = 0;
    double abort_rate = 0.0;
    double mean_decoy_error_rate = 0.0;
    DecoyTally decoy_tally;
    double z_decoy_error_rate = 0.0;
    double x_decoy_error_rate = 0.0;
    std::size_t bits_delivered = 0;
    std::size_t bit_errors = 0;
    double message_bit_error_rate = 0.0;
    double delivered_fraction = 0.0;
    AnalyticPredictions analytic;
    std::uint64_t rng_seed = 0;
    json config;
};

/// Pair amplitudes for a random-pair session: a = cos t, b = e^{i phi} sin t.
inline PairParams random_pair_params(Rng& rng)
{
    const double t = rng.uniform() * M_PI / 2.0;
    const double phi = rng.uniform() * 2.0 * M_PI;
    return {Amplitude(std::cos(t), 0.0), std::polar(std::sin(t), phi)};
}

/// Runs session `index` of a batch with its own derived stream.
inline SessionSummary run_indexed_session(const RunConfig& cfg, std::size_t index)
{
    SessionConfig s = cfg.session;
    s.rng_seed = Rng::derive_seed(cfg.session.rng_seed, index, 0);
    if (cfg.pair_mode == PairMode::random) {
        Rng pair_rng = Rng::derive(cfg.session.rng_seed, index, 1);
        s.pair_params = random_pair_params(pair_rng);
    }
    const SessionReport r = run_session(s, cfg.channel);
    SessionSummary out;
    out.aborted = r.aborted;
    out.abort_reason = r.abort_reason;
    out.decoy_error_rate = r.decoy_error_rate;
    out.tally = r.decoy_tally;
    out.n_pairs = s.n_pairs;
    out.bits_delivered = r.bits_delivered();
    out.bit_errors = r.bit_errors();
    return out;
}

/// Deterministic reduction in session-index order.
inline AggregateReport aggregate(const RunConfig& cfg, const std::vector<SessionSummary>& sessions)
{
    AggregateReport a;
    a.n_sessions = sessions.size();
    a.rng_seed = cfg.session.rng_seed;
    a.config = config_to_json(cfg);
    a.analytic = analytic_predictions(cfg);

    double rate_sum = 0.0;
    std::size_t rate_count = 0;
    std::size_t pairs_in_completed = 0;
    for (const auto& s : sessions) {
        a.aborted_sessions += s.aborted;
        a.decoy_tally.z_checked += s.tally.z_checked;
        a.decoy_tally.z_errors += s.tally.z_errors;
        a.decoy_tally.x_checked += s.tally.x_checked;
        a.decoy_tally.x_errors += s.tally.x_errors;
        if (s.tally.checked() > 0) {
            rate_sum += s.decoy_error_rate;
            ++rate_count;
        } else {
            ++a.sessions_without_decoy_check;
        }
        if (!s.aborted) {
            a.bits_delivered += s.bits_delivered;
            a.bit_errors += s.bit_errors;
            pairs_in_completed += s.n_pairs;
        }
    }
    auto ratio = [](std::size_t num, std::size_t den) { return den ? double(num) / double(den) : 0.0; };
    a.abort_rate = ratio(a.aborted_sessions, a.n_sessions);
    a.mean_decoy_error_rate = rate_count ? rate_sum / double(rate_count) : 0.0;
    a.z_decoy_error_rate = ratio(a.decoy_tally.z_errors, a.decoy_tally.z_checked);
    a.x_decoy_error_rate = ratio(a.decoy_tally.x_errors, a.decoy_tally.x_checked);
    a.message_bit_error_rate = ratio(a.bit_errors, a.bits_delivered);
    a.delivered_fraction = ratio(a.bits_delivered, pairs_in_completed);
    return a;
}

inline std::string utc_timestamp()
{
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

inline json to_json(const AggregateReport& a, bool with_timestamp = true)
{
    json j = {
        {"schema_version", kSchemaVersion},
        {"kind", "run"},
        {"rng", {{"algorithm", Rng::algorithm_name}, {"seed", a.rng_seed}}},
        {"config", a.config},
        {"n_sessions", a.n_sessions},
        {"aborted_sessions", a.aborted_sessions},
        {"sessions_without_decoy_check", a.sessions_without_decoy_check},
        {"abort_rate", a.abort_rate},
        {"mean_decoy_error_rate", a.mean_decoy_error_rate},
        {"decoys",
         {{"z_checked", a.decoy_tally.z_checked},
          {"z_errors", a.decoy_tally.z_errors},
          {"x_checked", a.decoy_tally.x_checked},
          {"x_errors", a.decoy_tally.x_errors}}},
        {"z_decoy_error_rate", a.z_decoy_error_rate},
        {"x_decoy_error_rate", a.x_decoy_error_rate},
        {"bits_delivered", a.bits_delivered},
        {"bit_errors", a.bit_errors},
        {"message_bit_error_rate", a.message_bit_error_rate},
        {"delivered_fraction", a.delivered_fraction},
        {"analytic_predictions",
         {{"z_error", a.analytic.z_error},
          {"x_error", a.analytic.x_error},
          {"expected_detection", a.analytic.expected_detection},
          {"expected_abort_probability", a.analytic.expected_abort_probability}}},
    };
    if (with_timestamp)
        j["created_at"] = utc_timestamp();
    return j;
}

/// Report path resolution: explicit path, else kDefaultReportName; relative
/// paths are placed under $QSDC_REPORT_DIR when it is set.
inline std::filesystem::path resolve_report_path(const std::string& path)
{
    std::filesystem::path p = path.empty() ? std::filesystem::path(kDefaultReportName) : std::filesystem::path(path);
    if (p.is_relative()) {
        if (const char* dir = std::getenv(kReportDirEnv); dir && *dir)
            p = std::filesystem::path(dir) / p;
    }
    return p;
}

inline void write_report(const json& report, const std::filesystem::path& path)
{
    std::error_code ec;
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw error(errc::io_error, "cannot open " + path.string() + " for writing");
    out << report.dump(2) << '\n';
    if (!out)
        throw error(errc::io_error, "failed writing " + path.string());
}

/// Runs every session of the batch, optionally in parallel. Results are
/// indexed by session and reduced in order, so the thread count never
/// changes the outcome.
inline AggregateReport run_batch_in_memory(const RunConfig& cfg)
{
    validate_session_config(cfg.session);
    validate_channel(cfg.channel);
    if (cfg.n_sessions < 1)
        throw error(errc::config_invalid, "n_sessions must be >= 1");

    std::vector<SessionSummary> results(cfg.n_sessions);
    std::size_t threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, cfg.n_sessions);

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < cfg.n_sessions; i = next++) {
            try {
                results[i] = run_indexed_session(cfg, i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
                next = cfg.n_sessions;
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t)
            pool.emplace_back(worker);
    }
    if (failure)
        std::rethrow_exception(failure);
    return aggregate(cfg, results);
}

/// run_batch_in_memory, then writes the report when cfg.report_path is set.
inline AggregateReport run_batch(const RunConfig& cfg)
{
    AggregateReport report = run_batch_in_memory(cfg);
    if (!cfg.report_path.empty())
        write_report(to_json(report), resolve_report_path(cfg.report_path));
    return report;
}

// ---------------------------------------------------------------------------
// Sweeps

struct SweepAxis {
    std::string key; // dotted config path
    std::vector<json> values;
};

struct SweepPoint {
    json overrides; // {dotted key: value}
    AggregateReport report;
};

/// Reads doc["sweep"]["axes"], an object of dotted key -> array of values.
inline std::vector<SweepAxis> parse_sweep_axes(const json& doc)
{
    detail::Diagnostics diag;
    std::vector<SweepAxis> axes;
    if (!doc.contains("sweep") || !doc["sweep"].is_object() || !doc["sweep"].contains("axes")
        || !doc["sweep"]["axes"].is_object()) {
        diag.add("sweep.axes", "required object of dotted key -> array of values");
        diag.raise();
    }
    detail::reject_unknown(doc["sweep"], "sweep", {"axes"}, diag);
    for (const auto& [key, values] : doc["sweep"]["axes"].items()) {
        if (!values.is_array() || values.empty()) {
            diag.add("sweep.axes." + key, "expected a non-empty array");
            continue;
        }
        axes.push_back({key, std::vector<json>(values.begin(), values.end())});
    }
    if (axes.empty())
        diag.add("sweep.axes", "needs at least one axis");
    if (!diag.empty())
        diag.raise();
    return axes;
}

/// One batch per point of the Cartesian product of `axes` applied to `base`.
/// The first axis varies slowest.
inline std::vector<SweepPoint> sweep(const json& base, const std::vector<SweepAxis>& axes)
{
    std::vector<SweepPoint> points;
    std::vector<std::size_t> cursor(axes.size(), 0);
    while (true) {
        json doc = base;
        doc.erase("sweep");
        json overrides = json::object();
        for (std::size_t k = 0; k < axes.size(); ++k) {
            apply_override(doc, axes[k].key, axes[k].values[cursor[k]]);
            overrides[axes[k].key] = axes[k].values[cursor[k]];
        }
        RunConfig cfg = parse_run_config(doc);
        points.push_back({overrides, run_batch_in_memory(cfg)});

        std::size_t k = axes.size();
        while (k > 0) {
            --k;
            if (++cursor[k] < axes[k].values.size())
                break;
            cursor[k] = 0;
            if (k == 0)
                return points;
        }
        if (axes.empty())
            return points;
    }
}

inline json sweep_to_json(const std::vector<SweepPoint>& points, bool with_timestamp = true)
{
    json arr = json::array();
    for (const auto& p : points)
        arr.push_back({{"overrides", p.overrides}, {"report", to_json(p.report, false)}});
    json j = {{"schema_version", kSchemaVersion}, {"kind", "sweep"}, {"points", arr}};
    if (with_timestamp)
        j["created_at"] = utc_timestamp();
    return j;
}

/// Plain-text table: one row per point, observed rates next to predictions.
inline std::string summary_table(const std::vector<SweepPoint>& points)
{
    std::ostringstream os;
    os << std::fixed << std::setprecision(4);
    if (points.empty())
        return "";
    for (const auto& [key, _] : points.front().overrides.items())
        os << std::setw(24) << key << ' ';
    os << std::setw(8) << "abort" << ' ' << std::setw(8) << "z_err" << ' ' << std::setw(8) << "z_pred" << ' '
       << std::setw(8) << "x_err" << ' ' << std::setw(8) << "x_pred" << ' ' << std::setw(8) << "ber" << ' '
       << std::setw(9) << "delivered" << '\n';
    for (const auto& p : points) {
        for (const auto& [_, v] : p.overrides.items())
            os << std::setw(24) << v.dump() << ' ';
        const auto& r = p.report;
        os << std::setw(8) << r.abort_rate << ' ' << std::setw(8) << r.z_decoy_error_rate << ' ' << std::setw(8)
           << r.analytic.z_error << ' ' << std::setw(8) << r.x_decoy_error_rate << ' ' << std::setw(8)
           << r.analytic.x_error << ' ' << std::setw(8) << r.message_bit_error_rate << ' ' << std::setw(9)
           << r.delivered_fraction << '\n';
    }
    return os.str();
}

/// Reads and parses a JSON config file; io_error if unreadable,
/// config_invalid if it is not JSON.
inline json load_config_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw error(errc::io_error, "cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    json doc = json::parse(buf.str(), nullptr, false);
    if (doc.is_discarded())
        throw error(errc::config_invalid, path.string() + " is not valid JSON");
    return doc;
}

} // namespace qsdc::harness
