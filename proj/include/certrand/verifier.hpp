#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "certrand/devices.hpp"
#include "certrand/rng.hpp"
#include "certrand/simcore.hpp"
#include "json.hpp"

namespace certrand::verifier {

enum class ProtocolKind { Llha, Ideal, Full };

inline std::string protocol_name(ProtocolKind k) {
    switch (k) {
        case ProtocolKind::Llha: return "llha";
        case ProtocolKind::Ideal: return "ideal";
        case ProtocolKind::Full: return "full";
    }
    throw std::logic_error("protocol_name: bad kind");
}

inline ProtocolKind protocol_from_name(const std::string& s) {
    if (s == "llha") return ProtocolKind::Llha;
    if (s == "ideal") return ProtocolKind::Ideal;
    if (s == "full") return ProtocolKind::Full;
    throw std::invalid_argument("unknown protocol kind: " + s);
}

struct ProtocolConfig {
    ProtocolKind kind = ProtocolKind::Full;
    int n = 10;
    std::size_t m = 60;              // rounds
    std::size_t k = 1;               // samples per response (1 for ideal/full)
    double b = 1.5;                  // llha threshold; score >= b/N
    double delta = 0.5;              // ideal/full threshold; score >= (1+delta)/N
    double gamma = 0.1;              // circuit-refresh rate
    double eta = 1.0;                // test-round rate (full only)
    double epoch_pass_fraction = 0.99;
    Key256 master_key{};
    simcore::Ensemble ensemble = simcore::Ensemble::HaarColumn;
    int depth = 0;                   // brickwork only
    double smoothing_eps = 0x1p-32;
    double completeness_floor = 0.9;  // a-priori lower bound on Pr[accept]
    bool strict_duplicates = true;    // llha: any shared string vs identical batches only

    void validate() const {
        simcore::validate_circuit(simcore::Circuit{ensemble, n, {}, depth});
        if (m < 1) throw std::invalid_argument("ProtocolConfig: m >= 1 required");
        if (k < 1) throw std::invalid_argument("ProtocolConfig: k >= 1 required");
        if (kind != ProtocolKind::Llha && k != 1)
            throw std::invalid_argument("ProtocolConfig: k = 1 for ideal/full");
        if (kind == ProtocolKind::Llha && (b <= 1.0 || b > 2.0))
            throw std::invalid_argument("ProtocolConfig: b in (1, 2] required");
        if (gamma <= 0.0 || gamma > 1.0) throw std::invalid_argument("ProtocolConfig: gamma in (0,1]");
        if (eta <= 0.0 || eta > 1.0) throw std::invalid_argument("ProtocolConfig: eta in (0,1]");
        if (epoch_pass_fraction <= 0.0 || epoch_pass_fraction > 1.0)
            throw std::invalid_argument("ProtocolConfig: pass fraction in (0,1]");
        if (smoothing_eps <= 0.0 || smoothing_eps >= 1.0)
            throw std::invalid_argument("ProtocolConfig: smoothing eps in (0,1)");
        if (completeness_floor <= 0.0 || completeness_floor >= 1.0)
            throw std::invalid_argument("ProtocolConfig: completeness floor in (0,1)");
    }
};

inline void to_json(nlohmann::json& j, const ProtocolConfig& c) {
    j = nlohmann::json{{"kind", protocol_name(c.kind)},
                       {"n", c.n},
                       {"m", c.m},
                       {"k", c.k},
                       {"b", c.b},
                       {"delta", c.delta},
                       {"gamma", c.gamma},
                       {"eta", c.eta},
                       {"epoch_pass_fraction", c.epoch_pass_fraction},
                       {"master_key", to_hex(c.master_key.data(), c.master_key.size())},
                       {"ensemble", simcore::ensemble_name(c.ensemble)},
                       {"depth", c.depth},
                       {"smoothing_eps", c.smoothing_eps},
                       {"completeness_floor", c.completeness_floor},
                       {"strict_duplicates", c.strict_duplicates}};
}

inline void from_json(const nlohmann::json& j, ProtocolConfig& c) {
    c.kind = protocol_from_name(j.at("kind").get<std::string>());
    c.n = j.at("n").get<int>();
    c.m = j.at("m").get<std::size_t>();
    c.k = j.value("k", std::size_t{1});
    c.b = j.value("b", 1.5);
    c.delta = j.value("delta", 0.5);
    c.gamma = j.value("gamma", 0.1);
    c.eta = j.value("eta", 1.0);
    c.epoch_pass_fraction = j.value("epoch_pass_fraction", 0.99);
    c.master_key = key_from_hex(j.at("master_key").get<std::string>());
    c.ensemble = simcore::ensemble_from_name(j.value("ensemble", std::string("haar-column")));
    c.depth = j.value("depth", 0);
    c.smoothing_eps = j.value("smoothing_eps", 0x1p-32);
    c.completeness_floor = j.value("completeness_floor", 0.9);
    c.strict_duplicates = j.value("strict_duplicates", true);
    c.validate();
}

enum class Decision { Accept, Abort, ProtocolError };

inline std::string decision_name(Decision d) {
    switch (d) {
        case Decision::Accept: return "accept";
        case Decision::Abort: return "abort";
        case Decision::ProtocolError: return "protocol-error";
    }
    throw std::logic_error("decision_name: bad decision");
}

inline Decision decision_from_name(const std::string& s) {
    if (s == "accept") return Decision::Accept;
    if (s == "abort") return Decision::Abort;
    if (s == "protocol-error") return Decision::ProtocolError;
    throw std::invalid_argument("unknown decision: " + s);
}

struct RoundRecord {
    std::size_t round = 0;
    std::size_t epoch = 0;
    bool fresh_circuit = false;      // T_i
    bool test = true;                // F_i (always true outside the full protocol)
    std::vector<std::uint64_t> response;
    double raw_score = 0.0;          // mean p_C(z_i) over the response; 0 on non-test rounds
    bool pass = true;                // W_i for llha; threshold bit otherwise
};

inline void to_json(nlohmann::json& j, const RoundRecord& r) {
    j = nlohmann::json{{"round", r.round},   {"epoch", r.epoch}, {"fresh", r.fresh_circuit},
                       {"test", r.test},     {"response", r.response},
                       {"score", r.raw_score}, {"pass", r.pass}};
}

inline void from_json(const nlohmann::json& j, RoundRecord& r) {
    r.round = j.at("round").get<std::size_t>();
    r.epoch = j.at("epoch").get<std::size_t>();
    r.fresh_circuit = j.at("fresh").get<bool>();
    r.test = j.at("test").get<bool>();
    r.response = j.at("response").get<std::vector<std::uint64_t>>();
    r.raw_score = j.at("score").get<double>();
    r.pass = j.at("pass").get<bool>();
}

struct EpochSummary {
    std::size_t epoch = 0;
    std::size_t test_rounds = 0;
    double score = 0.0;  // s_j: mean raw score over the epoch's test rounds
    bool pass = false;
};

inline void to_json(nlohmann::json& j, const EpochSummary& e) {
    j = nlohmann::json{
        {"epoch", e.epoch}, {"test_rounds", e.test_rounds}, {"score", e.score}, {"pass", e.pass}};
}

inline void from_json(const nlohmann::json& j, EpochSummary& e) {
    e.epoch = j.at("epoch").get<std::size_t>();
    e.test_rounds = j.at("test_rounds").get<std::size_t>();
    e.score = j.at("score").get<double>();
    e.pass = j.at("pass").get<bool>();
}

struct Transcript {
    ProtocolConfig config;
    std::vector<RoundRecord> rounds;
    std::vector<EpochSummary> epochs;
    Decision decision = Decision::Abort;
    double statistic = 0.0;  // W pass count (llha), s (ideal), epoch pass fraction (full)
    std::string error;       // populated for protocol-error decisions
};

// ---------------------------------------------------------------------------
// Scoring

/// Raw LXEB statistic (1/k) sum_i p(z_i), accumulated pairwise.
inline double lxeb_score(const simcore::OutputDistribution& p,
                         const std::vector<std::uint64_t>& samples) {
    if (samples.empty()) throw std::invalid_argument("lxeb_score: empty sample list");
    std::vector<double> vals(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i] >= p.size()) throw std::out_of_range("lxeb_score: sample out of range");
        vals[i] = p.probabilities[samples[i]];
    }
    return pairwise_sum(vals) / static_cast<double>(samples.size());
}

inline double lxeb_score_normalized(const simcore::OutputDistribution& p,
                                    const std::vector<std::uint64_t>& samples) {
    return lxeb_score(p, samples) * static_cast<double>(p.size());
}

inline bool lxeb_check(const simcore::OutputDistribution& p,
                       const std::vector<std::uint64_t>& samples, double b) {
    return lxeb_score(p, samples) >= b / static_cast<double>(p.size());
}

/// Epoch anti-replay check. Strict mode fails on any string shared between
/// two responses of the epoch or repeated within a single response; the
/// relaxed mode only rejects byte-identical batches.
inline bool duplicate_check(const std::vector<std::vector<std::uint64_t>>& responses, bool strict = true) {
    if (strict) {
        std::set<std::uint64_t> seen;
        for (const auto& batch : responses)
            for (auto z : batch)
                if (!seen.insert(z).second) return false;
        return true;
    }
    for (std::size_t i = 0; i < responses.size(); ++i)
        for (std::size_t j = i + 1; j < responses.size(); ++j)
            if (responses[i] == responses[j]) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Protocol engines

/// Abstraction over local simulated devices and remote wire-connected ones.
class DeviceHandle {
public:
    virtual ~DeviceHandle() = default;
    virtual void begin_epoch(const simcore::Circuit& circuit) = 0;
    virtual std::vector<std::uint64_t> respond(std::size_t k) = 0;
};

class LocalDevice final : public DeviceHandle {
public:
    explicit LocalDevice(devices::DeviceModel model) : device_(model) {}
    void begin_epoch(const simcore::Circuit& c) override { device_.begin_epoch(c); }
    std::vector<std::uint64_t> respond(std::size_t k) override { return device_.respond(k); }

private:
    devices::Device device_;
};

inline Transcript run_protocol(const ProtocolConfig& config, DeviceHandle& device) {
    config.validate();
    Transcript tr;
    tr.config = config;
    RngStream flags(config.master_key, "verifier/flags");
    const auto dim = std::size_t{1} << config.n;

    simcore::OutputDistribution dist;
    std::size_t epoch = 0;
    std::uint64_t epoch_serial = 0;
    std::vector<std::vector<std::uint64_t>> epoch_responses;
    std::vector<std::vector<double>> epoch_scores;  // full: per-epoch test scores

    auto open_epoch = [&](std::size_t index) {
        simcore::Circuit c =
            simcore::derive_circuit(config.master_key, index, config.ensemble, config.n, config.depth);
        dist = simcore::output_distribution(c);
        device.begin_epoch(c);
    };

    try {
        for (std::size_t i = 0; i < config.m; ++i) {
            RoundRecord rec;
            rec.round = i;
            bool refresh = i == 0 || (config.kind != ProtocolKind::Ideal && flags.bernoulli(config.gamma));
            if (refresh) {
                open_epoch(epoch_serial);
                epoch = epoch_serial++;
                epoch_responses.clear();
                epoch_scores.emplace_back();
            }
            rec.fresh_circuit = refresh;
            rec.epoch = epoch;
            rec.test = config.kind == ProtocolKind::Full ? flags.bernoulli(config.eta) : true;

            std::vector<std::uint64_t> response = device.respond(config.k);
            if (response.size() != config.k) throw std::runtime_error("response size mismatch");
            for (auto z : response)
                if (z >= dim) throw std::runtime_error("response sample out of range");
            rec.response = response;

            if (rec.test) {
                rec.raw_score = lxeb_score(dist, response);
                if (config.kind == ProtocolKind::Llha) {
                    epoch_responses.push_back(response);
                    bool dup_ok = duplicate_check(epoch_responses, config.strict_duplicates);
                    rec.pass = dup_ok &&
                               rec.raw_score >= config.b / static_cast<double>(dim);
                } else {
                    epoch_scores.back().push_back(rec.raw_score);
                    rec.pass =
                        rec.raw_score >= (1.0 + config.delta) / static_cast<double>(dim);
                }
            }
            tr.rounds.push_back(std::move(rec));
        }
    } catch (const std::exception& e) {
        tr.decision = Decision::ProtocolError;
        tr.error = e.what();
        return tr;
    }

    // Epoch summaries and final decision.
    if (config.kind == ProtocolKind::Llha) {
        std::size_t w = 0, t = 0;
        for (const auto& rec : tr.rounds) {
            ++t;
            if (rec.pass) ++w;
        }
        tr.statistic = static_cast<double>(w);
        tr.decision = static_cast<double>(w) >= config.epoch_pass_fraction * static_cast<double>(t)
                          ? Decision::Accept
                          : Decision::Abort;
    } else if (config.kind == ProtocolKind::Ideal) {
        std::vector<double> scores;
        for (const auto& rec : tr.rounds) scores.push_back(rec.raw_score);
        double s = pairwise_sum(scores) / static_cast<double>(scores.size());
        tr.statistic = s;
        tr.decision =
            s >= (1.0 + config.delta) / static_cast<double>(dim) ? Decision::Accept : Decision::Abort;
        EpochSummary es;
        es.epoch = 0;
        es.test_rounds = scores.size();
        es.score = s;
        es.pass = tr.decision == Decision::Accept;
        tr.epochs.push_back(es);
    } else {
        std::size_t counted = 0, passed = 0;
        for (std::size_t j = 0; j < epoch_scores.size(); ++j) {
            EpochSummary es;
            es.epoch = j;
            es.test_rounds = epoch_scores[j].size();
            if (!epoch_scores[j].empty()) {
                es.score = pairwise_sum(epoch_scores[j]) / static_cast<double>(epoch_scores[j].size());
                es.pass = es.score >= (1.0 + config.delta) / static_cast<double>(dim);
                ++counted;
                if (es.pass) ++passed;
            }
            tr.epochs.push_back(es);
        }
        double frac = counted == 0 ? 0.0
                                   : static_cast<double>(passed) / static_cast<double>(counted);
        tr.statistic = frac;
        tr.decision =
            counted > 0 && frac >= config.epoch_pass_fraction ? Decision::Accept : Decision::Abort;
    }
    return tr;
}

/// Recomputes every score and the decision from the stored config and
/// responses. Returns true iff all stored values match.
struct ReplayReport {
    bool scores_match = true;
    bool decision_match = true;
    std::optional<std::size_t> first_mismatch_round;
    Decision recomputed_decision = Decision::Abort;
};

inline ReplayReport replay_decision(const Transcript& tr) {
    ReplayReport rep;
    const auto dim = std::size_t{1} << tr.config.n;
    simcore::OutputDistribution dist;
    std::size_t current_epoch = static_cast<std::size_t>(-1);
    std::vector<std::vector<std::uint64_t>> epoch_responses;
    std::map<std::size_t, std::vector<double>> epoch_scores;
    std::size_t llha_pass = 0;
    std::vector<double> ideal_scores;

    for (const auto& rec : tr.rounds) {
        if (rec.epoch != current_epoch) {
            current_epoch = rec.epoch;
            simcore::Circuit c = simcore::derive_circuit(tr.config.master_key, current_epoch,
                                                         tr.config.ensemble, tr.config.n,
                                                         tr.config.depth);
            dist = simcore::output_distribution(c);
            epoch_responses.clear();
        }
        if (!rec.test) continue;
        double score = lxeb_score(dist, rec.response);
        if (score != rec.raw_score) {
            rep.scores_match = false;
            if (!rep.first_mismatch_round) rep.first_mismatch_round = rec.round;
        }
        if (tr.config.kind == ProtocolKind::Llha) {
            epoch_responses.push_back(rec.response);
            bool ok = duplicate_check(epoch_responses, tr.config.strict_duplicates) &&
                      score >= tr.config.b / static_cast<double>(dim);
            if (ok) ++llha_pass;
        } else if (tr.config.kind == ProtocolKind::Ideal) {
            ideal_scores.push_back(score);
        } else {
            epoch_scores[rec.epoch].push_back(score);
        }
    }

    if (tr.config.kind == ProtocolKind::Llha) {
        rep.recomputed_decision =
            static_cast<double>(llha_pass) >=
                    tr.config.epoch_pass_fraction * static_cast<double>(tr.rounds.size())
                ? Decision::Accept
                : Decision::Abort;
    } else if (tr.config.kind == ProtocolKind::Ideal) {
        double s = ideal_scores.empty()
                       ? 0.0
                       : pairwise_sum(ideal_scores) / static_cast<double>(ideal_scores.size());
        rep.recomputed_decision =
            s >= (1.0 + tr.config.delta) / static_cast<double>(dim) ? Decision::Accept
                                                                    : Decision::Abort;
    } else {
        std::size_t counted = 0, passed = 0;
        for (auto& [e, scores] : epoch_scores) {
            if (scores.empty()) continue;
            ++counted;
            double s = pairwise_sum(scores) / static_cast<double>(scores.size());
            if (s >= (1.0 + tr.config.delta) / static_cast<double>(dim)) ++passed;
        }
        rep.recomputed_decision = counted > 0 && static_cast<double>(passed) >=
                                                     tr.config.epoch_pass_fraction *
                                                         static_cast<double>(counted)
                                      ? Decision::Accept
                                      : Decision::Abort;
    }
    if (tr.decision != Decision::ProtocolError)
        rep.decision_match = rep.recomputed_decision == tr.decision;
    return rep;
}

}  // namespace certrand::verifier
