#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "certrand/rng.hpp"
#include "certrand/simcore.hpp"
#include "certrand/statlab.hpp"
#include "json.hpp"

namespace certrand::devices {

enum class Kind { Honest, Uniform, TopK, Postselect, Repeater, Mixed };

inline std::string kind_name(Kind k) {
    switch (k) {
        case Kind::Honest: return "honest";
        case Kind::Uniform: return "uniform";
        case Kind::TopK: return "topk";
        case Kind::Postselect: return "postselect";
        case Kind::Repeater: return "repeater";
        case Kind::Mixed: return "mixed";
    }
    throw std::logic_error("kind_name: bad kind");
}

inline Kind kind_from_name(const std::string& s) {
    if (s == "honest") return Kind::Honest;
    if (s == "uniform") return Kind::Uniform;
    if (s == "topk") return Kind::TopK;
    if (s == "postselect") return Kind::Postselect;
    if (s == "repeater") return Kind::Repeater;
    if (s == "mixed") return Kind::Mixed;
    throw std::invalid_argument("unknown device kind: " + s);
}

struct DeviceModel {
    Kind kind = Kind::Honest;
    Key256 seed{};           // device-local randomness, independent of the verifier key
    std::size_t top_k = 1;   // topk: size of the heavy set
    int zero_prefix = 1;     // postselect: required leading zero bits
    std::uint64_t retry_budget = 64;  // postselect: resampling attempts per output
    double mix = 0.0;        // mixed: per-sample probability of a uniform draw
};

inline void to_json(nlohmann::json& j, const DeviceModel& m) {
    j = nlohmann::json{{"kind", kind_name(m.kind)},  {"seed", to_hex(m.seed.data(), m.seed.size())},
                       {"top_k", m.top_k},           {"zero_prefix", m.zero_prefix},
                       {"retry_budget", m.retry_budget}, {"mix", m.mix}};
}

inline void from_json(const nlohmann::json& j, DeviceModel& m) {
    m.kind = kind_from_name(j.at("kind").get<std::string>());
    m.seed = key_from_hex(j.value("seed", std::string(64, '0')));
    m.top_k = j.value("top_k", std::size_t{1});
    m.zero_prefix = j.value("zero_prefix", 1);
    m.retry_budget = j.value("retry_budget", std::uint64_t{64});
    m.mix = j.value("mix", 0.0);
    if (m.mix < 0.0 || m.mix > 1.0) throw std::invalid_argument("DeviceModel: mix outside [0,1]");
    if (m.zero_prefix < 0) throw std::invalid_argument("DeviceModel: negative zero_prefix");
}

/// Local device simulator. Adversarial kinds know the exact output
/// distribution of each circuit, which is the strongest cheating model the
/// simulator supports.
class Device {
public:
    explicit Device(DeviceModel model) : model_(model), rng_(model.seed, "device") {}

    const DeviceModel& model() const { return model_; }

    /// Called when the verifier issues a fresh circuit for a new epoch.
    void begin_epoch(const simcore::Circuit& circuit) {
        dist_ = simcore::output_distribution(circuit);
        n_ = circuit.n;
        sampler_.emplace(dist_.probabilities);
        epoch_replay_.reset();
        ++epoch_;
    }

    /// k samples for the current circuit.
    std::vector<std::uint64_t> respond(std::size_t k) {
        if (!sampler_) throw std::logic_error("Device: respond before begin_epoch");
        std::vector<std::uint64_t> out(k);
        switch (model_.kind) {
            case Kind::Honest:
                for (auto& z : out) z = draw_honest();
                break;
            case Kind::Uniform:
                for (auto& z : out) z = rng_.uniform_below(dist_.size());
                break;
            case Kind::TopK: {
                // Deterministically cycle the top_k most likely outcomes,
                // ties broken toward the smaller index.
                auto heavy = heavy_set();
                for (std::size_t i = 0; i < k; ++i) out[i] = heavy[(serial_ + i) % heavy.size()];
                serial_ += k;
                break;
            }
            case Kind::Postselect:
                for (auto& z : out) z = draw_postselect();
                break;
            case Kind::Repeater: {
                // Honest on the first request of an epoch, then replays it.
                if (!epoch_replay_) {
                    std::vector<std::uint64_t> fresh(k);
                    for (auto& z : fresh) z = draw_honest();
                    epoch_replay_ = std::move(fresh);
                }
                for (std::size_t i = 0; i < k; ++i) out[i] = (*epoch_replay_)[i % epoch_replay_->size()];
                break;
            }
            case Kind::Mixed:
                for (auto& z : out)
                    z = rng_.bernoulli(model_.mix) ? rng_.uniform_below(dist_.size()) : draw_honest();
                break;
        }
        return out;
    }

private:
    std::uint64_t draw_honest() { return (*sampler_)(rng_); }

    std::uint64_t draw_postselect() {
        // Keeps honest samples whose leading zero_prefix bits are zero,
        // falling back to the last honest draw when the budget runs out.
        const int shift = n_ - std::min(model_.zero_prefix, n_);
        std::uint64_t z = 0;
        for (std::uint64_t attempt = 0; attempt <= model_.retry_budget; ++attempt) {
            z = draw_honest();
            if ((z >> shift) == 0) return z;
        }
        return z;
    }

    std::vector<std::uint64_t> heavy_set() const {
        std::vector<std::uint64_t> idx(dist_.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::size_t k = std::min(model_.top_k, dist_.size());
        std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                          [&](std::uint64_t a, std::uint64_t b) {
                              if (dist_.probabilities[a] != dist_.probabilities[b])
                                  return dist_.probabilities[a] > dist_.probabilities[b];
                              return a < b;
                          });
        idx.resize(k);
        return idx;
    }

    DeviceModel model_;
    RngStream rng_;
    simcore::OutputDistribution dist_;
    int n_ = 0;
    std::optional<statlab::AliasSampler> sampler_;
    std::optional<std::vector<std::uint64_t>> epoch_replay_;
    std::uint64_t serial_ = 0;
    std::uint64_t epoch_ = 0;
};

// ---------------------------------------------------------------------------
// Simplified guessing game

struct SimplifiedGameReport {
    std::size_t n = 0;               // support size N
    std::size_t k = 0;               // samples shown per game
    std::size_t num_p = 0;           // distributions drawn
    std::size_t games_per_p = 0;
    double fraction_within_bound = 0.0;  // fraction of P satisfying the entropy floor
    bool pass = false;
};

/// Adversary policy for the simplified game: sees the distribution P and the
/// k samples, must output a string; it wins if the output is one of the
/// samples. The verifier accepts iff the output is in the sample list, so a
/// winning adversary's output entropy is bounded below via H_min(P).
using GamePolicy = std::function<std::uint64_t(
    const statlab::Dist&, const std::vector<std::uint64_t>&, RngStream&)>;

inline SimplifiedGameReport run_simplified_game(const GamePolicy& policy, std::size_t n,
                                                std::size_t k, std::size_t num_p,
                                                std::size_t games_per_p, RngStream& rng) {
    if (k < 1 || n < 2) throw std::invalid_argument("run_simplified_game: need N >= 2, k >= 1");
    SimplifiedGameReport rep;
    rep.n = n;
    rep.k = k;
    rep.num_p = num_p;
    rep.games_per_p = games_per_p;
    std::size_t within = 0;
    for (std::size_t pi = 0; pi < num_p; ++pi) {
        statlab::Dist p = statlab::sample_dirichlet(n, rng);
        statlab::AliasSampler sampler(p.probabilities);
        std::vector<double> counts(n, 0.0);
        std::size_t accepted = 0;
        for (std::size_t g = 0; g < games_per_p; ++g) {
            std::vector<std::uint64_t> samples(k);
            for (auto& z : samples) z = sampler(rng);
            std::uint64_t out = policy(p, samples, rng);
            if (std::find(samples.begin(), samples.end(), out) != samples.end()) {
                counts[out] += 1.0;
                ++accepted;
            }
        }
        if (accepted == 0) continue;  // trivially fine: no accepted output to leak
        for (double& c : counts) c /= static_cast<double>(accepted);
        double h_emp = statlab::shannon_bits(counts);
        double floor = std::max(0.0, -std::log2(p.max()) - 2.0 * std::log2(static_cast<double>(k)) - 2.0);
        if (h_emp >= floor) ++within;
    }
    rep.fraction_within_bound = static_cast<double>(within) / static_cast<double>(num_p);
    rep.pass = rep.fraction_within_bound >= 0.95;
    return rep;
}

}  // namespace certrand::devices
