#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include "certrand/prf.hpp"

namespace certrand {

/// Deterministic random stream backed by a PrfStream. Identical
/// (key, label) always replays the identical sequence, so every
/// Monte-Carlo result and transcript in this project is reproducible
/// bit-for-bit. Substreams are derived by extending the label, which
/// keeps parallel sweeps coordination-free.
class RngStream {
public:
    RngStream(const Key256& key, const std::string& label)
        : key_(key), prf_(key, label), pos_(netcli::PrfStream::kBlockSize) {}

    RngStream substream(const std::string& suffix) const {
        return RngStream(key_, prf_.label() + "/" + suffix);
    }
    RngStream substream(std::uint64_t index) const {
        return substream(std::to_string(index));
    }

    std::uint64_t next_u64() {
        if (pos_ + 8 > netcli::PrfStream::kBlockSize) {
            block_ = prf_.next_block();
            pos_ = 0;
        }
        std::uint64_t x = 0;
        for (int i = 0; i < 8; ++i) x = x << 8 | block_[pos_ + i];
        pos_ += 8;
        return x;
    }

    /// Uniform double in [0, 1), 53 significant bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1p-53; }

    /// Uniform double in (0, 1]; safe as a log argument.
    double uniform_open() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1p-53;
    }

    /// Uniform integer in [0, bound) by rejection; bound >= 1.
    std::uint64_t uniform_below(std::uint64_t bound) {
        if (bound == 0) throw std::invalid_argument("uniform_below(0)");
        std::uint64_t threshold = -bound % bound;  // 2^64 mod bound
        for (;;) {
            std::uint64_t x = next_u64();
            if (x >= threshold) return x % bound;
        }
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// Standard normal via Box-Muller on 64-bit uniform lanes. The exact
    /// sampling recipe is part of the reproducibility contract: transcripts
    /// are byte-identical across platforms with strict IEEE-754 doubles.
    double gaussian() {
        if (spare_) {
            double s = *spare_;
            spare_.reset();
            return s;
        }
        double u1 = uniform_open();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        return r * std::cos(theta);
    }

    /// Exponential(1) == Gamma(1,1) by inverse CDF.
    double exponential() { return -std::log(uniform_open()); }

private:
    Key256 key_;
    netcli::PrfStream prf_;
    netcli::PrfStream::Block block_{};
    std::size_t pos_;
    std::optional<double> spare_;
};

}  // namespace certrand
