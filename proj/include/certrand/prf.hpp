#pragma once

#include <openssl/evp.h>
#include <openssl/sha.h>

#include <cstring>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "certrand/common.hpp"

namespace certrand::netcli {

/// Keyed pseudorandom stream: (key, label, counter) -> 64-byte block.
///
/// The block function is ChaCha20 under a label-separated subkey
/// subkey = SHA-256(key || 0x01 || label); the 64-bit counter is placed
/// big-endian in the nonce so every (label, counter) pair selects a
/// distinct keystream block. Pure and replayable by construction.
class PrfStream {
public:
    static constexpr std::size_t kBlockSize = 64;
    using Block = std::array<std::uint8_t, kBlockSize>;

    PrfStream(const Key256& key, const std::string& label) : label_(label), counter_(0) {
        // subkey = SHA-256(key || 0x01 || label) gives label-domain separation.
        std::vector<std::uint8_t> material(key.begin(), key.end());
        material.push_back(0x01);
        material.insert(material.end(), label.begin(), label.end());
        unsigned int out_len = 0;
        if (!EVP_Digest(material.data(), material.size(), subkey_.data(), &out_len, EVP_sha256(),
                        nullptr) ||
            out_len != subkey_.size())
            throw std::runtime_error("subkey derivation failed");
    }

    const std::string& label() const { return label_; }
    std::uint64_t counter() const { return counter_; }

    /// Block at an explicit counter; does not advance the stream position.
    Block block_at(std::uint64_t counter) const {
        Block out{};
        std::uint8_t iv[16] = {0};  // 32-bit block counter || 96-bit nonce
        for (int i = 0; i < 8; ++i)
            iv[8 + i] = static_cast<std::uint8_t>(counter >> (56 - 8 * i));
        static const std::uint8_t zeros[kBlockSize] = {0};

        EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
        if (!ctx) throw std::runtime_error("EVP_CIPHER_CTX_new failed");
        int len = 0;
        int ok = EVP_EncryptInit_ex(ctx, EVP_chacha20(), nullptr, subkey_.data(), iv) &&
                 EVP_EncryptUpdate(ctx, out.data(), &len, zeros, kBlockSize);
        EVP_CIPHER_CTX_free(ctx);
        if (!ok || len != static_cast<int>(kBlockSize))
            throw std::runtime_error("ChaCha20 block generation failed");
        return out;
    }

    /// Next block in sequence; throws once the 64-bit counter would wrap.
    Block next_block() {
        if (counter_ == std::numeric_limits<std::uint64_t>::max())
            throw std::overflow_error("PrfStream counter exhausted");
        return block_at(counter_++);
    }

private:
    Key256 subkey_{};
    std::string label_;
    std::uint64_t counter_;
};

inline Key256 sha256(const void* data, std::size_t len) {
    Key256 out{};
    unsigned int out_len = 0;
    if (!EVP_Digest(data, len, out.data(), &out_len, EVP_sha256(), nullptr) || out_len != out.size())
        throw std::runtime_error("sha256 failed");
    return out;
}

inline Key256 sha256(const std::string& s) { return sha256(s.data(), s.size()); }

}  // namespace certrand::netcli
