#pragma once

// Reproducible random streams.
//
// Every stream is named by (domain, trial, epoch) under a master key. Its
// 64-bit seed is the first eight bytes (little-endian) of
// BLAKE2b-256(key = master key, "wmauth-rng-v1" | domain:le64 | trial:le64 |
// epoch:le64), which seeds a std::mt19937_64. Streams never share state, so
// any partition of work across threads reproduces the same numbers.

#include <array>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include <sodium.h>

#include "error.hpp"
#include "watermark.hpp"

namespace wmauth {

using Rng = std::mt19937_64;

struct StreamId {
    std::uint64_t domain = 0;
    std::uint64_t trial = 0;
    std::uint64_t epoch = 0;
};

/// Stream domains used by the campaign harness.
namespace streams {
inline constexpr std::uint64_t kNoise = 1;
inline constexpr std::uint64_t kSpoofChips = 2;
} // namespace streams

class RngFactory {
public:
    explicit RngFactory(std::vector<std::uint8_t> master_key) : key_(std::move(master_key)) {
        if (key_.size() < crypto_generichash_KEYBYTES_MIN || key_.size() > crypto_generichash_KEYBYTES_MAX)
            throw ConfigError("master seed must be 16..64 bytes");
        detail::ensure_sodium();
    }

    std::uint64_t seed_for(const StreamId& id) const {
        std::vector<std::uint8_t> msg;
        constexpr std::string_view tag = "wmauth-rng-v1";
        msg.assign(tag.begin(), tag.end());
        detail::put_le(msg, id.domain, 8);
        detail::put_le(msg, id.trial, 8);
        detail::put_le(msg, id.epoch, 8);
        std::array<std::uint8_t, 32> digest{};
        crypto_generichash(digest.data(), digest.size(), msg.data(), msg.size(), key_.data(), key_.size());
        std::uint64_t seed = 0;
        for (int i = 0; i < 8; ++i) seed |= std::uint64_t{digest[static_cast<std::size_t>(i)]} << (8 * i);
        return seed;
    }

    Rng stream(const StreamId& id) const { return Rng(seed_for(id)); }

    const std::vector<std::uint8_t>& key() const { return key_; }

private:
    std::vector<std::uint8_t> key_;
};

} // namespace wmauth
