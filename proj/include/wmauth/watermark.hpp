#pragma once

// Ranging codes and combinatorial watermarks.
//
// A watermark design (n, r, W) inverts exactly r of the n chips of every
// ranging code; a receiver averages W codes per authentication decision.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <mutex>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <sodium.h>

#include "error.hpp"

namespace wmauth {

using Chip = std::int8_t;

struct WatermarkParams {
    std::size_t n = 1023; ///< chips per code
    std::size_t r = 21;   ///< inverted chips per code
    std::size_t W = 1000; ///< codes per decision

    void validate() const {
        if (n == 0 || r == 0 || r >= n)
            throw ConfigError("watermark: need 0 < r < n (n=" + std::to_string(n) +
                              ", r=" + std::to_string(r) + ")");
        if (W == 0) throw ConfigError("watermark: W must be at least 1");
    }

    friend bool operator==(const WatermarkParams&, const WatermarkParams&) = default;
};

/// A sequence of +1/-1 chips.
class RangingCode {
public:
    RangingCode() = default;
    explicit RangingCode(std::vector<Chip> chips) : chips_(std::move(chips)) {
        for (Chip c : chips_)
            if (c != 1 && c != -1) throw ContractViolation("RangingCode: chips must be +1 or -1");
    }

    std::span<const Chip> chips() const { return chips_; }
    std::size_t size() const { return chips_.size(); }
    Chip operator[](std::size_t i) const { return chips_[i]; }

    friend bool operator==(const RangingCode&, const RangingCode&) = default;

private:
    std::vector<Chip> chips_;
};

/// Sorted set of distinct chip positions in [0, code_length).
class WatermarkMask {
public:
    WatermarkMask() = default;
    WatermarkMask(std::vector<std::size_t> indices, std::size_t code_length)
        : indices_(std::move(indices)), code_length_(code_length) {
        std::sort(indices_.begin(), indices_.end());
        if (std::adjacent_find(indices_.begin(), indices_.end()) != indices_.end())
            throw ContractViolation("WatermarkMask: duplicate index");
        if (!indices_.empty() && indices_.back() >= code_length_)
            throw ContractViolation("WatermarkMask: index out of range");
    }

    std::span<const std::size_t> indices() const& { return indices_; }
    std::span<const std::size_t> indices() const&& = delete; // would dangle
    std::size_t size() const { return indices_.size(); }
    std::size_t code_length() const { return code_length_; }
    bool contains(std::size_t i) const {
        return std::binary_search(indices_.begin(), indices_.end(), i);
    }

    friend bool operator==(const WatermarkMask&, const WatermarkMask&) = default;

private:
    std::vector<std::size_t> indices_;
    std::size_t code_length_ = 0;
};

/// Secret key material plus the millisecond epoch the mask applies to.
struct Seed {
    std::vector<std::uint8_t> key; ///< 16..64 bytes
    std::uint64_t epoch = 0;
};

// ---------------------------------------------------------------------------
// Base codes
//
// family 1..32: length-1023 Gold codes built like the GPS C/A codes
//   (G1 = 1 + x^3 + x^10, G2 = 1 + x^2 + x^3 + x^6 + x^8 + x^9 + x^10, with the
//   G2 output taken from the two-tap phase selector of PRN = family).
// family 0: maximal-length LFSR sequence for n = 2^m - 1, 3 <= m <= 16.
// Bit b maps to chip 1 - 2b.

namespace detail {

inline constexpr std::array<std::array<int, 2>, 32> kGoldPhaseTaps{{
    {2, 6}, {3, 7}, {4, 8}, {5, 9}, {1, 9}, {2, 10}, {1, 8}, {2, 9},
    {3, 10}, {2, 3}, {3, 4}, {5, 6}, {6, 7}, {7, 8}, {8, 9}, {9, 10},
    {1, 4}, {2, 5}, {3, 6}, {4, 7}, {5, 8}, {6, 9}, {1, 3}, {4, 6},
    {5, 7}, {6, 8}, {7, 9}, {8, 10}, {1, 6}, {2, 7}, {3, 8}, {4, 9},
}};

// Fibonacci feedback taps (1-based stage numbers) of primitive polynomials.
inline const std::vector<std::vector<int>>& lfsr_table() {
    static const std::vector<std::vector<int>> table = {
        {}, {}, {}, {3, 2}, {4, 3}, {5, 3}, {6, 5}, {7, 6}, {8, 6, 5, 4},
        {9, 5}, {10, 7}, {11, 9}, {12, 11, 10, 4}, {13, 12, 11, 8},
        {14, 13, 12, 2}, {15, 14}, {16, 15, 13, 4},
    };
    return table;
}

inline std::vector<Chip> gold_code(int prn) {
    std::array<int, 11> g1{}, g2{}; // stages 1..10
    g1.fill(1);
    g2.fill(1);
    const auto [a, b] = kGoldPhaseTaps[static_cast<std::size_t>(prn - 1)];
    std::vector<Chip> out(1023);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const int bit = g1[10] ^ g2[a] ^ g2[b];
        out[i] = static_cast<Chip>(1 - 2 * bit);
        const int f1 = g1[3] ^ g1[10];
        const int f2 = g2[2] ^ g2[3] ^ g2[6] ^ g2[8] ^ g2[9] ^ g2[10];
        for (int k = 10; k > 1; --k) {
            g1[k] = g1[k - 1];
            g2[k] = g2[k - 1];
        }
        g1[1] = f1;
        g2[1] = f2;
    }
    return out;
}

inline std::vector<Chip> msequence(int m) {
    const auto& taps = lfsr_table().at(static_cast<std::size_t>(m));
    std::vector<int> reg(static_cast<std::size_t>(m) + 1, 1);
    std::vector<Chip> out((std::size_t{1} << m) - 1);
    for (auto& chip : out) {
        chip = static_cast<Chip>(1 - 2 * reg[static_cast<std::size_t>(m)]);
        int fb = 0;
        for (int t : taps) fb ^= reg[static_cast<std::size_t>(t)];
        for (int k = m; k > 1; --k) reg[static_cast<std::size_t>(k)] = reg[static_cast<std::size_t>(k - 1)];
        reg[1] = fb;
    }
    return out;
}

inline void ensure_sodium() {
    static std::once_flag flag;
    std::call_once(flag, [] {
        if (sodium_init() < 0) throw std::runtime_error("libsodium initialisation failed");
    });
}

inline void put_le(std::vector<std::uint8_t>& buf, std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) buf.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

} // namespace detail

inline RangingCode generate_base_code(int family_id, std::size_t n) {
    if (family_id >= 1 && family_id <= 32) {
        if (n != 1023)
            throw ConfigError("code family " + std::to_string(family_id) +
                              " (Gold) only supports n = 1023, got " + std::to_string(n));
        return RangingCode(detail::gold_code(family_id));
    }
    if (family_id == 0) {
        for (int m = 3; m <= 16; ++m)
            if (n == (std::size_t{1} << m) - 1) return RangingCode(detail::msequence(m));
        throw ConfigError("code family 0 (LFSR) needs n = 2^m - 1 with 3 <= m <= 16, got " +
                          std::to_string(n));
    }
    throw ConfigError("unknown code family " + std::to_string(family_id));
}

// ---------------------------------------------------------------------------
// Mask derivation
//
// Word stream: block c = BLAKE2b-512(key, "wmauth-mask-v1" | epoch:le64 |
// n:le32 | r:le32 | c:le64), read as sixteen little-endian 32-bit words.
// Each word below the largest multiple of n is reduced mod n; repeats are
// skipped until r distinct indices are collected.

inline WatermarkMask derive_mask(const Seed& seed, const WatermarkParams& params) {
    params.validate();
    if (seed.key.size() < crypto_generichash_KEYBYTES_MIN ||
        seed.key.size() > crypto_generichash_KEYBYTES_MAX)
        throw ConfigError("mask key must be 16..64 bytes, got " + std::to_string(seed.key.size()));
    detail::ensure_sodium();

    const std::uint64_t n = params.n;
    const std::uint64_t limit = (std::uint64_t{1} << 32) - ((std::uint64_t{1} << 32) % n);

    std::vector<std::uint8_t> msg;
    constexpr std::string_view tag = "wmauth-mask-v1";
    msg.assign(tag.begin(), tag.end());
    detail::put_le(msg, seed.epoch, 8);
    detail::put_le(msg, n, 4);
    detail::put_le(msg, params.r, 4);
    const std::size_t counter_at = msg.size();
    detail::put_le(msg, 0, 8);

    std::vector<bool> taken(params.n, false);
    std::vector<std::size_t> out;
    out.reserve(params.r);
    std::array<std::uint8_t, 64> block{};
    for (std::uint64_t counter = 0; out.size() < params.r; ++counter) {
        for (int i = 0; i < 8; ++i) msg[counter_at + i] = static_cast<std::uint8_t>(counter >> (8 * i));
        crypto_generichash(block.data(), block.size(), msg.data(), msg.size(), seed.key.data(),
                           seed.key.size());
        for (std::size_t w = 0; w < 16 && out.size() < params.r; ++w) {
            std::uint32_t word = 0;
            for (int b = 0; b < 4; ++b) word |= std::uint32_t{block[4 * w + b]} << (8 * b);
            if (word >= limit) continue;
            const std::size_t idx = word % n;
            if (taken[idx]) continue;
            taken[idx] = true;
            out.push_back(idx);
        }
    }
    return WatermarkMask(std::move(out), params.n);
}

inline RangingCode apply_watermark(const RangingCode& code, const WatermarkMask& mask) {
    std::vector<Chip> chips(code.chips().begin(), code.chips().end());
    for (std::size_t i : mask.indices()) {
        detail::require(i < chips.size(), "apply_watermark: mask index beyond code length");
        chips[i] = static_cast<Chip>(-chips[i]);
    }
    return RangingCode(std::move(chips));
}

/// Correlation-amplitude loss 20 log10((n - 2r)/n) seen by a receiver that
/// tracks with the unwatermarked replica.
inline double degradation_db(std::size_t n, std::size_t r) {
    if (n <= 2 * r) throw DomainError("degradation_db: requires n > 2r");
    return 20.0 * std::log10(static_cast<double>(n - 2 * r) / static_cast<double>(n));
}

inline double degradation_db(const WatermarkParams& params) {
    params.validate();
    return degradation_db(params.n, params.r);
}

// ---------------------------------------------------------------------------
// Text formats

/// One line of n space-separated chips ("1" / "-1").
inline void write_code(std::ostream& os, const RangingCode& code) {
    for (std::size_t i = 0; i < code.size(); ++i) os << (i ? " " : "") << int{code[i]};
    os << '\n';
}

inline RangingCode read_code(std::istream& is) {
    std::vector<Chip> chips;
    int v = 0;
    while (is >> v) {
        if (v != 1 && v != -1) throw ConfigError("code file: chip values must be 1 or -1");
        chips.push_back(static_cast<Chip>(v));
    }
    if (!is.eof()) throw ConfigError("code file: unparsable token");
    if (chips.empty()) throw ConfigError("code file: no chips");
    return RangingCode(std::move(chips));
}

/// `epoch,idx1,idx2,...` with indices ascending.
inline void write_mask_line(std::ostream& os, std::uint64_t epoch, const WatermarkMask& mask) {
    os << epoch;
    for (std::size_t i : mask.indices()) os << ',' << i;
    os << '\n';
}

inline std::vector<std::uint8_t> parse_hex(std::string_view hex) {
    if (hex.size() % 2 != 0) throw ConfigError("hex string has odd length");
    std::vector<std::uint8_t> out(hex.size() / 2);
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        throw ConfigError(std::string("bad hex digit '") + c + "'");
    };
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
    return out;
}

} // namespace wmauth
