#pragma once

// Baseband synthesis after carrier wipe-off: real in-phase samples of
// rectangular chips, AWGN at a configured C/N0, and the non-SCER spoofer.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "rng.hpp"
#include "watermark.hpp"

namespace wmauth {

struct RadioModel {
    double F = 2.046e6;    ///< sampling frequency [Hz]
    double T = 1e-3;       ///< code period [s]
    double cn0_dbhz = 30.0;
    double P = 1.0;        ///< signal power

    /// Noise power per sample, (P / (C/N0)) * F/2.
    double sigma2() const { return sigma2_at(cn0_dbhz); }
    double sigma2_at(double cn0) const { return P / std::pow(10.0, cn0 / 10.0) * (F / 2.0); }

    /// F*T as an integer; throws if F*T is not (numerically) a positive integer.
    std::size_t samples_per_code() const {
        const double ft = F * T;
        const double rounded = std::round(ft);
        if (!(F > 0.0) || !(T > 0.0) || rounded < 1.0 || std::abs(ft - rounded) > 1e-9 * rounded)
            throw ConfigError("radio: F*T must be a positive integer, got " + std::to_string(ft));
        return static_cast<std::size_t>(rounded);
    }

    std::size_t samples_per_chip(std::size_t n) const {
        const std::size_t ft = samples_per_code();
        if (n == 0 || ft % n != 0)
            throw ConfigError("radio: F*T = " + std::to_string(ft) + " is not a multiple of n = " +
                              std::to_string(n));
        return ft / n;
    }

    void validate(std::size_t n) const {
        if (!(P > 0.0) || !std::isfinite(P)) throw ConfigError("radio: P must be positive");
        if (!std::isfinite(cn0_dbhz)) throw ConfigError("radio: cn0_dbhz must be finite");
        (void)samples_per_chip(n);
    }
};

struct SampleBlock {
    std::vector<double> samples;
    std::uint64_t epoch = 0;
};

struct AdversaryStrategy {
    std::size_t s = 0; ///< chips inverted per spoofed code
};

/// Rectangular pulses of amplitude sqrt(amplitude_power), chip-aligned.
/// `amplitude_power` defaults to radio.P.
inline SampleBlock resample(const RangingCode& code, const RadioModel& radio, std::uint64_t epoch = 0,
                            double amplitude_power = -1.0) {
    const std::size_t spc = radio.samples_per_chip(code.size());
    const double amp = std::sqrt(amplitude_power < 0.0 ? radio.P : amplitude_power);
    SampleBlock block;
    block.epoch = epoch;
    block.samples.resize(code.size() * spc);
    auto out = block.samples.begin();
    for (Chip c : code.chips()) out = std::fill_n(out, spc, amp * c);
    return block;
}

/// Adds N(0, sigma2) independently to every sample.
inline SampleBlock add_noise(SampleBlock block, double sigma2, Rng& rng) {
    std::normal_distribution<double> noise(0.0, std::sqrt(sigma2));
    for (double& x : block.samples) x += noise(rng);
    return block;
}

inline SampleBlock add_noise(SampleBlock block, const RadioModel& radio, Rng& rng) {
    return add_noise(std::move(block), radio.sigma2(), rng);
}

/// Uniformly random s-subset of chip positions (partial Fisher-Yates).
inline std::vector<std::size_t> random_subset(std::size_t n, std::size_t s, Rng& rng) {
    detail::require(s <= n, "random_subset: s > n");
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = 0; i < s; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(perm[i], perm[pick(rng)]);
    }
    perm.resize(s);
    return perm;
}

/// The non-SCER forgery: the unwatermarked code with s random chips inverted.
inline RangingCode spoof_code(const RangingCode& code, AdversaryStrategy strategy, Rng& rng) {
    if (strategy.s > code.size())
        throw ConfigError("spoof strategy s=" + std::to_string(strategy.s) + " exceeds n=" +
                          std::to_string(code.size()));
    std::vector<Chip> chips(code.chips().begin(), code.chips().end());
    if (strategy.s == code.size()) {
        for (Chip& c : chips) c = static_cast<Chip>(-c);
    } else {
        for (std::size_t i : random_subset(code.size(), strategy.s, rng)) chips[i] = static_cast<Chip>(-chips[i]);
    }
    return RangingCode(std::move(chips));
}

/// Raw sample dump: `<base>.f32` holds little-endian float32 samples, one
/// block after another; `<base>.txt` holds `F T n epochs` on one line.
class SampleDump {
public:
    SampleDump(const std::string& base, const RadioModel& radio, std::size_t n)
        : base_(base), radio_(radio), n_(n), data_(base + ".f32", std::ios::binary) {
        if (!data_) throw ConfigError("cannot open sample dump " + base + ".f32");
    }
    SampleDump(const SampleDump&) = delete;
    SampleDump& operator=(const SampleDump&) = delete;
    ~SampleDump() {
        try {
            finish();
        } catch (...) {
        }
    }

    void append(const SampleBlock& block) {
        std::vector<char> bytes(block.samples.size() * 4);
        for (std::size_t i = 0; i < block.samples.size(); ++i) {
            auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(block.samples[i]));
            for (int b = 0; b < 4; ++b) bytes[4 * i + b] = static_cast<char>(bits >> (8 * b));
        }
        data_.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        ++epochs_;
    }

    void finish() {
        if (finished_) return;
        finished_ = true;
        data_.close();
        std::ofstream side(base_ + ".txt");
        char line[128];
        std::snprintf(line, sizeof line, "%.17g %.17g %zu %zu\n", radio_.F, radio_.T, n_, epochs_);
        side << line;
    }

private:
    std::string base_;
    RadioModel radio_;
    std::size_t n_;
    std::ofstream data_;
    std::size_t epochs_ = 0;
    bool finished_ = false;
};

} // namespace wmauth
