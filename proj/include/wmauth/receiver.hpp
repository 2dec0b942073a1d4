#pragma once

// Watermark verification on stored post-correction samples.
//
// Two matched filters are run against every code period:
//   R_delta = R^w - R   (nonzero only on the watermarked chips)
//   R_sigma = R^w + R   (nonzero only on the untouched chips)
// with gains chosen so a noiseless authentic period reads (1, 1). W periods
// are averaged and Y = Y_delta + Y_sigma is compared against a threshold.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <span>
#include <tuple>
#include <utility>
#include <vector>

#include "channel.hpp"
#include "error.hpp"
#include "watermark.hpp"

namespace wmauth {

struct CorrelatorKernels {
    std::vector<double> r_delta; ///< values in {-2, 0, 2}
    std::vector<double> r_sigma; ///< values in {-2, 0, 2}
    double k_delta = 0.0;
    double k_sigma = 0.0;
};

struct EpochStatistic {
    double y_delta = 0.0;
    double y_sigma = 0.0;
    std::uint64_t epoch = 0;
};

struct DecisionStatistic {
    double Y_delta = 0.0;
    double Y_sigma = 0.0;
    double Y = 0.0;
    std::size_t W_used = 0;
    std::uint64_t epoch_start = 0;
};

enum class Verdict { Authentic, Spoofed };

inline const char* to_string(Verdict v) { return v == Verdict::Authentic ? "authentic" : "spoofed"; }

/// Filter gains k_delta = n / (2r * F*T * sqrt(P)), k_sigma = n / (2(n-r) * F*T * sqrt(P)).
/// The replicas have unit amplitude, so the 1/sqrt(P) factor undoes the
/// sqrt(P) amplitude of the received chips; at P = 1 this is the usual
/// (1/2r)(n/FT)(1/P) form.
inline std::pair<double, double> filter_gains(const WatermarkParams& params, const RadioModel& radio) {
    const double n = static_cast<double>(params.n);
    const double r = static_cast<double>(params.r);
    const double ft = static_cast<double>(radio.samples_per_code());
    const double scale = (n / ft) / std::sqrt(radio.P);
    return {scale / (2.0 * r), scale / (2.0 * (n - r))};
}

inline CorrelatorKernels build_kernels(const RangingCode& code, const WatermarkMask& mask,
                                       const RadioModel& radio, const WatermarkParams& params) {
    params.validate();
    detail::require(code.size() == params.n, "build_kernels: code length != n");
    detail::require(mask.size() == params.r, "build_kernels: mask size != r");
    detail::require(mask.code_length() == params.n, "build_kernels: mask built for a different n");

    const RangingCode marked = apply_watermark(code, mask);
    RadioModel unit = radio;
    unit.P = 1.0;
    const auto rw = resample(marked, unit).samples;
    const auto rr = resample(code, unit).samples;

    CorrelatorKernels k;
    k.r_delta.resize(rw.size());
    k.r_sigma.resize(rw.size());
    for (std::size_t i = 0; i < rw.size(); ++i) {
        k.r_delta[i] = rw[i] - rr[i];
        k.r_sigma[i] = rw[i] + rr[i];
    }
    std::tie(k.k_delta, k.k_sigma) = filter_gains(params, radio);
    return k;
}

inline EpochStatistic epoch_statistics(const SampleBlock& block, const CorrelatorKernels& kernels) {
    detail::require(block.samples.size() == kernels.r_delta.size() &&
                        block.samples.size() == kernels.r_sigma.size(),
                    "epoch_statistics: block length != kernel length");
    double dot_delta = 0.0, dot_sigma = 0.0;
    for (std::size_t i = 0; i < block.samples.size(); ++i) {
        dot_delta += block.samples[i] * kernels.r_delta[i];
        dot_sigma += block.samples[i] * kernels.r_sigma[i];
    }
    return {kernels.k_delta * dot_delta, kernels.k_sigma * dot_sigma, block.epoch};
}

inline DecisionStatistic aggregate(std::span<const EpochStatistic> stats, std::size_t W) {
    detail::require(W > 0 && stats.size() == W, "aggregate: expected exactly W epoch statistics");
    double sd = 0.0, ss = 0.0;
    for (const auto& e : stats) {
        sd += e.y_delta;
        ss += e.y_sigma;
    }
    DecisionStatistic d;
    d.Y_delta = sd / static_cast<double>(W);
    d.Y_sigma = ss / static_cast<double>(W);
    d.Y = d.Y_delta + d.Y_sigma;
    d.W_used = W;
    d.epoch_start = stats.front().epoch;
    return d;
}

/// Authentic iff Y > threshold; Y == threshold counts as an alarm.
inline Verdict decide(const DecisionStatistic& d, double threshold = 1.0) {
    return d.Y > threshold ? Verdict::Authentic : Verdict::Spoofed;
}

/// Online W-window aggregation for one tracked signal. A window is emitted
/// only once W consecutive epochs have been seen; a gap in the epoch sequence
/// (or an explicit signal_lost()) discards the partial window.
class DecisionAggregator {
public:
    explicit DecisionAggregator(std::size_t W) : W_(W) {
        if (W == 0) throw ConfigError("DecisionAggregator: W must be positive");
        window_.reserve(W);
    }

    std::optional<DecisionStatistic> push(const EpochStatistic& e) {
        if (!window_.empty() && e.epoch != window_.back().epoch + 1) window_.clear();
        window_.push_back(e);
        if (window_.size() < W_) return std::nullopt;
        auto d = aggregate(window_, W_);
        window_.clear();
        return d;
    }

    void signal_lost() { window_.clear(); }
    std::size_t pending() const { return window_.size(); }

private:
    std::size_t W_;
    std::vector<EpochStatistic> window_;
};

/// CSV log `epoch_start,Y_delta,Y_sigma,Y,verdict`, 9 significant digits.
class DecisionLogWriter {
public:
    explicit DecisionLogWriter(std::ostream& os, double threshold = 1.0) : os_(os), threshold_(threshold) {
        os_ << "epoch_start,Y_delta,Y_sigma,Y,verdict\n";
    }

    void write(const DecisionStatistic& d) {
        char line[160];
        std::snprintf(line, sizeof line, "%llu,%.9g,%.9g,%.9g,%s\n",
                      static_cast<unsigned long long>(d.epoch_start), d.Y_delta, d.Y_sigma, d.Y,
                      to_string(decide(d, threshold_)));
        os_ << line;
    }

private:
    std::ostream& os_;
    double threshold_;
};

} // namespace wmauth
