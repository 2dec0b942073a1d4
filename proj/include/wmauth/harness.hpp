#pragma once

// End-to-end campaigns: authentic passes and spoof injections, producing
// labelled decision rows plus the predicted distributions to compare against.
//
// Timeline: a campaign is a run of consecutive segments, one per label
// (authentic, then each spoof strategy), each `duration_s` long. Every epoch
// gets the true mask derive_mask(master_seed, epoch); the receiver always
// verifies against that mask, whatever was transmitted.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "channel.hpp"
#include "config.hpp"
#include "error.hpp"
#include "parallel.hpp"
#include "receiver.hpp"
#include "rng.hpp"
#include "security.hpp"
#include "watermark.hpp"

namespace wmauth {

/// Axis-aligned 3-sigma ellipse in the (Y_delta, Y_sigma) plane.
struct Ellipse {
    double cx = 0.0, cy = 0.0; ///< center
    double ax = 0.0, ay = 0.0; ///< semi-axes

    bool contains(double x, double y) const {
        const double u = (x - cx) / ax, v = (y - cy) / ay;
        return u * u + v * v <= 1.0;
    }
};

inline Ellipse ellipse_3sigma(const CltMoments& m) {
    if (!(m.var_delta > 0.0) || !(m.var_sigma > 0.0)) throw DomainError("ellipse_3sigma: variances must be positive");
    return {m.mean_delta, m.mean_sigma, 3.0 * std::sqrt(m.var_delta), 3.0 * std::sqrt(m.var_sigma)};
}

struct SignalLabel {
    std::optional<std::size_t> s; ///< empty: authentic
    bool authentic() const { return !s.has_value(); }
    std::string name() const { return authentic() ? "authentic" : "spoof"; }
};

struct DecisionRow {
    double t = 0.0; ///< seconds since campaign start at the first epoch of the window
    SignalLabel label;
    DecisionStatistic stat;
    Verdict verdict = Verdict::Spoofed;
    double cn0_dbhz = 0.0; ///< mean C/N0 over the window
};

struct LabelPrediction {
    SignalLabel label;
    double cn0_mean = 0.0;
    double cn0_min = 0.0;
    CltMoments moments;  ///< at cn0_mean
    GaussianSpec y;      ///< distribution of Y at cn0_mean
    Ellipse ellipse;     ///< 3-sigma at cn0_min
};

struct CampaignResult {
    std::size_t W = 0;
    std::vector<DecisionRow> decisions;
    std::vector<LabelPrediction> predictions;
};

namespace detail {

struct Segment {
    SignalLabel label;
    std::uint64_t trial = 0;      ///< rng trial id
    std::uint64_t first_epoch = 0;
    std::size_t decisions = 0;
};

class EpochSimulator {
public:
    EpochSimulator(const Config& cfg, std::size_t W)
        : cfg_(cfg), params_{cfg.params.n, cfg.params.r, W}, code_(cfg.base_code()), rng_(cfg.campaign.master_seed),
          spc_(cfg.radio.samples_per_chip(cfg.params.n)) {
        std::tie(k_delta_, k_sigma_) = filter_gains(params_, cfg.radio);
    }

    const WatermarkParams& params() const { return params_; }

    /// C/N0 of an epoch; the profile spans each segment.
    double cn0(const Segment& seg, std::uint64_t epoch) const {
        if (!cfg_.campaign.cn0_profile) return cfg_.radio.cn0_dbhz;
        const double len = static_cast<double>(seg.decisions * params_.W);
        const double u = (static_cast<double>(epoch - seg.first_epoch) + 0.5) / len;
        return cfg_.campaign.cn0_profile->at(u);
    }

    EpochStatistic simulate(const Segment& seg, std::uint64_t epoch, SampleDump* dump = nullptr) const {
        const WatermarkMask mask = derive_mask(Seed{cfg_.campaign.master_seed, epoch}, params_);
        RangingCode sent;
        double power = cfg_.radio.P;
        if (seg.label.authentic()) {
            sent = apply_watermark(code_, mask);
        } else {
            Rng chips = rng_.stream({streams::kSpoofChips, seg.trial, epoch});
            sent = spoof_code(code_, AdversaryStrategy{*seg.label.s}, chips);
            power = cfg_.campaign.spoof_power.value_or(cfg_.radio.P);
        }
        const double sigma2 = cfg_.campaign.noiseless ? 0.0 : cfg_.radio.sigma2_at(cn0(seg, epoch));
        Rng noise = rng_.stream({streams::kNoise, seg.trial, epoch});

        if (cfg_.campaign.fidelity == Fidelity::Samples) {
            SampleBlock block = resample(sent, cfg_.radio, epoch, power);
            if (sigma2 > 0.0) block = add_noise(std::move(block), sigma2, noise);
            if (dump) dump->append(block);
            return epoch_statistics(block, build_kernels(code_, mask, cfg_.radio, params_));
        }

        // Chip-level form of the two filters: R_delta = -2R on masked chips,
        // R_sigma = 2R elsewhere, each chip spanning spc samples.
        double dot_delta = 0.0, dot_sigma = 0.0;
        std::size_t next = 0;
        const auto idx = mask.indices();
        for (std::size_t i = 0; i < code_.size(); ++i) {
            const double prod = static_cast<double>(sent[i]) * code_[i];
            if (next < idx.size() && idx[next] == i) {
                dot_delta -= 2.0 * prod;
                ++next;
            } else {
                dot_sigma += 2.0 * prod;
            }
        }
        const double amp = std::sqrt(power) * static_cast<double>(spc_);
        EpochStatistic e{k_delta_ * amp * dot_delta, k_sigma_ * amp * dot_sigma, epoch};
        if (sigma2 > 0.0) {
            // <noise, kernel> ~ N(0, sigma2 * |kernel|^2); the kernels have
            // disjoint support so the two draws are independent.
            const double r = static_cast<double>(params_.r), n = static_cast<double>(params_.n);
            const double spc = static_cast<double>(spc_);
            std::normal_distribution<double> nd(0.0, k_delta_ * std::sqrt(sigma2 * 4.0 * spc * r));
            std::normal_distribution<double> ns(0.0, k_sigma_ * std::sqrt(sigma2 * 4.0 * spc * (n - r)));
            e.y_delta += nd(noise);
            e.y_sigma += ns(noise);
        }
        return e;
    }

private:
    const Config& cfg_;
    WatermarkParams params_;
    RangingCode code_;
    RngFactory rng_;
    std::size_t spc_;
    double k_delta_ = 0.0, k_sigma_ = 0.0;
};

inline CampaignResult run_segments(const Config& cfg, const std::vector<Segment>& segments, std::size_t W,
                                   SampleDump* dump) {
    const EpochSimulator sim(cfg, W);
    const double T = cfg.radio.T;
    const double threshold = cfg.analysis.threshold;

    CampaignResult result;
    result.W = W;
    std::vector<std::pair<const Segment*, std::size_t>> jobs;
    for (const auto& seg : segments)
        for (std::size_t d = 0; d < seg.decisions; ++d) jobs.emplace_back(&seg, d);
    result.decisions.resize(jobs.size());

    auto one_decision = [&](std::size_t j) {
        const auto& [seg, d] = jobs[j];
        const std::uint64_t start = seg->first_epoch + d * W;
        DecisionAggregator agg(W);
        std::optional<DecisionStatistic> stat;
        double cn0_sum = 0.0;
        for (std::uint64_t e = start; e < start + W; ++e) {
            cn0_sum += sim.cn0(*seg, e);
            stat = agg.push(sim.simulate(*seg, e, dump));
        }
        DecisionRow& row = result.decisions[j];
        row.t = static_cast<double>(start) * T;
        row.label = seg->label;
        row.stat = *stat;
        row.verdict = decide(*stat, threshold);
        row.cn0_dbhz = cn0_sum / static_cast<double>(W);
    };
    // Sample dumps are written in epoch order.
    parallel_for(jobs.size(), one_decision, dump ? 1u : worker_count());

    for (const auto& seg : segments) {
        LabelPrediction p;
        p.label = seg.label;
        double sum = 0.0, lo = INFINITY;
        const std::uint64_t epochs = seg.decisions * W;
        for (std::uint64_t e = seg.first_epoch; e < seg.first_epoch + epochs; ++e) {
            const double c = sim.cn0(seg, e);
            sum += c;
            lo = std::min(lo, c);
        }
        p.cn0_mean = epochs ? sum / static_cast<double>(epochs) : cfg.radio.cn0_dbhz;
        p.cn0_min = epochs ? lo : cfg.radio.cn0_dbhz;
        const auto& params = sim.params();
        auto moments_at = [&](double cn0) {
            return seg.label.authentic() ? authentic_moments(params, cfg.radio, cn0)
                                         : clt_moments(params, cfg.radio, *seg.label.s, cn0);
        };
        p.moments = moments_at(p.cn0_mean);
        p.y = {p.moments.mean_delta + p.moments.mean_sigma, p.moments.var_delta + p.moments.var_sigma};
        p.ellipse = ellipse_3sigma(moments_at(p.cn0_min));
        result.predictions.push_back(p);
    }
    return result;
}

inline std::size_t decisions_per_segment(const Config& cfg, std::size_t W) {
    const double epochs = std::floor(cfg.campaign.duration_s / cfg.radio.T + 1e-9);
    if (epochs < static_cast<double>(W))
        throw ConfigError("campaign: duration_s covers fewer than W = " + std::to_string(W) + " epochs");
    return static_cast<std::size_t>(epochs) / W;
}

} // namespace detail

inline std::size_t campaign_W(const Config& cfg) { return cfg.campaign.w_override.value_or(cfg.params.W); }

/// Watermarked epochs only: Y time series plus the predicted authentic density.
inline CampaignResult authentic_campaign(const Config& cfg, SampleDump* dump = nullptr) {
    cfg.validate();
    const std::size_t W = campaign_W(cfg);
    const detail::Segment seg{SignalLabel{}, 0, 0, detail::decisions_per_segment(cfg, W)};
    return detail::run_segments(cfg, {seg}, W, dump);
}

/// Optional authentic segment followed by one spoof segment per strategy.
inline CampaignResult spoof_campaign(const Config& cfg, SampleDump* dump = nullptr) {
    cfg.validate();
    if (cfg.campaign.strategies.empty()) throw ConfigError("spoof campaign: no strategies configured");
    const std::size_t W = campaign_W(cfg);
    const std::size_t per = detail::decisions_per_segment(cfg, W);
    std::vector<detail::Segment> segments;
    std::uint64_t epoch = 0;
    if (cfg.campaign.include_authentic) {
        segments.push_back({SignalLabel{}, 0, epoch, per});
        epoch += per * W;
    }
    for (std::size_t k = 0; k < cfg.campaign.strategies.size(); ++k) {
        segments.push_back({SignalLabel{cfg.campaign.strategies[k]}, k + 1, epoch, per});
        epoch += per * W;
    }
    return detail::run_segments(cfg, segments, W, dump);
}

// ---------------------------------------------------------------------------
// CSV sinks

inline void write_decisions_csv(std::ostream& os, const CampaignResult& res) {
    os << "t,label,s,Y_delta,Y_sigma,Y,verdict\n";
    char line[256];
    for (const auto& row : res.decisions) {
        const std::string s = row.label.s ? std::to_string(*row.label.s) : "";
        std::snprintf(line, sizeof line, "%.9g,%s,%s,%.9g,%.9g,%.9g,%s\n", row.t, row.label.name().c_str(), s.c_str(),
                      row.stat.Y_delta, row.stat.Y_sigma, row.stat.Y, to_string(row.verdict));
        os << line;
    }
}

inline void write_ellipses_csv(std::ostream& os, const CampaignResult& res) {
    os << "label,s,cx,cy,ax,ay\n";
    char line[256];
    for (const auto& p : res.predictions) {
        const std::string s = p.label.s ? std::to_string(*p.label.s) : "";
        std::snprintf(line, sizeof line, "%s,%s,%.9g,%.9g,%.9g,%.9g\n", p.label.name().c_str(), s.c_str(),
                      p.ellipse.cx, p.ellipse.cy, p.ellipse.ax, p.ellipse.ay);
        os << line;
    }
}

inline void write_predictions_csv(std::ostream& os, const CampaignResult& res) {
    os << "label,s,cn0_mean,cn0_min,mean_delta,mean_sigma,var_delta,var_sigma,mean_Y,var_Y\n";
    char line[384];
    for (const auto& p : res.predictions) {
        const std::string s = p.label.s ? std::to_string(*p.label.s) : "";
        std::snprintf(line, sizeof line, "%s,%s,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", p.label.name().c_str(),
                      s.c_str(), p.cn0_mean, p.cn0_min, p.moments.mean_delta, p.moments.mean_sigma,
                      p.moments.var_delta, p.moments.var_sigma, p.y.mean, p.y.variance);
        os << line;
    }
}

inline void write_pmd_csv(std::ostream& os, const PmdCurve& curve) {
    os << "s,pmd,log2_pmd\n";
    char line[128];
    for (std::size_t i = 0; i < curve.s_values.size(); ++i) {
        std::snprintf(line, sizeof line, "%zu,%.9g,%.9g\n", curve.s_values[i], curve.pmd[i], std::log2(curve.pmd[i]));
        os << line;
    }
}

/// decisions.csv, ellipses.csv and predicted.csv under `dir`.
inline void write_campaign(const std::filesystem::path& dir, const CampaignResult& res) {
    std::filesystem::create_directories(dir);
    auto open = [&](const char* name) {
        std::ofstream f(dir / name, std::ios::binary);
        if (!f) throw ConfigError("cannot write " + (dir / name).string());
        return f;
    };
    auto decisions = open("decisions.csv");
    write_decisions_csv(decisions, res);
    auto ellipses = open("ellipses.csv");
    write_ellipses_csv(ellipses, res);
    auto predicted = open("predicted.csv");
    write_predictions_csv(predicted, res);
}

} // namespace wmauth
