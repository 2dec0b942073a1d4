#pragma once

// Security of a combinatorial watermark against the non-SCER spoofer.
//
// The spoofer inverts s random chips of the unwatermarked code; H counts how
// many of the r watermarked chips it hit, H ~ Hypergeometric(n, r, s). Per
// code period the filter outputs are g_delta(H) + noise and g_sigma(H) + noise,
// so after W periods
//   Y = g_delta(S/W) + g_sigma(S/W) + N_dsw,   S = H_1 + ... + H_W,
// where N_dsw is the W-averaged filter noise. Conditioning on S makes the
// exact missed-detection probability a finite sum of Gaussian tails weighted
// by the W-fold convolution of H.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "channel.hpp"
#include "error.hpp"
#include "parallel.hpp"
#include "pmf.hpp"
#include "watermark.hpp"

namespace wmauth {

struct GaussianSpec {
    double mean = 0.0;
    double variance = 1.0;
};

struct CltMoments {
    double mean_delta = 0.0;
    double mean_sigma = 0.0;
    double var_delta = 0.0;
    double var_sigma = 0.0;
};

struct PmdCurve {
    std::vector<std::size_t> s_values;
    std::vector<double> pmd;

    std::size_t argmax() const {
        return static_cast<std::size_t>(std::max_element(pmd.begin(), pmd.end()) - pmd.begin());
    }
    double max() const { return pmd.empty() ? 0.0 : pmd[argmax()]; }
};

// Gaussian tails via erfc so deep tails keep full relative precision.
inline double normal_cdf(double x, double mean, double variance) {
    return 0.5 * std::erfc(-(x - mean) / std::sqrt(2.0 * variance));
}
inline double normal_sf(double x, double mean, double variance) {
    return 0.5 * std::erfc((x - mean) / std::sqrt(2.0 * variance));
}

inline double g_delta(double h, const WatermarkParams& params) {
    const double r = static_cast<double>(params.r);
    return (4.0 * h - 2.0 * r) / (2.0 * r);
}

inline double g_sigma(double h, double s, const WatermarkParams& params) {
    const double n = static_cast<double>(params.n), r = static_cast<double>(params.r);
    return (2.0 * n - 2.0 * r - 4.0 * s + 4.0 * h) / (2.0 * (n - r));
}

namespace detail {

inline void validate_analysis(const WatermarkParams& params, const RadioModel& radio) {
    params.validate();
    radio.validate(params.n);
}

// (n / FT) * (sigma^2 / P): per-period filter noise variance times r (delta) or n - r (sigma).
inline double noise_scale(const WatermarkParams& params, const RadioModel& radio, double cn0) {
    return static_cast<double>(params.n) / static_cast<double>(radio.samples_per_code()) *
           radio.sigma2_at(cn0) / radio.P;
}

} // namespace detail

/// Variance of the W-averaged noise on Y = Y_delta + Y_sigma.
inline double decision_noise_variance(const WatermarkParams& params, const RadioModel& radio,
                                      std::optional<double> cn0 = std::nullopt) {
    detail::validate_analysis(params, radio);
    const double n = static_cast<double>(params.n), r = static_cast<double>(params.r);
    const double W = static_cast<double>(params.W);
    return (1.0 / W) * (1.0 / r + 1.0 / (n - r)) * detail::noise_scale(params, radio, cn0.value_or(radio.cn0_dbhz));
}

/// CLT moments of (Y_delta, Y_sigma) under a non-SCER spoof inverting s chips.
/// The Y_delta/Y_sigma covariance is not modelled.
inline CltMoments clt_moments(const WatermarkParams& params, const RadioModel& radio, std::size_t s,
                              std::optional<double> cn0 = std::nullopt) {
    detail::validate_analysis(params, radio);
    if (s > params.n) throw DomainError("clt_moments: s > n");
    const double n = static_cast<double>(params.n), r = static_cast<double>(params.r);
    const double W = static_cast<double>(params.W), sd = static_cast<double>(s);
    const double noise = detail::noise_scale(params, radio, cn0.value_or(radio.cn0_dbhz));
    const double hyper = (sd / n) * ((n - sd) / (n - 1.0)); // shared factor of Var[H]
    CltMoments m;
    m.mean_delta = 2.0 * sd / n - 1.0;
    m.mean_sigma = 1.0 - 2.0 * sd / (n - r) + 2.0 * sd * r / ((n - r) * n);
    m.var_delta = (1.0 / W) * (4.0 / r) * hyper * ((n - r) / n) + (1.0 / W) * (1.0 / r) * noise;
    m.var_sigma = (1.0 / W) * (4.0 / (n - r)) * hyper * (r / n) + (1.0 / W) * (1.0 / (n - r)) * noise;
    return m;
}

/// Moments of (Y_delta, Y_sigma) for the authentic signal: means (1, 1), noise only.
inline CltMoments authentic_moments(const WatermarkParams& params, const RadioModel& radio,
                                    std::optional<double> cn0 = std::nullopt) {
    detail::validate_analysis(params, radio);
    const double n = static_cast<double>(params.n), r = static_cast<double>(params.r);
    const double W = static_cast<double>(params.W);
    const double noise = detail::noise_scale(params, radio, cn0.value_or(radio.cn0_dbhz));
    return {1.0, 1.0, noise / (W * r), noise / (W * (n - r))};
}

inline GaussianSpec authentic_distribution(const WatermarkParams& params, const RadioModel& radio,
                                           std::optional<double> cn0 = std::nullopt) {
    return {2.0, decision_noise_variance(params, radio, cn0)};
}

/// Pr(Y <= threshold | authentic).
inline double pfa(const WatermarkParams& params, const RadioModel& radio, double threshold = 1.0) {
    const auto g = authentic_distribution(params, radio);
    return normal_cdf(threshold, g.mean, g.variance);
}

/// Gaussian approximation of Pr(Y > threshold | spoof s) from clt_moments.
inline double pmd_clt(const WatermarkParams& params, const RadioModel& radio, std::size_t s,
                      double threshold = 1.0) {
    const auto m = clt_moments(params, radio, s);
    return normal_sf(threshold, m.mean_delta + m.mean_sigma, m.var_delta + m.var_sigma);
}

/// Distribution of S = H_1 + ... + H_W mapped onto the Y_delta and Y_sigma axes.
struct SpoofSupport {
    Pmf sum;         ///< S, integer support
    Pmf delta_axis;  ///< g_delta(S / W), same masses
    Pmf sigma_axis;  ///< g_sigma(S / W), same masses
};

inline SpoofSupport spoof_support(const WatermarkParams& params, std::size_t s) {
    params.validate();
    if (s > params.n) throw DomainError("spoof_support: s > n");
    const double n = static_cast<double>(params.n), r = static_cast<double>(params.r);
    const double W = static_cast<double>(params.W), sd = static_cast<double>(s);
    SpoofSupport out;
    out.sum = convolve_power(hypergeom_pmf(params.n, params.r, s), params.W);
    // g_delta(x) = (2/r) x - 1 and g_sigma(x) = (2/(n-r)) x + 1 - 2s/(n-r), with x = S/W.
    out.delta_axis = out.sum.affine(2.0 / (r * W), -1.0);
    out.sigma_axis = out.sum.affine(2.0 / ((n - r) * W), 1.0 - 2.0 * sd / (n - r));
    return out;
}

/// Exact Pr(Y > threshold | non-SCER spoof with s inversions).
inline double pmd_exact(const WatermarkParams& params, const RadioModel& radio, std::size_t s,
                        double threshold = 1.0) {
    const double noise_var = decision_noise_variance(params, radio);
    const auto support = spoof_support(params, s);
    long double total = 0.0L;
    for (std::size_t i = 0; i < support.sum.size(); ++i) {
        const double p = support.sum.probs[i];
        if (p == 0.0) continue;
        const double signal = support.delta_axis.support(i) + support.sigma_axis.support(i);
        total += static_cast<long double>(p) * normal_sf(threshold - signal, 0.0, noise_var);
    }
    return std::clamp(static_cast<double>(total), 0.0, 1.0);
}

/// pmd_exact for every s in 0..n, spread over the worker pool.
inline PmdCurve pmd_curve(const WatermarkParams& params, const RadioModel& radio, double threshold = 1.0,
                          unsigned workers = worker_count()) {
    detail::validate_analysis(params, radio);
    PmdCurve curve;
    curve.s_values.resize(params.n + 1);
    curve.pmd.resize(params.n + 1);
    parallel_for(
        params.n + 1,
        [&](std::size_t s) {
            curve.s_values[s] = s;
            curve.pmd[s] = pmd_exact(params, radio, s, threshold);
        },
        workers);
    return curve;
}

struct MinRResult {
    bool feasible = false;
    std::size_t r = 0;
    double max_pmd = 0.0;   ///< worst-case exact PMD at r (feasible only)
    std::size_t worst_s = 0;
    double pfa = 0.0;
    std::size_t exact_checks = 0; ///< number of r values confirmed with the exact PMD
};

/// A candidate is only confirmed exactly when its CLT PMD at s = n/2 is within
/// this factor of the target; the CLT and exact values agree far better than that.
inline constexpr double kCltPrefilterSlack = 10.0;

/// Smallest r (ascending from 1) whose PFA and worst-case exact PMD over all s
/// are both below target.
inline MinRResult min_r_search(std::size_t n, std::size_t W, const RadioModel& radio, double target,
                               double threshold = 1.0, unsigned workers = worker_count()) {
    if (n < 2 || W == 0) throw ConfigError("min_r_search: need n >= 2 and W >= 1");
    if (!(target > 0.0)) throw ConfigError("min_r_search: target must be positive");
    radio.validate(n);

    // Visit s nearest the middle first: that is where a violation shows up.
    std::vector<std::size_t> order(n + 1);
    for (std::size_t i = 0; i <= n; ++i) order[i] = i;
    const double mid = static_cast<double>(n) / 2.0;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(static_cast<double>(a) - mid) < std::abs(static_cast<double>(b) - mid);
    });

    MinRResult result;
    for (std::size_t r = 1; r < n; ++r) {
        const WatermarkParams params{n, r, W};
        const double p_fa = pfa(params, radio, threshold);
        if (!(p_fa < target)) continue;
        if (pmd_clt(params, radio, n / 2, threshold) > kCltPrefilterSlack * target) continue;

        ++result.exact_checks;
        std::vector<double> pmd(n + 1, -1.0);
        bool violated = false;
        const std::size_t batch = std::max<std::size_t>(1, 4 * std::max(1u, workers));
        for (std::size_t start = 0; start < order.size() && !violated; start += batch) {
            const std::size_t count = std::min(batch, order.size() - start);
            parallel_for(
                count, [&](std::size_t i) { pmd[order[start + i]] = pmd_exact(params, radio, order[start + i], threshold); },
                workers);
            for (std::size_t i = 0; i < count; ++i)
                if (!(pmd[order[start + i]] < target)) violated = true;
        }
        if (violated) continue;

        result.feasible = true;
        result.r = r;
        result.worst_s = static_cast<std::size_t>(std::max_element(pmd.begin(), pmd.end()) - pmd.begin());
        result.max_pmd = pmd[result.worst_s];
        result.pfa = p_fa;
        return result;
    }
    return result;
}

} // namespace wmauth
