#pragma once

// Discrete distributions on an evenly spaced real support.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "error.hpp"
#include "fft.hpp"

namespace wmauth {

/// probs[i] is the mass at support_start + i * support_step.
struct Pmf {
    double support_start = 0.0;
    double support_step = 1.0;
    std::vector<double> probs;

    static constexpr double kMassTolerance = 1e-9;

    std::size_t size() const { return probs.size(); }
    double support(std::size_t i) const { return support_start + static_cast<double>(i) * support_step; }

    double total() const { return std::accumulate(probs.begin(), probs.end(), 0.0); }

    double mean() const {
        double m = 0.0;
        for (std::size_t i = 0; i < probs.size(); ++i) m += probs[i] * support(i);
        return m / total();
    }

    double variance() const {
        const double mu = mean();
        double v = 0.0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            const double d = support(i) - mu;
            v += probs[i] * d * d;
        }
        return v / total();
    }

    bool integer_indexed() const {
        return support_step == 1.0 && std::floor(support_start) == support_start;
    }

    /// Pushes the support through x -> offset + scale * x; masses are unchanged.
    Pmf affine(double scale, double offset) const {
        return Pmf{offset + scale * support_start, scale * support_step, probs};
    }

    void validate() const {
        if (probs.empty()) throw NumericalError("Pmf: empty");
        for (double p : probs)
            if (!(p >= 0.0) || !std::isfinite(p)) throw NumericalError("Pmf: negative or non-finite mass");
        if (std::abs(total() - 1.0) > kMassTolerance)
            throw NumericalError("Pmf: total mass " + std::to_string(total()) + " is not 1");
    }
};

/// H ~ Hypergeometric(n, r, s): number of the r marked chips hit when s of the
/// n chips are drawn without replacement. Support is 0..min(r, s); entries
/// below max(0, s - (n - r)) are zero. Masses come from log-gamma binomials
/// and are normalized to sum to one.
inline Pmf hypergeom_pmf(std::size_t n, std::size_t r, std::size_t s) {
    if (r > n || s > n)
        throw DomainError("hypergeom_pmf: need r <= n and s <= n (n=" + std::to_string(n) +
                          ", r=" + std::to_string(r) + ", s=" + std::to_string(s) + ")");
    auto log_choose = [](double a, double b) {
        return std::lgamma(a + 1.0) - std::lgamma(b + 1.0) - std::lgamma(a - b + 1.0);
    };
    const std::size_t hi = std::min(r, s);
    const std::size_t lo = s > n - r ? s - (n - r) : 0;
    Pmf pmf{0.0, 1.0, std::vector<double>(hi + 1, 0.0)};
    const double log_total = log_choose(static_cast<double>(n), static_cast<double>(s));
    for (std::size_t h = lo; h <= hi; ++h) {
        pmf.probs[h] = std::exp(log_choose(static_cast<double>(r), static_cast<double>(h)) +
                                log_choose(static_cast<double>(n - r), static_cast<double>(s - h)) -
                                log_total);
    }
    const double mass = pmf.total();
    for (double& p : pmf.probs) p /= mass;
    return pmf;
}

namespace detail {

inline void clamp_negative(std::vector<double>& v) {
    for (double& x : v)
        if (x < 0.0) x = 0.0;
}

} // namespace detail

/// W-fold self-convolution of an integer-indexed Pmf by binary exponentiation
/// (repeated squaring), each product done with an FFT. Roundoff negatives are
/// clamped to zero after every product. The result is renormalized when its
/// mass is within 1e-9 of one and rejected otherwise.
inline Pmf convolve_power(const Pmf& pmf, std::size_t W) {
    if (W == 0) throw DomainError("convolve_power: W must be positive");
    if (!pmf.integer_indexed()) throw DomainError("convolve_power: support must be integer-indexed");
    pmf.validate();
    if (W == 1) return pmf;

    // Exact zeros at either end only shift or pad the result.
    const auto first = std::find_if(pmf.probs.begin(), pmf.probs.end(), [](double p) { return p != 0.0; });
    const auto last = std::find_if(pmf.probs.rbegin(), pmf.probs.rend(), [](double p) { return p != 0.0; }).base();
    const std::size_t lead = static_cast<std::size_t>(first - pmf.probs.begin());
    std::vector<double> base(first, last);
    // W-th powers amplify input normalization error W-fold; the mass check
    // below is meant to catch FFT drift only.
    const double input_mass = pmf.total();
    for (double& p : base) p /= input_mass;

    // A single-entry factor is a scalar multiple; everything else goes through the FFT.
    auto product = [](const std::vector<double>& a, const std::vector<double>& b) {
        std::vector<double> c;
        if (a.size() == 1 || b.size() == 1) {
            const auto& longer = a.size() == 1 ? b : a;
            const double scale = a.size() == 1 ? a[0] : b[0];
            c = longer;
            for (double& x : c) x *= scale;
        } else {
            c = &a == &b ? fft::square(a) : fft::convolve(a, b);
        }
        detail::clamp_negative(c);
        return c;
    };

    std::vector<double> acc;
    for (std::size_t k = W;;) {
        if (k & 1) acc = acc.empty() ? base : product(acc, base);
        k >>= 1;
        if (k == 0) break;
        base = product(base, base);
    }

    const double mass = std::accumulate(acc.begin(), acc.end(), 0.0);
    if (!(std::abs(mass - 1.0) <= Pmf::kMassTolerance))
        throw NumericalError("convolve_power: total mass drifted to " + std::to_string(mass));

    Pmf out;
    out.support_start = static_cast<double>(W) * pmf.support_start;
    out.support_step = 1.0;
    out.probs.assign(W * (pmf.size() - 1) + 1, 0.0);
    const std::size_t offset = W * lead;
    for (std::size_t i = 0; i < acc.size(); ++i) out.probs[offset + i] = acc[i] / mass;
    return out;
}

} // namespace wmauth
