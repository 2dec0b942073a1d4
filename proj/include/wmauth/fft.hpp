#pragma once

// Iterative radix-2 complex FFT and real linear convolution on top of it.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <unordered_map>
#include <vector>

namespace wmauth::fft {

using cplx = std::complex<double>;

namespace detail {

// Twiddles w_k = exp(-2 pi i k / N), k < N/2, each evaluated directly
// (no recurrence) so their error does not accumulate across k.
inline const std::vector<cplx>& twiddles(std::size_t N) {
    thread_local std::unordered_map<std::size_t, std::vector<cplx>> cache;
    auto [it, inserted] = cache.try_emplace(N);
    if (inserted) {
        it->second.resize(N / 2);
        for (std::size_t k = 0; k < N / 2; ++k) {
            const double a = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(N);
            it->second[k] = {std::cos(a), std::sin(a)};
        }
    }
    return it->second;
}

} // namespace detail

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

/// In-place transform; size must be a power of two. The inverse is scaled by 1/N.
inline void transform(std::span<cplx> a, bool inverse) {
    const std::size_t N = a.size();
    if (N <= 1) return;
    for (std::size_t i = 1, j = 0; i < N; ++i) {
        std::size_t bit = N >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    const auto& w = detail::twiddles(N);
    for (std::size_t len = 2; len <= N; len <<= 1) {
        const std::size_t half = len / 2, stride = N / len;
        for (std::size_t i = 0; i < N; i += len) {
            for (std::size_t k = 0; k < half; ++k) {
                cplx t = w[k * stride];
                if (inverse) t = std::conj(t);
                const cplx u = a[i + k];
                const cplx v = a[i + k + half] * t;
                a[i + k] = u + v;
                a[i + k + half] = u - v;
            }
        }
    }
    if (inverse) {
        const double scale = 1.0 / static_cast<double>(N);
        for (auto& x : a) x *= scale;
    }
}

/// Linear convolution of two real sequences. Both inputs are packed into one
/// complex transform (a + ib) and separated by conjugate symmetry.
inline std::vector<double> convolve(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) return {};
    const std::size_t out_len = a.size() + b.size() - 1;
    const std::size_t N = next_pow2(out_len);
    std::vector<cplx> z(N);
    for (std::size_t i = 0; i < a.size(); ++i) z[i].real(a[i]);
    for (std::size_t i = 0; i < b.size(); ++i) z[i].imag(b[i]);
    transform(z, false);
    std::vector<cplx> c(N);
    for (std::size_t k = 0; k < N; ++k) {
        const cplx zk = z[k], zc = std::conj(z[(N - k) & (N - 1)]);
        const cplx A = 0.5 * (zk + zc);
        const cplx B = cplx(0.0, -0.5) * (zk - zc);
        c[k] = A * B;
    }
    transform(c, true);
    std::vector<double> out(out_len);
    for (std::size_t i = 0; i < out_len; ++i) out[i] = c[i].real();
    return out;
}

/// Linear self-convolution a * a.
inline std::vector<double> square(std::span<const double> a) {
    if (a.empty()) return {};
    const std::size_t out_len = 2 * a.size() - 1;
    const std::size_t N = next_pow2(out_len);
    std::vector<cplx> z(N);
    for (std::size_t i = 0; i < a.size(); ++i) z[i].real(a[i]);
    transform(z, false);
    for (auto& x : z) x *= x;
    transform(z, true);
    std::vector<double> out(out_len);
    for (std::size_t i = 0; i < out_len; ++i) out[i] = z[i].real();
    return out;
}

} // namespace wmauth::fft
