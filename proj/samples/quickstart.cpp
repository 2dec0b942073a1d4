// Watermark one code period, receive it, and check the design's security margins.

#include <cstdio>

#include "wmauth/wmauth.hpp"

int main() {
    using namespace wmauth;

    const WatermarkParams params{1023, 21, 1000};
    const RadioModel radio;
    const auto key = parse_hex("000102030405060708090a0b0c0d0e0f");

    const RangingCode code = generate_base_code(1, params.n);
    const WatermarkMask mask = derive_mask(Seed{key, 0}, params);
    const RangingCode sent = apply_watermark(code, mask);

    RngFactory rng(key);
    Rng noise = rng.stream({streams::kNoise, 0, 0});
    const SampleBlock rx = add_noise(resample(sent, radio), radio, noise);
    const EpochStatistic e = epoch_statistics(rx, build_kernels(code, mask, radio, params));
    std::printf("one noisy epoch: y_delta=%.3f y_sigma=%.3f\n", e.y_delta, e.y_sigma);

    std::printf("degradation %.3f dB, PFA %.3e, 2^-32 = %.3e\n", degradation_db(params), pfa(params, radio),
                std::exp2(-32.0));
    std::printf("PMD at s=511: exact %.3e, CLT %.3e\n", pmd_exact(params, radio, 511), pmd_clt(params, radio, 511));
}
