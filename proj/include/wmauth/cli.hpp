#pragma once

// Command-line front end. Exit codes: 0 success, 1 other failure (including an
// infeasible min-r search), 2 configuration error, 3 numerical failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "config.hpp"
#include "error.hpp"
#include "harness.hpp"
#include "security.hpp"
#include "watermark.hpp"

namespace wmauth {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

namespace detail {

struct CliOptions {
    std::string config_path;
    std::string seed_hex;
    std::string out;
    std::string dump_samples;
    std::optional<std::size_t> family;
    std::optional<std::size_t> n;
    std::optional<std::size_t> r;
    std::optional<std::size_t> W;
    std::optional<double> cn0;
    std::optional<double> threshold;
    std::optional<std::size_t> w_override;
    std::size_t epochs = 0;
    std::size_t start_epoch = 0;
};

// Code and mask generation never touch the radio model, so it is only
// validated when `radio` is set.
inline Config resolve_config(const CliOptions& o, bool radio) {
    Config cfg = o.config_path.empty() ? Config{} : load_config(o.config_path);
    if (o.n) cfg.params.n = *o.n;
    if (o.r) cfg.params.r = *o.r;
    if (o.W) cfg.params.W = *o.W;
    if (o.family) cfg.family_id = static_cast<int>(*o.family);
    if (o.cn0) cfg.radio.cn0_dbhz = *o.cn0;
    if (o.threshold) cfg.analysis.threshold = *o.threshold;
    if (o.w_override) cfg.campaign.w_override = *o.w_override;
    if (!o.seed_hex.empty()) cfg.campaign.master_seed = parse_hex(o.seed_hex);
    if (radio) {
        cfg.validate();
    } else {
        cfg.params.validate();
        if (cfg.campaign.master_seed.size() < 16 || cfg.campaign.master_seed.size() > 64)
            throw ConfigError("seed must be 16..64 bytes of hex");
    }
    return cfg;
}

// Writes to `path`, or stdout when path is empty or "-".
template <class Fn>
void with_output(const std::string& path, Fn&& fn) {
    if (path.empty() || path == "-") {
        fn(std::cout);
        return;
    }
    if (auto parent = std::filesystem::path(path).parent_path(); !parent.empty())
        std::filesystem::create_directories(parent);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + path);
    fn(f);
}

} // namespace detail

inline int cli_main(int argc, const char* const* argv) {
    CLI::App app{"Combinatorial-watermark ranging authentication toolkit", "wmauth"};
    app.require_subcommand(1);
    detail::CliOptions o;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config_path, "INI config with [watermark], [radio], [analysis], [campaign]");
        sub->add_option("--n", o.n, "chips per code");
        sub->add_option("--r", o.r, "inverted chips per code");
        sub->add_option("--W", o.W, "codes per decision");
        sub->add_option("--cn0", o.cn0, "C/N0 in dB-Hz");
        sub->add_option("--threshold", o.threshold, "decision threshold on Y");
    };

    auto* gen_code = app.add_subcommand("gen-code", "write a base ranging code (one line of +/-1)");
    common(gen_code);
    gen_code->add_option("--family", o.family, "0 = LFSR m-sequence, 1..32 = Gold code PRN");
    gen_code->add_option("--out", o.out, "output file (default stdout)");

    auto* gen_mask = app.add_subcommand("gen-mask", "write watermark masks: epoch,idx1,...,idx_r");
    common(gen_mask);
    gen_mask->add_option("--seed", o.seed_hex, "mask key as hex (16..64 bytes)");
    gen_mask->add_option("--epochs", o.epochs, "number of epochs (default W)");
    gen_mask->add_option("--start", o.start_epoch, "first epoch");
    gen_mask->add_option("--out", o.out, "output file (default stdout)");

    auto* degradation = app.add_subcommand("degradation", "print 20 log10((n - 2r)/n) in dB");
    common(degradation);

    auto* pfa_cmd = app.add_subcommand("pfa", "print Pr(Y <= threshold | authentic)");
    common(pfa_cmd);

    auto* pmd_cmd = app.add_subcommand("pmd-curve", "exact PMD for every s; CSV s,pmd,log2_pmd");
    common(pmd_cmd);
    pmd_cmd->add_option("--out", o.out, "output CSV (default stdout)");

    auto* minr_cmd = app.add_subcommand("min-r", "smallest r meeting the security target");
    common(minr_cmd);

    auto* auth_cmd = app.add_subcommand("authentic-run", "simulate an authentic pass");
    auto* spoof_cmd = app.add_subcommand("spoof-run", "simulate spoof injections");
    for (auto* sub : {auth_cmd, spoof_cmd}) {
        common(sub);
        sub->add_option("--seed", o.seed_hex, "master seed as hex (16..64 bytes)");
        sub->add_option("--w-override", o.w_override, "average over this many codes instead of W");
        sub->add_option("--out-dir,--out", o.out, "directory for decisions.csv, ellipses.csv, predicted.csv")
            ->required();
    }
    auth_cmd->add_option("--dump-samples", o.dump_samples,
                         "write raw samples to <base>.f32 / <base>.txt (fidelity = samples)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        const Config cfg = detail::resolve_config(o, !gen_code->parsed() && !gen_mask->parsed());
        char buf[128];
        if (gen_code->parsed()) {
            const auto code = cfg.base_code();
            detail::with_output(o.out, [&](std::ostream& os) { write_code(os, code); });
        } else if (gen_mask->parsed()) {
            const std::size_t count = o.epochs ? o.epochs : cfg.params.W;
            detail::with_output(o.out, [&](std::ostream& os) {
                for (std::size_t e = o.start_epoch; e < o.start_epoch + count; ++e)
                    write_mask_line(os, e, derive_mask(Seed{cfg.campaign.master_seed, e}, cfg.params));
            });
        } else if (degradation->parsed()) {
            std::snprintf(buf, sizeof buf, "%.3f\n", degradation_db(cfg.params));
            std::cout << buf;
        } else if (pfa_cmd->parsed()) {
            std::snprintf(buf, sizeof buf, "%.3e\n", pfa(cfg.params, cfg.radio, cfg.analysis.threshold));
            std::cout << buf;
        } else if (pmd_cmd->parsed()) {
            const auto curve = pmd_curve(cfg.params, cfg.radio, cfg.analysis.threshold);
            detail::with_output(o.out, [&](std::ostream& os) { write_pmd_csv(os, curve); });
            if (!o.out.empty() && o.out != "-") {
                std::snprintf(buf, sizeof buf, "max pmd %.4e at s=%zu (log2 %.3f)\n", curve.max(),
                              curve.s_values[curve.argmax()], std::log2(curve.max()));
                std::cout << buf;
            }
        } else if (minr_cmd->parsed()) {
            const auto res = min_r_search(cfg.params.n, cfg.params.W, cfg.radio, cfg.analysis.target(),
                                          cfg.analysis.threshold);
            if (!res.feasible) {
                std::cout << "infeasible\n";
                std::cerr << "wmauth: no r < n meets the target\n";
                return kExitFailure;
            }
            std::cout << res.r << '\n';
        } else if (auth_cmd->parsed() || spoof_cmd->parsed()) {
            std::optional<SampleDump> dump;
            if (!o.dump_samples.empty()) {
                if (cfg.campaign.fidelity != Fidelity::Samples)
                    throw ConfigError("--dump-samples requires campaign.fidelity = samples");
                dump.emplace(o.dump_samples, cfg.radio, cfg.params.n);
            }
            SampleDump* sink = dump ? &*dump : nullptr;
            const auto res = auth_cmd->parsed() ? authentic_campaign(cfg, sink) : spoof_campaign(cfg, sink);
            write_campaign(o.out, res);
            std::size_t authentic = 0;
            for (const auto& row : res.decisions) authentic += row.verdict == Verdict::Authentic;
            std::cout << res.decisions.size() << " decisions, " << authentic << " authentic, W=" << res.W << '\n';
        }
    } catch (const ConfigError& e) {
        std::cerr << "wmauth: configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const DomainError& e) {
        std::cerr << "wmauth: configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const NumericalError& e) {
        std::cerr << "wmauth: numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "wmauth: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitOk;
}

} // namespace wmauth
