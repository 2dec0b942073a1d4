#pragma once

// INI-style configuration:
//
//   [watermark]  n, r, W, family_id, code_file
//   [radio]      F, T, cn0_dbhz, P
//   [analysis]   threshold, target_bits
//   [campaign]   duration_s, strategies, w_override, master_seed, cn0_profile,
//                fidelity, spoof_power, noiseless, include_authentic
//
// Unknown sections or keys are rejected so typos do not silently fall back to
// defaults. Lines starting with ';' or '#' are comments.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "channel.hpp"
#include "error.hpp"
#include "watermark.hpp"

namespace wmauth {

/// C/N0 over a segment: evenly spaced knots joined linearly, so "30 45 30"
/// rises from 30 to 45 dB-Hz at mid-segment and falls back. One knot is a
/// constant profile.
class Cn0Profile {
public:
    Cn0Profile() : knots_{30.0} {}
    explicit Cn0Profile(std::vector<double> knots) : knots_(std::move(knots)) {
        if (knots_.empty()) throw ConfigError("cn0_profile: needs at least one value");
        for (double k : knots_)
            if (!std::isfinite(k)) throw ConfigError("cn0_profile: non-finite value");
    }

    /// C/N0 at fraction u in [0, 1] of the segment.
    double at(double u) const {
        if (knots_.size() == 1) return knots_[0];
        u = std::clamp(u, 0.0, 1.0) * static_cast<double>(knots_.size() - 1);
        const auto i = std::min(static_cast<std::size_t>(u), knots_.size() - 2);
        const double f = u - static_cast<double>(i);
        return knots_[i] + f * (knots_[i + 1] - knots_[i]);
    }

    bool constant() const { return knots_.size() == 1; }
    const std::vector<double>& knots() const { return knots_; }

private:
    std::vector<double> knots_;
};

enum class Fidelity {
    Samples,    ///< full sample blocks: resample, AWGN per sample, matched filters
    Correlator, ///< exact chip-level correlation plus the filter-output noise drawn directly
};

struct AnalysisSettings {
    double threshold = 1.0;
    double target_bits = 32.0;
    double target() const { return std::exp2(-target_bits); }
};

struct CampaignSettings {
    double duration_s = 150.0;
    std::vector<std::size_t> strategies{0, 200, 400, 600, 800, 1023};
    std::optional<std::size_t> w_override;
    std::vector<std::uint8_t> master_seed = default_seed();
    std::optional<Cn0Profile> cn0_profile; ///< unset: constant radio.cn0_dbhz
    Fidelity fidelity = Fidelity::Correlator;
    std::optional<double> spoof_power;     ///< unset: same power as the authentic signal
    bool noiseless = false;
    bool include_authentic = true;         ///< spoof runs also carry an authentic segment

    static std::vector<std::uint8_t> default_seed() {
        return parse_hex("000102030405060708090a0b0c0d0e0f");
    }
};

struct Config {
    WatermarkParams params;
    RadioModel radio;
    int family_id = 1;
    std::optional<std::string> code_file;
    AnalysisSettings analysis;
    CampaignSettings campaign;

    RangingCode base_code() const {
        if (code_file) {
            std::ifstream in(*code_file);
            if (!in) throw ConfigError("cannot open code file " + *code_file);
            auto code = read_code(in);
            if (code.size() != params.n)
                throw ConfigError("code file has " + std::to_string(code.size()) + " chips, expected n = " +
                                  std::to_string(params.n));
            return code;
        }
        return generate_base_code(family_id, params.n);
    }

    void validate() const {
        params.validate();
        radio.validate(params.n);
        if (!(analysis.target_bits > 0.0)) throw ConfigError("analysis: target_bits must be positive");
        if (!std::isfinite(analysis.threshold)) throw ConfigError("analysis: threshold must be finite");
        for (std::size_t s : campaign.strategies)
            if (s > params.n) throw ConfigError("campaign: strategy s=" + std::to_string(s) + " exceeds n");
        if (campaign.w_override && *campaign.w_override == 0) throw ConfigError("campaign: w_override must be >= 1");
        if (!(campaign.duration_s > 0.0)) throw ConfigError("campaign: duration_s must be positive");
        if (campaign.spoof_power && !(*campaign.spoof_power > 0.0))
            throw ConfigError("campaign: spoof_power must be positive");
        if (campaign.master_seed.size() < 16 || campaign.master_seed.size() > 64)
            throw ConfigError("campaign: master_seed must be 16..64 bytes of hex");
    }
};

namespace detail {

inline double to_double(const std::string& key, const std::string& text) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (...) {
        used = 0;
    }
    if (used == 0 || text.find_first_not_of(" \t", used) != std::string::npos)
        throw ConfigError("config: '" + key + "' expects a number, got '" + text + "'");
    return v;
}

inline std::size_t to_count(const std::string& key, double v) {
    if (v < 0.0 || v != std::floor(v) || v > 1e15)
        throw ConfigError("config: '" + key + "' expects a non-negative integer, got " + std::to_string(v));
    return static_cast<std::size_t>(v);
}

inline std::size_t to_count(const std::string& key, const std::string& text) {
    return to_count(key, to_double(key, text));
}

inline bool to_bool(const std::string& key, const std::string& text) {
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw ConfigError("config: '" + key + "' expects true/false, got '" + text + "'");
}

inline std::vector<double> to_list(const std::string& key, const std::string& text) {
    std::string spaced = text;
    std::replace(spaced.begin(), spaced.end(), ',', ' ');
    std::istringstream is(spaced);
    std::vector<double> out;
    std::string tok;
    while (is >> tok) out.push_back(to_double(key, tok));
    return out;
}

} // namespace detail

inline Config parse_config(std::istream& in) {
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }

    Config cfg;
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty())
            throw ConfigError("config: key '" + section + "' outside of any section");
        for (const auto& [key, node] : body) {
            const std::string value = node.get_value<std::string>();
            const std::string name = section + "." + key;
            if (section == "watermark") {
                if (key == "n") cfg.params.n = detail::to_count(name, value);
                else if (key == "r") cfg.params.r = detail::to_count(name, value);
                else if (key == "W") cfg.params.W = detail::to_count(name, value);
                else if (key == "family_id") cfg.family_id = static_cast<int>(detail::to_count(name, value));
                else if (key == "code_file") cfg.code_file = value;
                else throw ConfigError("config: unknown key " + name);
            } else if (section == "radio") {
                if (key == "F") cfg.radio.F = detail::to_double(name, value);
                else if (key == "T") cfg.radio.T = detail::to_double(name, value);
                else if (key == "cn0_dbhz") cfg.radio.cn0_dbhz = detail::to_double(name, value);
                else if (key == "P") cfg.radio.P = detail::to_double(name, value);
                else throw ConfigError("config: unknown key " + name);
            } else if (section == "analysis") {
                if (key == "threshold") cfg.analysis.threshold = detail::to_double(name, value);
                else if (key == "target_bits") cfg.analysis.target_bits = detail::to_double(name, value);
                else throw ConfigError("config: unknown key " + name);
            } else if (section == "campaign") {
                auto& c = cfg.campaign;
                if (key == "duration_s") c.duration_s = detail::to_double(name, value);
                else if (key == "strategies") {
                    c.strategies.clear();
                    for (double s : detail::to_list(name, value))
                        c.strategies.push_back(detail::to_count(name, s));
                } else if (key == "w_override") {
                    if (!value.empty() && value != "none") c.w_override = detail::to_count(name, value);
                } else if (key == "master_seed") c.master_seed = parse_hex(value);
                else if (key == "cn0_profile") {
                    if (!value.empty() && value != "constant") c.cn0_profile = Cn0Profile(detail::to_list(name, value));
                } else if (key == "fidelity") {
                    if (value == "samples") c.fidelity = Fidelity::Samples;
                    else if (value == "correlator") c.fidelity = Fidelity::Correlator;
                    else throw ConfigError("config: fidelity must be 'samples' or 'correlator'");
                } else if (key == "spoof_power") c.spoof_power = detail::to_double(name, value);
                else if (key == "noiseless") c.noiseless = detail::to_bool(name, value);
                else if (key == "include_authentic") c.include_authentic = detail::to_bool(name, value);
                else throw ConfigError("config: unknown key " + name);
            } else {
                throw ConfigError("config: unknown section [" + section + "]");
            }
        }
    }
    cfg.validate();
    return cfg;
}

inline Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    return parse_config(in);
}

} // namespace wmauth
