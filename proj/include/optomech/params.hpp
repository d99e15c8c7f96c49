#pragma once

/**
 * @file params.hpp
 * @brief System configuration, validation and the derived constants used by every solver.
 *
 * All frequencies and rates are angular (rad/s). A configuration document may give any
 * rate either directly (`"omega_m": 1.0e7`) or as a frequency in Hz through the sibling
 * key `<name>_2pi_hz` (`"omega_m_2pi_hz": 350000.0`); the factor 2*pi is applied once,
 * at load time.
 */

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "optomech/constants.hpp"
#include "optomech/errors.hpp"

namespace optomech {

/// Laboratory inputs, SI units, rates in rad/s.
struct SystemConfig {
    double L = 0.0;         ///< cavity length [m]
    double m = 0.0;         ///< effective mirror mass [kg]
    double lambda = 0.0;    ///< drive wavelength [m]
    double omega_m = 0.0;   ///< mechanical angular frequency
    double Q_m = 0.0;       ///< mechanical quality factor
    double kappa_A = 0.0;   ///< cavity A amplitude decay rate
    double kappa_C = 0.0;   ///< cavity C amplitude decay rate
    double Delta_A = 0.0;   ///< omega_A - omega_L
    double Delta_C = 0.0;   ///< omega_C - omega_L
    double Delta_at = 0.0;  ///< omega_at - omega_L
    double gamma_at = 0.0;  ///< atomic coherence decay rate
    double g_at = 0.0;      ///< atom-cavity coupling
    double N_atoms = 0.0;
    double P_in = 0.0;      ///< drive power into cavity A [W]
    double T_bath = 0.0;    ///< [K]
    bool feedback_enabled = false;

    bool operator==(const SystemConfig&) const = default;
};

/// Constants computed once from a SystemConfig.
struct DerivedParams {
    double omega_L = 0.0;  ///< 2 pi c / lambda
    double g_OM = 0.0;     ///< omega_L / L, rad/(s m)
    double chi = 0.0;      ///< scaled single-photon coupling
    double gamma_m = 0.0;  ///< omega_m / Q_m
    double J = 0.0;        ///< inter-cavity coupling, 0 without feedback
    double eps_A = 0.0;    ///< drive amplitude, sqrt(photons)/s

    bool operator==(const DerivedParams&) const = default;
};

/// Throws ConfigError naming the first field that violates its invariant.
inline void validate(const SystemConfig& cfg) {
    auto positive = [](double v, const char* key) {
        if (!std::isfinite(v) || !(v > 0.0)) throw ConfigError(key, "must be finite and > 0");
    };
    auto finite = [](double v, const char* key) {
        if (!std::isfinite(v)) throw ConfigError(key, "must be finite");
    };
    positive(cfg.L, "L");
    positive(cfg.m, "m");
    positive(cfg.lambda, "lambda");
    positive(cfg.omega_m, "omega_m");
    finite(cfg.Q_m, "Q_m");
    if (!(cfg.Q_m >= 1.0)) throw ConfigError("Q_m", "must be >= 1");
    positive(cfg.kappa_A, "kappa_A");
    positive(cfg.kappa_C, "kappa_C");
    finite(cfg.Delta_A, "Delta_A");
    finite(cfg.Delta_C, "Delta_C");
    finite(cfg.Delta_at, "Delta_at");
    positive(cfg.gamma_at, "gamma_at");
    positive(cfg.g_at, "g_at");
    finite(cfg.N_atoms, "N_atoms");
    if (cfg.N_atoms < 0.0) throw ConfigError("N_atoms", "must be >= 0");
    positive(cfg.P_in, "P_in");
    positive(cfg.T_bath, "T_bath");
}

/// Uses omega_A = omega_L when forming g_OM and chi.
inline DerivedParams derive(const SystemConfig& cfg) {
    using namespace constants;
    DerivedParams d;
    d.omega_L = two_pi * c / cfg.lambda;
    d.g_OM = d.omega_L / cfg.L;
    d.chi = d.g_OM * std::sqrt(hbar / (cfg.m * cfg.omega_m)) / cfg.omega_m;
    d.gamma_m = cfg.omega_m / cfg.Q_m;
    d.J = cfg.feedback_enabled ? std::sqrt(cfg.kappa_A * cfg.kappa_C) : 0.0;
    d.eps_A = std::sqrt(2.0 * cfg.kappa_A * cfg.P_in / (hbar * d.omega_L));
    return d;
}

inline SystemConfig with_power(SystemConfig cfg, double P_in) {
    cfg.P_in = P_in;
    return cfg;
}

inline SystemConfig with_detuning(SystemConfig cfg, double Delta_A) {
    cfg.Delta_A = Delta_A;
    return cfg;
}

inline SystemConfig with_feedback(SystemConfig cfg, bool enabled) {
    cfg.feedback_enabled = enabled;
    return cfg;
}

struct LoadedConfig {
    SystemConfig config;
    std::vector<std::string> warnings;
};

namespace detail {

struct FieldSpec {
    std::string_view key;
    double SystemConfig::*field;
    bool accepts_hz;
};

inline constexpr FieldSpec kNumericFields[] = {
    {"L", &SystemConfig::L, false},
    {"m", &SystemConfig::m, false},
    {"lambda", &SystemConfig::lambda, false},
    {"omega_m", &SystemConfig::omega_m, true},
    {"Q_m", &SystemConfig::Q_m, false},
    {"kappa_A", &SystemConfig::kappa_A, true},
    {"kappa_C", &SystemConfig::kappa_C, true},
    {"Delta_A", &SystemConfig::Delta_A, true},
    {"Delta_C", &SystemConfig::Delta_C, true},
    {"Delta_at", &SystemConfig::Delta_at, true},
    {"gamma_at", &SystemConfig::gamma_at, true},
    {"g_at", &SystemConfig::g_at, true},
    {"N_atoms", &SystemConfig::N_atoms, false},
    {"P_in", &SystemConfig::P_in, false},
    {"T_bath", &SystemConfig::T_bath, false},
};

inline constexpr std::string_view kHzSuffix = "_2pi_hz";

inline double number_at(const nlohmann::json& doc, const std::string& key) {
    const auto& v = doc.at(key);
    if (!v.is_number()) throw ConfigError(key, "expected a number");
    return v.get<double>();
}

/// Applies `key=value` overrides. A plain key displaces its `_2pi_hz` sibling and vice versa.
inline void apply_overrides(nlohmann::json& doc, const std::vector<std::string>& overrides) {
    for (const auto& item : overrides) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError(item, "override must look like key=value");
        const std::string key = item.substr(0, eq);
        nlohmann::json value;
        try {
            value = nlohmann::json::parse(item.substr(eq + 1));
        } catch (const nlohmann::json::exception&) {
            throw ConfigError(key, "override value is not a JSON scalar");
        }
        std::string base = key;
        if (base.size() > kHzSuffix.size() && base.ends_with(kHzSuffix)) {
            base.resize(base.size() - kHzSuffix.size());
            doc.erase(base);
        } else {
            doc.erase(base + std::string(kHzSuffix));
        }
        doc[key] = value;
    }
}

}  // namespace detail

/// Parses a flat JSON document into a validated SystemConfig.
inline LoadedConfig parse_config(std::string_view text, const std::vector<std::string>& overrides = {}) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("", std::string("parse failure: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("", "parse failure: top level must be an object");
    detail::apply_overrides(doc, overrides);

    LoadedConfig out;
    std::vector<std::string> known;
    for (const auto& f : detail::kNumericFields) {
        const std::string key(f.key);
        const std::string hz_key = key + std::string(detail::kHzSuffix);
        const bool has_plain = doc.contains(key);
        const bool has_hz = f.accepts_hz && doc.contains(hz_key);
        if (has_plain && has_hz) throw ConfigError(key, "given both as rad/s and as " + hz_key);
        if (has_plain) {
            out.config.*f.field = detail::number_at(doc, key);
        } else if (has_hz) {
            out.config.*f.field = constants::two_pi * detail::number_at(doc, hz_key);
        } else {
            throw ConfigError(key, "missing key");
        }
        known.push_back(key);
        if (f.accepts_hz) known.push_back(hz_key);
    }
    if (!doc.contains("feedback_enabled")) throw ConfigError("feedback_enabled", "missing key");
    if (!doc["feedback_enabled"].is_boolean()) throw ConfigError("feedback_enabled", "expected true or false");
    out.config.feedback_enabled = doc["feedback_enabled"].get<bool>();
    known.emplace_back("feedback_enabled");

    for (const auto& [key, _] : doc.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end())
            out.warnings.push_back("unknown key '" + key + "' ignored");
    }
    validate(out.config);
    return out;
}

inline LoadedConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {}) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), overrides);
}

}  // namespace optomech
