#pragma once

#include <cmath>
#include <fstream>
#include <string>

#include "../support/draws.hpp"
#include "catch_amalgamated.hpp"
#include "json.hpp"
#include "optomech/optomech.hpp"

namespace th {

inline const nlohmann::json& golden() {
    static const nlohmann::json doc = [] {
        std::ifstream in(OPTOMECH_GOLDEN);
        REQUIRE(in);
        return nlohmann::json::parse(in);
    }();
    return doc;
}

/// Golden values are stored as 25-digit strings.
inline double gold(const std::string& key) { return std::stod(golden().at(key).get<std::string>()); }
inline double gold(const std::string& key, std::size_t i) {
    return std::stod(golden().at(key).at(i).get<std::string>());
}
inline optomech::complex gold_c(const std::string& key) { return {gold(key, 0), gold(key, 1)}; }

inline optomech::SystemConfig preset(const std::string& name) {
    return optomech::load_config(std::string(OPTOMECH_PRESETS) + "/" + name + ".json").config;
}

inline double rel(double a, double b) {
    if (a == b) return 0.0;
    return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}
inline double rel(optomech::complex a, optomech::complex b) {
    if (a == b) return 0.0;
    return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

using draws::log_uniform;
using draws::random_config;

}  // namespace th
