#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "resonette/approximation.hpp"
#include "resonette/ladder.hpp"
#include "resonette/operator.hpp"
#include "resonette/potential.hpp"

namespace cli {

// Thrown for anything the user can fix in the config or on the command line (exit code 2).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Overrides {
    std::optional<double> h, mu, theta;
};

// Config file merged with command-line overrides. Keys missing from the file take library defaults.
class Config {
public:
    Config() = default;
    Config(nlohmann::json doc, Overrides ov) : doc_(std::move(doc)), ov_(ov) {}

    static Config load(const std::string& path, Overrides ov);

    double h(double fallback) const;
    double mu(double fallback) const;
    double theta(double fallback) const;
    bool has(const std::string& key) const { return doc_.contains(key); }
    double number(const std::string& key, double fallback) const;
    int integer(const std::string& key, int fallback) const;
    bool flag(const std::string& key, bool fallback) const;
    std::vector<double> numbers(const std::string& key, std::vector<double> fallback) const;
    std::vector<int> integers(const std::string& key, std::vector<int> fallback) const;
    // h_list, or the single --h override when given.
    std::vector<double> h_list(std::vector<double> fallback) const;

    resonette::PotentialSpec potential(const std::string& fallback_name) const;
    resonette::ApproximationParams approximation(resonette::ApproximationParams base) const;
    const nlohmann::json& section(const std::string& key) const;
    const nlohmann::json& raw() const { return doc_; }

private:
    nlohmann::json doc_ = nlohmann::json::object();
    Overrides ov_;
};

struct GridChoice {
    resonette::Geometry geometry = resonette::Geometry::half_even;
    double dx_over_h = 0.2;
    double margin = 3.0;
    int scheme = 4;
};

GridChoice grid_choice(const Config& c);

}  // namespace cli
