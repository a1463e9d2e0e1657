#include "config.hpp"

#include <fstream>

#include "resonette/errors.hpp"

namespace cli {

using nlohmann::json;

Config Config::load(const std::string& path, Overrides ov) {
    if (path.empty()) return Config(json::object(), ov);
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    json doc;
    try {
        doc = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    if (!doc.is_object()) throw ConfigError(path + ": top level must be an object");
    return Config(std::move(doc), ov);
}

double Config::h(double fallback) const { return ov_.h ? *ov_.h : number("h", fallback); }
double Config::mu(double fallback) const { return ov_.mu ? *ov_.mu : number("mu", fallback); }
double Config::theta(double fallback) const { return ov_.theta ? *ov_.theta : number("theta", fallback); }

double Config::number(const std::string& key, double fallback) const {
    if (!doc_.contains(key)) return fallback;
    if (!doc_[key].is_number()) throw ConfigError("'" + key + "' must be a number");
    return doc_[key].get<double>();
}

int Config::integer(const std::string& key, int fallback) const {
    if (!doc_.contains(key)) return fallback;
    if (!doc_[key].is_number_integer()) throw ConfigError("'" + key + "' must be an integer");
    return doc_[key].get<int>();
}

bool Config::flag(const std::string& key, bool fallback) const {
    if (!doc_.contains(key)) return fallback;
    if (!doc_[key].is_boolean()) throw ConfigError("'" + key + "' must be true or false");
    return doc_[key].get<bool>();
}

std::vector<double> Config::numbers(const std::string& key, std::vector<double> fallback) const {
    if (!doc_.contains(key)) return fallback;
    try {
        return doc_[key].get<std::vector<double>>();
    } catch (const json::exception&) {
        throw ConfigError("'" + key + "' must be an array of numbers");
    }
}

std::vector<int> Config::integers(const std::string& key, std::vector<int> fallback) const {
    if (!doc_.contains(key)) return fallback;
    try {
        return doc_[key].get<std::vector<int>>();
    } catch (const json::exception&) {
        throw ConfigError("'" + key + "' must be an array of integers");
    }
}

std::vector<double> Config::h_list(std::vector<double> fallback) const {
    if (ov_.h) return {*ov_.h};
    return numbers("h_list", std::move(fallback));
}

const json& Config::section(const std::string& key) const {
    static const json empty = json::object();
    if (!doc_.contains(key)) return empty;
    if (!doc_[key].is_object()) throw ConfigError("'" + key + "' must be an object");
    return doc_[key];
}

resonette::PotentialSpec Config::potential(const std::string& fallback_name) const {
    const json& p = section("potential");
    const std::string name = p.value("name", fallback_name);
    std::map<std::string, double> params;
    if (p.contains("params")) {
        try {
            params = p["params"].get<std::map<std::string, double>>();
        } catch (const json::exception&) {
            throw ConfigError("potential.params must map names to numbers");
        }
    }
    try {
        return resonette::make_potential(name, params);
    } catch (const resonette::ValidationError& e) {
        throw ConfigError(e.what());
    }
}

resonette::ApproximationParams Config::approximation(resonette::ApproximationParams base) const {
    const json& a = section("approximation");
    try {
        base.order = a.value("order", base.order);
        base.nu_tilde = a.value("nu_tilde", base.nu_tilde);
        base.glue_sharpness = a.value("glue_sharpness", base.glue_sharpness);
        base.mu_max = a.value("mu_max", base.mu_max);
        base.contour.panel_over_mu = a.value("panel_over_mu", base.contour.panel_over_mu);
        base.contour.points_per_panel = a.value("points_per_panel", base.contour.points_per_panel);
        base.contour.tolerance = a.value("tolerance", base.contour.tolerance);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("approximation: ") + e.what());
    }
    return base;
}

GridChoice grid_choice(const Config& c) {
    GridChoice g;
    const json& s = c.section("grid");
    try {
        if (s.contains("geometry")) g.geometry = resonette::geometry_from_string(s["geometry"].get<std::string>());
        g.dx_over_h = s.value("dx_over_h", g.dx_over_h);
        g.margin = s.value("margin", g.margin);
        g.scheme = s.value("scheme", g.scheme);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("grid: ") + e.what());
    } catch (const resonette::ValidationError& e) {
        throw ConfigError(e.what());
    }
    return g;
}

}  // namespace cli
