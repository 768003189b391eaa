#pragma once

#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mzimpact/asymptotics.hpp"
#include "mzimpact/cor.hpp"
#include "mzimpact/reduced_dde.hpp"
#include "mzimpact/regularity.hpp"

namespace mzimpact {

using json = nlohmann::json;

struct RunSettings {
    double eps = 3.5e-5;
    double t_end = 10.0;
    std::optional<double> kernel_horizon; // defaults to t_end
    double truncation_tol = 1e-10;
    double plateau_begin = 5.0;
    double plateau_end = 50.0;
    PlateauMethod plateau_method = PlateauMethod::mean;
    double regularity_floor = 1e-6;
    bool deterministic = true;
    std::size_t max_events = 10'000'000;
};

struct RunConfig {
    ModelFamily family;
    std::size_t size = 20;
    ContactConfig contact;
    HarmonicForcing forcing{2, 30.0, 13.0};
    TipInitialCondition ic{1, 1.056, 1.056};
    RunSettings run;
    std::vector<std::size_t> sweep_sizes; // empty: {size, 2 size}
    AsymptoticsOptions asymptotics;
};

namespace detail {

inline void reject_unknown(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
    if (!obj.is_object()) throw ValidationError(where + " must be an object");
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw ValidationError("unknown key " + (where.empty() ? "" : where + ".") + it.key());
}

inline double get_number(const json& obj, const std::string& key, const std::string& where, double def) {
    if (!obj.contains(key) || obj.at(key).is_null()) return def;
    const json& v = obj.at(key);
    if (!v.is_number()) throw ValidationError(where + "." + key + " must be a number");
    return v.get<double>();
}

inline std::size_t get_count(const json& obj, const std::string& key, const std::string& where, std::size_t def) {
    if (!obj.contains(key) || obj.at(key).is_null()) return def;
    const json& v = obj.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0)
        throw ValidationError(where + "." + key + " must be a nonnegative integer");
    return v.get<std::size_t>();
}

inline bool get_bool(const json& obj, const std::string& key, const std::string& where, bool def) {
    if (!obj.contains(key) || obj.at(key).is_null()) return def;
    if (!obj.at(key).is_boolean()) throw ValidationError(where + "." + key + " must be true or false");
    return obj.at(key).get<bool>();
}

inline json section(const json& root, const std::string& name) {
    if (!root.contains(name) || root.at(name).is_null()) return json::object();
    return root.at(name);
}

} // namespace detail

// key=value with a dotted key; the value is read as JSON when possible, else as a string
inline void apply_override(json& root, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ValidationError("override must look like key=value: " + assignment);
    const std::string key = assignment.substr(0, eq), text = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(text);
    } catch (const json::exception&) {
        value = text;
    }
    json* node = &root;
    std::stringstream ss(key);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) parts.push_back(part);
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        if (!node->contains(parts[i]) || (*node)[parts[i]].is_null()) (*node)[parts[i]] = json::object();
        node = &(*node)[parts[i]];
        if (!node->is_object()) throw ValidationError("override path " + key + " crosses a non-object");
    }
    (*node)[parts.back()] = value;
}

inline RunConfig config_from_json(const json& root) {
    using namespace detail;
    if (!root.is_object()) throw ValidationError("configuration must be a JSON object");
    reject_unknown(root, "", {"model", "contact", "forcing", "ic", "run", "regularity", "asymptotics"});
    RunConfig c;

    const json model = section(root, "model");
    reject_unknown(model, "model", {"type", "size", "beta", "gamma", "wave_speed", "damping"});
    if (!model.contains("type")) throw ValidationError("model.type required");
    if (!model.at("type").is_string()) throw ValidationError("model.type must be a string");
    const auto tag = parse_model_tag(model.at("type").get<std::string>());
    if (!tag) throw ValidationError("model.type must be one of euler-bernoulli, timoshenko, string");
    c.family.tag = *tag;
    const std::size_t def_size = *tag == ModelTag::timoshenko ? 20 : (*tag == ModelTag::string ? 64 : 50);
    c.size = get_count(model, "size", "model", def_size);
    c.family.beta = get_number(model, "beta", "model", 4800.0);
    c.family.gamma = get_number(model, "gamma", "model", 0.25);
    c.family.wave_speed = get_number(model, "wave_speed", "model", 1.0);
    c.family.damping = get_number(model, "damping", "model", 0.1);
    require(c.size >= 1, "model.size must be at least 1");
    if (*tag == ModelTag::timoshenko) require(c.size >= 8, "model.size must be at least 8 for timoshenko");
    require(c.family.beta > 0.0, "model.beta must be positive");
    require(c.family.gamma > 0.0, "model.gamma must be positive");
    require(c.family.wave_speed > 0.0, "model.wave_speed must be positive");
    require(c.family.damping >= 0.0 && c.family.damping < 1.0, "model.damping must lie in [0, 1)");

    const json contact = section(root, "contact");
    reject_unknown(contact, "contact", {"enabled", "stop", "restitution"});
    c.contact.contact_enabled = get_bool(contact, "enabled", "contact", true);
    c.contact.stop = get_number(contact, "stop", "contact", -0.05);
    c.contact.restitution = get_number(contact, "restitution", "contact", 1.0);
    require(c.contact.restitution >= 0.0 && c.contact.restitution <= 1.0, "contact.restitution must lie in [0, 1]");

    const json forcing = section(root, "forcing");
    reject_unknown(forcing, "forcing", {"mode", "amplitude", "frequency"});
    c.forcing.mode = get_count(forcing, "mode", "forcing", 2);
    c.forcing.amplitude = get_number(forcing, "amplitude", "forcing", 30.0);
    c.forcing.frequency = get_number(forcing, "frequency", "forcing", 13.0);
    require(c.forcing.frequency >= 0.0, "forcing.frequency must be nonnegative");
    require(c.forcing.mode <= c.size, "forcing.mode must not exceed model.size");

    const json ic = section(root, "ic");
    reject_unknown(ic, "ic", {"mode", "displacement", "velocity"});
    c.ic.mode = get_count(ic, "mode", "ic", 1);
    c.ic.displacement = get_number(ic, "displacement", "ic", 1.056);
    c.ic.velocity = get_number(ic, "velocity", "ic", 1.056);
    require(c.ic.mode >= 1 && c.ic.mode <= c.size, "ic.mode must lie in [1, model.size]");

    const json run = section(root, "run");
    reject_unknown(run, "run", {"eps", "t_end", "kernel_horizon", "truncation_tol", "plateau_window", "plateau_method",
                                "regularity_floor", "deterministic", "max_events"});
    c.run.eps = get_number(run, "eps", "run", 3.5e-5);
    c.run.t_end = get_number(run, "t_end", "run", 10.0);
    if (run.contains("kernel_horizon") && !run.at("kernel_horizon").is_null())
        c.run.kernel_horizon = get_number(run, "kernel_horizon", "run", 0.0);
    c.run.truncation_tol = get_number(run, "truncation_tol", "run", 1e-10);
    if (run.contains("plateau_window")) {
        const json& w = run.at("plateau_window");
        if (!w.is_array() || w.size() != 2 || !w[0].is_number() || !w[1].is_number())
            throw ValidationError("run.plateau_window must be [begin, end] in time steps");
        c.run.plateau_begin = w[0].get<double>();
        c.run.plateau_end = w[1].get<double>();
    }
    if (run.contains("plateau_method")) {
        const json& m = run.at("plateau_method");
        if (m == "mean") c.run.plateau_method = PlateauMethod::mean;
        else if (m == "intercept") c.run.plateau_method = PlateauMethod::intercept;
        else throw ValidationError("run.plateau_method must be mean or intercept");
    }
    c.run.regularity_floor = get_number(run, "regularity_floor", "run", 1e-6);
    c.run.deterministic = get_bool(run, "deterministic", "run", true);
    c.run.max_events = get_count(run, "max_events", "run", 10'000'000);
    require(c.run.eps > 0.0, "run.eps must be positive");
    require(c.run.t_end > 0.0, "run.t_end must be positive");
    require(!c.run.kernel_horizon || *c.run.kernel_horizon >= c.run.eps, "run.kernel_horizon must be at least run.eps");
    require(c.run.truncation_tol >= 0.0, "run.truncation_tol must be nonnegative");
    require(c.run.plateau_begin > 0.0 && c.run.plateau_end > c.run.plateau_begin,
            "run.plateau_window must satisfy 0 < begin < end");
    require(c.run.regularity_floor >= 0.0, "run.regularity_floor must be nonnegative");
    require(c.run.max_events >= 1, "run.max_events must be at least 1");
    c.contact.eps = c.run.eps;
    c.contact.t_end = c.run.t_end;
    c.contact.regularity_floor = c.run.regularity_floor;

    const json reg = section(root, "regularity");
    reject_unknown(reg, "regularity", {"sizes"});
    if (reg.contains("sizes")) {
        if (!reg.at("sizes").is_array()) throw ValidationError("regularity.sizes must be an array");
        for (const auto& v : reg.at("sizes")) {
            if (!v.is_number_integer() || v.get<long long>() < 1)
                throw ValidationError("regularity.sizes entries must be positive integers");
            c.sweep_sizes.push_back(v.get<std::size_t>());
        }
        require(c.sweep_sizes.size() >= 2, "regularity.sizes needs at least two entries");
        for (std::size_t i = 1; i < c.sweep_sizes.size(); ++i)
            require(c.sweep_sizes[i] > c.sweep_sizes[i - 1], "regularity.sizes must be strictly increasing");
    }

    const json as = section(root, "asymptotics");
    reject_unknown(as, "asymptotics", {"eta", "mode_factor", "delta_t", "incident_velocity"});
    c.asymptotics.eta = get_number(as, "eta", "asymptotics", 0.1);
    c.asymptotics.mode_factor = get_number(as, "mode_factor", "asymptotics", 2.0);
    c.asymptotics.incident_velocity = get_number(as, "incident_velocity", "asymptotics", -1.0);
    require(c.asymptotics.eta > 0.0 && c.asymptotics.eta < 1.0, "asymptotics.eta must lie in (0, 1)");
    require(c.asymptotics.mode_factor >= 1.0, "asymptotics.mode_factor must be at least 1");
    require(c.asymptotics.incident_velocity < 0.0, "asymptotics.incident_velocity must be negative (approaching)");
    if (as.contains("delta_t")) {
        if (!as.at("delta_t").is_array()) throw ValidationError("asymptotics.delta_t must be an array");
        for (const auto& v : as.at("delta_t")) {
            if (!v.is_number() || v.get<double>() <= 0.0)
                throw ValidationError("asymptotics.delta_t entries must be positive numbers");
            c.asymptotics.delta_t_grid.push_back(v.get<double>());
        }
    }
    return c;
}

inline json read_config_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) return json::object();
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("config is not valid JSON: ") + e.what());
    }
}

inline RunConfig parse_config(const std::string& path, const std::vector<std::string>& overrides = {}) {
    json root = read_config_json(path);
    if (!root.is_object()) throw ValidationError("configuration must be a JSON object");
    for (const auto& o : overrides) apply_override(root, o);
    return config_from_json(root);
}

} // namespace mzimpact
