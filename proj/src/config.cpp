#include "rxbar/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rxbar/errors.hpp"

namespace rxbar {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const char* where,
                    std::initializer_list<const char*> known) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : known)
            if (it.key() == k) ok = true;
        if (!ok)
            throw_parse(std::string("config: unknown key '") + where + it.key() + "'");
    }
}

double num(const json& v, const char* name) {
    if (!v.is_number())
        throw_config(std::string("config: field '") + name + "' must be a number");
    return v.get<double>();
}

bool boolean(const json& v, const char* name) {
    if (!v.is_boolean())
        throw_config(std::string("config: field '") + name + "' must be a boolean");
    return v.get<bool>();
}

} // namespace

void ToolConfig::validate() const {
    device.validate();
    variation.validate();
    if (!(selector_r >= 0.0)) throw_config("config: selector_r must be >= 0");
    if (levels < 2 || levels > 64) throw_config("config: levels must be in [2, 64]");
}

ToolConfig parse_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw_parse(std::string("config: ") + e.what());
    }
    if (!root.is_object()) throw_parse("config: top level must be an object");
    reject_unknown(root, "", {"device", "variation", "selector_r", "levels"});

    ToolConfig cfg;
    if (root.contains("device")) {
        const json& d = root["device"];
        if (!d.is_object()) throw_parse("config: 'device' must be an object");
        reject_unknown(d, "device.",
                       {"r_on", "r_off", "v_set_th", "v_reset_th", "k_set", "k_reset",
                        "alpha_set", "alpha_reset", "reset_rate_floor"});
        if (d.contains("r_on")) cfg.device.r_on = num(d["r_on"], "device.r_on");
        if (d.contains("r_off")) cfg.device.r_off = num(d["r_off"], "device.r_off");
        if (d.contains("v_set_th")) cfg.device.v_set_th = num(d["v_set_th"], "device.v_set_th");
        if (d.contains("v_reset_th"))
            cfg.device.v_reset_th = num(d["v_reset_th"], "device.v_reset_th");
        if (d.contains("k_set")) cfg.device.k_set = num(d["k_set"], "device.k_set");
        if (d.contains("k_reset")) cfg.device.k_reset = num(d["k_reset"], "device.k_reset");
        if (d.contains("alpha_set"))
            cfg.device.alpha_set = num(d["alpha_set"], "device.alpha_set");
        if (d.contains("alpha_reset"))
            cfg.device.alpha_reset = num(d["alpha_reset"], "device.alpha_reset");
        if (d.contains("reset_rate_floor"))
            cfg.device.reset_rate_floor = num(d["reset_rate_floor"], "device.reset_rate_floor");
    }
    if (root.contains("variation")) {
        const json& v = root["variation"];
        if (!v.is_object()) throw_parse("config: 'variation' must be an object");
        reject_unknown(v, "variation.",
                       {"d2d_enabled", "c2c_enabled", "d2d_sigma_r", "d2d_sigma_th",
                        "c2c_sigma_th", "c2c_sigma_rate"});
        if (v.contains("d2d_enabled"))
            cfg.variation.d2d_enabled = boolean(v["d2d_enabled"], "variation.d2d_enabled");
        if (v.contains("c2c_enabled"))
            cfg.variation.c2c_enabled = boolean(v["c2c_enabled"], "variation.c2c_enabled");
        if (v.contains("d2d_sigma_r"))
            cfg.variation.d2d_sigma_r = num(v["d2d_sigma_r"], "variation.d2d_sigma_r");
        if (v.contains("d2d_sigma_th"))
            cfg.variation.d2d_sigma_th = num(v["d2d_sigma_th"], "variation.d2d_sigma_th");
        if (v.contains("c2c_sigma_th"))
            cfg.variation.c2c_sigma_th = num(v["c2c_sigma_th"], "variation.c2c_sigma_th");
        if (v.contains("c2c_sigma_rate"))
            cfg.variation.c2c_sigma_rate = num(v["c2c_sigma_rate"], "variation.c2c_sigma_rate");
    }
    if (root.contains("selector_r")) cfg.selector_r = num(root["selector_r"], "selector_r");
    if (root.contains("levels")) {
        if (!root["levels"].is_number_integer())
            throw_config("config: field 'levels' must be an integer");
        cfg.levels = root["levels"].get<int>();
    }
    cfg.validate();
    return cfg;
}

ToolConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw_io("config: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string dump_config(const ToolConfig& cfg) {
    json root;
    root["device"] = {{"r_on", cfg.device.r_on},
                      {"r_off", cfg.device.r_off},
                      {"v_set_th", cfg.device.v_set_th},
                      {"v_reset_th", cfg.device.v_reset_th},
                      {"k_set", cfg.device.k_set},
                      {"k_reset", cfg.device.k_reset},
                      {"alpha_set", cfg.device.alpha_set},
                      {"alpha_reset", cfg.device.alpha_reset},
                      {"reset_rate_floor", cfg.device.reset_rate_floor}};
    root["variation"] = {{"d2d_enabled", cfg.variation.d2d_enabled},
                         {"c2c_enabled", cfg.variation.c2c_enabled},
                         {"d2d_sigma_r", cfg.variation.d2d_sigma_r},
                         {"d2d_sigma_th", cfg.variation.d2d_sigma_th},
                         {"c2c_sigma_th", cfg.variation.c2c_sigma_th},
                         {"c2c_sigma_rate", cfg.variation.c2c_sigma_rate}};
    root["selector_r"] = cfg.selector_r;
    root["levels"] = cfg.levels;
    return root.dump(2) + "\n";
}

LevelConfig make_ladder(const ToolConfig& cfg, int n_levels) {
    LevelConfig lv = make_level_targets(cfg.device, n_levels);
    calibrate_reset_amplitudes(lv, cfg.device);
    return lv;
}

} // namespace rxbar
