#pragma once

// Experiment and pipeline configuration, with the JSON config-file schema.
//
// Config file (every section and key optional; unknown keys are rejected):
// {
//   "radar":      {"f0", "carriers", "freq_step", "pulse_width", "sample_rate",
//                  "bandwidth", "pri", "pulses", "scr_db", "gate_start"},
//   "scene":      {"range0", "range_jitter", "size_jitter", "ship_length", "ship_points",
//                  "reflector_count", "reflector_spacing", "reflector_height",
//                  "attitude": {"ship_roll_deg", "ship_pitch_deg", "ship_yaw_deg",
//                               "ship_period_min", "ship_period_max", "reflector_scale",
//                               "reflector_period_min", "reflector_period_max"}},
//   "processing": {"v_min", "v_max", "v_step", "pad_factor", "window", "crop_half_width"},
//   "features":   {"threshold_db", "max_points", "weight_mode", "weighted_fit"},
//   "plan":       {"wave_heights", "azimuths", "elevation", "maps_per_condition",
//                  "split_ratio", "master_seed", "pooled"},
//   "gbdt":       {"n_trees", "max_depth", "learning_rate", "subsample",
//                  "colsample_bytree", "reg_lambda", "gamma", "min_child_weight",
//                  "base_score", "seed"}
// }
// Units are SI (Hz, s, m, m/s) except angles in degrees and levels in dB.
// "gate_start" and "v_step" may be null: the gate is then centred on range0
// and the velocity step is one velocity resolution cell.

#include <fstream>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rvdisc/echo.hpp"
#include "rvdisc/features.hpp"
#include "rvdisc/gbdt.hpp"
#include "rvdisc/rvmap.hpp"
#include "rvdisc/scene.hpp"

namespace rvdisc {

struct SceneConfig {
    double range0 = 10'000.0;
    double range_jitter = 5.0;  // target centre drawn uniformly in range0 +- this, per map
    double size_jitter = 0.05;  // ship length / reflector spacing scaled by 1 +- this, per map
    double ship_length = 144.0;
    int ship_points = 8;
    int reflector_count = 4;
    double reflector_spacing = 42.16;  // static range spread equal to the default ship
    double reflector_height = 3.0;  // phase centre above the float pivot
    AttitudeModel attitude{};

    TargetModel target(TargetKind kind, double scale = 1.0) const {
        return kind == TargetKind::Ship
                   ? make_ship(scale * ship_length, ship_points)
                   : make_reflector_array(reflector_count, scale * reflector_spacing, reflector_height);
    }
};

struct ProcessingConfig {
    double v_min = -3.0;
    double v_max = 3.0;
    std::optional<double> v_step;  // default: velocity resolution
    int pad_factor = 4;
    Window window = Window::Hamming;
    double crop_half_width = 100.0;  // m kept either side of range0
};

struct PipelineConfig {
    RadarParams radar{};
    std::optional<double> gate_start;  // default: window centred on range0
    SceneConfig scene{};
    ProcessingConfig processing{};
    FeatureConfig features{};

    /// Radar parameters with the receive gate resolved.
    RadarParams radar_for_scene() const {
        RadarParams p = radar;
        p.gate_start = gate_start.value_or(scene.range0 - 0.5 * radar.window_length());
        return p;
    }

    VelocityGrid velocity_grid() const {
        return {processing.v_min, processing.v_max, processing.v_step.value_or(velocity_resolution(radar))};
    }

    RvMapOptions map_options() const {
        RvMapOptions o;
        o.hrrp = {processing.pad_factor, processing.window};
        o.crop_min = scene.range0 - processing.crop_half_width;
        o.crop_max = scene.range0 + processing.crop_half_width;
        return o;
    }
};

struct ExperimentPlan {
    std::vector<double> wave_heights = {0.1, 1.0, 2.0};
    std::vector<double> azimuths = default_azimuths();
    double elevation = 2.0;
    int maps_per_condition = 10;
    double split_ratio = 0.7;
    std::uint64_t master_seed = 2024;
    bool pooled = false;  // one model over all wave heights instead of one per height

    static std::vector<double> default_azimuths() {
        std::vector<double> a;
        for (int d = 10; d <= 170; d += 10) a.push_back(d);
        return a;
    }

    static constexpr int kPaperMapsPerCondition = 100;

    std::size_t row_count() const {
        return wave_heights.size() * azimuths.size() * 2 * static_cast<std::size_t>(maps_per_condition);
    }

    void validate() const {
        if (wave_heights.empty()) throw std::invalid_argument("plan: no wave heights");
        if (azimuths.empty()) throw std::invalid_argument("plan: no azimuths");
        for (double h : wave_heights)
            if (!(h >= 0.0) || !std::isfinite(h)) throw std::invalid_argument("plan: wave heights must be finite and >= 0");
        for (double a : azimuths)
            if (!(a >= 0.0 && a <= 180.0)) throw std::invalid_argument("plan: azimuths must lie in [0, 180]");
        if (!(split_ratio > 0.0 && split_ratio < 1.0)) throw std::invalid_argument("plan: split_ratio must lie in (0, 1)");
        if (maps_per_condition < 1) throw std::invalid_argument("plan: maps_per_condition must be >= 1");
        if (!(elevation > -90.0 && elevation < 90.0)) throw std::invalid_argument("plan: elevation must lie in (-90, 90)");
    }
};

struct Settings {
    PipelineConfig pipeline{};
    ExperimentPlan plan{};
    gbdt::Config gbdt{};
};

namespace detail {

inline void check_keys(const nlohmann::json& j, const std::string& section, std::initializer_list<const char*> keys) {
    if (!j.is_object()) throw std::invalid_argument("config: section '" + section + "' must be an object");
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* k : keys) known = known || item.key() == k;
        if (!known) throw std::invalid_argument("config: unknown key '" + section + "." + item.key() + "'");
    }
}

template <class T>
void read(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

template <class T>
void read(const nlohmann::json& j, const char* key, std::optional<T>& out) {
    if (!j.contains(key)) return;
    if (j.at(key).is_null())
        out.reset();
    else
        out = j.at(key).get<T>();
}

}  // namespace detail

inline nlohmann::json to_json(const Settings& s) {
    const auto& r = s.pipeline.radar;
    const auto& sc = s.pipeline.scene;
    const auto& a = sc.attitude;
    const auto& pr = s.pipeline.processing;
    const auto& f = s.pipeline.features;
    const auto& pl = s.plan;
    nlohmann::json j;
    j["radar"] = {{"f0", r.f0},
                  {"carriers", r.carriers},
                  {"freq_step", r.freq_step},
                  {"pulse_width", r.pulse_width},
                  {"sample_rate", r.sample_rate},
                  {"bandwidth", r.bandwidth},
                  {"pri", r.pri},
                  {"pulses", r.pulses},
                  {"scr_db", r.scr_db},
                  {"gate_start", s.pipeline.gate_start ? nlohmann::json(*s.pipeline.gate_start) : nlohmann::json()}};
    j["scene"] = {{"range0", sc.range0},
                  {"range_jitter", sc.range_jitter},
                  {"size_jitter", sc.size_jitter},
                  {"ship_length", sc.ship_length},
                  {"ship_points", sc.ship_points},
                  {"reflector_count", sc.reflector_count},
                  {"reflector_spacing", sc.reflector_spacing},
                  {"reflector_height", sc.reflector_height},
                  {"attitude",
                   {{"ship_roll_deg", a.ship_roll_deg},
                    {"ship_pitch_deg", a.ship_pitch_deg},
                    {"ship_yaw_deg", a.ship_yaw_deg},
                    {"ship_period_min", a.ship_period_min},
                    {"ship_period_max", a.ship_period_max},
                    {"reflector_scale", a.reflector_scale},
                    {"reflector_period_min", a.reflector_period_min},
                    {"reflector_period_max", a.reflector_period_max}}}};
    j["processing"] = {{"v_min", pr.v_min},
                       {"v_max", pr.v_max},
                       {"v_step", pr.v_step ? nlohmann::json(*pr.v_step) : nlohmann::json()},
                       {"pad_factor", pr.pad_factor},
                       {"window", to_string(pr.window)},
                       {"crop_half_width", pr.crop_half_width}};
    j["features"] = {{"threshold_db", f.threshold_db},
                     {"max_points", f.max_points},
                     {"weight_mode", f.weight_mode == WeightMode::Power ? "power" : "amplitude"},
                     {"weighted_fit", f.weighted_fit}};
    j["plan"] = {{"wave_heights", pl.wave_heights},
                 {"azimuths", pl.azimuths},
                 {"elevation", pl.elevation},
                 {"maps_per_condition", pl.maps_per_condition},
                 {"split_ratio", pl.split_ratio},
                 {"master_seed", pl.master_seed},
                 {"pooled", pl.pooled}};
    j["gbdt"] = gbdt::config_to_json(s.gbdt);
    return j;
}

/// Overlays `j` on `base`; missing keys keep their base values.
inline Settings settings_from_json(const nlohmann::json& j, Settings s = {}) {
    using detail::check_keys;
    using detail::read;
    check_keys(j, "<root>", {"radar", "scene", "processing", "features", "plan", "gbdt"});
    if (j.contains("radar")) {
        const auto& r = j["radar"];
        check_keys(r, "radar", {"f0", "carriers", "freq_step", "pulse_width", "sample_rate", "bandwidth", "pri",
                                "pulses", "scr_db", "gate_start"});
        auto& p = s.pipeline.radar;
        read(r, "f0", p.f0);
        read(r, "carriers", p.carriers);
        read(r, "freq_step", p.freq_step);
        read(r, "pulse_width", p.pulse_width);
        read(r, "sample_rate", p.sample_rate);
        read(r, "bandwidth", p.bandwidth);
        read(r, "pri", p.pri);
        read(r, "pulses", p.pulses);
        read(r, "scr_db", p.scr_db);
        read(r, "gate_start", s.pipeline.gate_start);
    }
    if (j.contains("scene")) {
        const auto& sc = j["scene"];
        check_keys(sc, "scene", {"range0", "range_jitter", "size_jitter", "ship_length", "ship_points", "reflector_count", "reflector_spacing",
                                 "reflector_height", "attitude"});
        auto& o = s.pipeline.scene;
        read(sc, "range0", o.range0);
        read(sc, "range_jitter", o.range_jitter);
        read(sc, "size_jitter", o.size_jitter);
        read(sc, "ship_length", o.ship_length);
        read(sc, "ship_points", o.ship_points);
        read(sc, "reflector_count", o.reflector_count);
        read(sc, "reflector_spacing", o.reflector_spacing);
        read(sc, "reflector_height", o.reflector_height);
        if (sc.contains("attitude")) {
            const auto& a = sc["attitude"];
            check_keys(a, "scene.attitude", {"ship_roll_deg", "ship_pitch_deg", "ship_yaw_deg", "ship_period_min",
                                             "ship_period_max", "reflector_scale", "reflector_period_min",
                                             "reflector_period_max"});
            auto& m = o.attitude;
            read(a, "ship_roll_deg", m.ship_roll_deg);
            read(a, "ship_pitch_deg", m.ship_pitch_deg);
            read(a, "ship_yaw_deg", m.ship_yaw_deg);
            read(a, "ship_period_min", m.ship_period_min);
            read(a, "ship_period_max", m.ship_period_max);
            read(a, "reflector_scale", m.reflector_scale);
            read(a, "reflector_period_min", m.reflector_period_min);
            read(a, "reflector_period_max", m.reflector_period_max);
        }
    }
    if (j.contains("processing")) {
        const auto& pr = j["processing"];
        check_keys(pr, "processing", {"v_min", "v_max", "v_step", "pad_factor", "window", "crop_half_width"});
        auto& o = s.pipeline.processing;
        read(pr, "v_min", o.v_min);
        read(pr, "v_max", o.v_max);
        read(pr, "v_step", o.v_step);
        read(pr, "pad_factor", o.pad_factor);
        if (pr.contains("window")) o.window = window_from_string(pr["window"].get<std::string>());
        read(pr, "crop_half_width", o.crop_half_width);
    }
    if (j.contains("features")) {
        const auto& f = j["features"];
        check_keys(f, "features", {"threshold_db", "max_points", "weight_mode", "weighted_fit"});
        auto& o = s.pipeline.features;
        read(f, "threshold_db", o.threshold_db);
        read(f, "max_points", o.max_points);
        if (f.contains("weight_mode")) o.weight_mode = weight_mode_from_string(f["weight_mode"].get<std::string>());
        read(f, "weighted_fit", o.weighted_fit);
    }
    if (j.contains("plan")) {
        const auto& pl = j["plan"];
        check_keys(pl, "plan", {"wave_heights", "azimuths", "elevation", "maps_per_condition", "split_ratio",
                                "master_seed", "pooled"});
        auto& o = s.plan;
        read(pl, "wave_heights", o.wave_heights);
        read(pl, "azimuths", o.azimuths);
        read(pl, "elevation", o.elevation);
        read(pl, "maps_per_condition", o.maps_per_condition);
        read(pl, "split_ratio", o.split_ratio);
        read(pl, "master_seed", o.master_seed);
        read(pl, "pooled", o.pooled);
    }
    if (j.contains("gbdt")) {
        check_keys(j["gbdt"], "gbdt", {"n_trees", "max_depth", "learning_rate", "subsample", "colsample_bytree",
                                       "reg_lambda", "gamma", "min_child_weight", "base_score", "seed"});
        s.gbdt = gbdt::config_from_json(j["gbdt"], s.gbdt);
    }
    s.pipeline.radar.validate();
    s.plan.validate();
    s.gbdt.validate();
    s.pipeline.velocity_grid().validate();
    if (!(s.pipeline.scene.range_jitter >= 0.0))
        throw std::invalid_argument("config: scene.range_jitter must be >= 0");
    if (!(s.pipeline.scene.size_jitter >= 0.0 && s.pipeline.scene.size_jitter < 1.0))
        throw std::invalid_argument("config: scene.size_jitter must lie in [0, 1)");
    return s;
}

inline Settings load_settings(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read config " + path);
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
    return settings_from_json(j);
}

}  // namespace rvdisc
