#include "wtad/plant.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "wtad/rng.hpp"

namespace wtad {

void StageConfig::validate() const {
    if (inflow_rate <= 0.0 || outflow_rate <= 0.0)
        throw DataError("stage: flow rates must be positive");
    if (!(ll < l && l < h && h < hh && hh < tank_capacity))
        throw DataError("stage: thresholds must satisfy LL < L < H < HH < capacity");
}

void PlantConfig::validate() const {
    if (stages.empty()) throw DataError("plant: at least one stage required");
    if (tick_count < 1) throw DataError("plant: tick_count must be >= 1");
    if (noise_std < 0.0) throw DataError("plant: noise_std must be >= 0");
    for (const auto& s : stages) s.validate();
}

ChannelSchema plant_schema(const PlantConfig& config) {
    ChannelSchema schema;
    for (std::size_t i = 1; i <= config.stages.size(); ++i) {
        const std::string idx = std::to_string(i);
        schema.actuators.push_back({"MV" + idx + "01", 2});
        schema.actuators.push_back({"P" + idx + "01", 2});
    }
    for (std::size_t i = 1; i <= config.stages.size(); ++i) {
        const std::string idx = std::to_string(i);
        schema.sensors.push_back({"LIT" + idx + "01", "L"});
        schema.sensors.push_back({"FIT" + idx + "01", "L/tick"});
    }
    return schema;
}

namespace {

struct ActivePoint {
    const AttackSpec* spec;
    const AttackPoint* point;
    double drift_base = 0.0;
    bool base_captured = false;
};

void check_attacks(const PlantConfig& config, const std::vector<AttackSpec>& attacks,
                   const ChannelSchema& schema) {
    std::map<std::string, std::vector<std::pair<std::int64_t, std::int64_t>>> windows;
    for (const auto& a : attacks) {
        if (a.points.empty())
            throw DataError("attack " + std::to_string(a.attack_id) + ": no points");
        if (a.start_tick > a.end_tick || a.start_tick < 0 ||
            a.end_tick > config.tick_count)
            throw DataError("attack " + std::to_string(a.attack_id) +
                            ": window outside [0, tick_count)");
        for (const auto& p : a.points) {
            const bool is_act = schema.actuator_index(p.channel) >= 0;
            const bool is_sen = schema.sensor_index(p.channel) >= 0;
            if (!is_act && !is_sen)
                throw DataError("attack " + std::to_string(a.attack_id) +
                                ": unknown channel '" + p.channel + "'");
            if (p.mode == AttackMode::ActuatorOverride ? !is_act : !is_sen)
                throw DataError("attack " + std::to_string(a.attack_id) +
                                ": mode incompatible with channel '" + p.channel + "'");
            for (const auto& [s, e] : windows[p.channel])
                if (a.start_tick < e && s < a.end_tick)
                    throw DataError("overlapping attacks on channel '" + p.channel + "'");
            windows[p.channel].emplace_back(a.start_tick, a.end_tick);
        }
    }
}

}  // namespace

Log simulate(const PlantConfig& config, const std::vector<AttackSpec>& attacks,
             const SimOptions& options) {
    config.validate();
    const ChannelSchema schema = plant_schema(config);
    check_attacks(config, attacks, schema);

    const std::size_t stages = config.stages.size();
    std::vector<double> level(stages);
    std::vector<int> valve(stages, 0), pump(stages, 0);
    for (std::size_t s = 0; s < stages; ++s)
        level[s] = 0.5 * (config.stages[s].l + config.stages[s].h);

    // One drift base slot per (attack, point).
    std::vector<ActivePoint> points;
    for (const auto& a : attacks)
        for (const auto& p : a.points) points.push_back({&a, &p});

    Rng rng(config.seed);
    Log log;
    log.schema = schema;
    log.entries.reserve(static_cast<std::size_t>(config.tick_count));

    const int m = schema.sensor_count();
    std::vector<double> true_sensors(m), observed(m);

    for (std::int64_t t = 0; t < config.tick_count; ++t) {
        // True readings. Flow sensors report the flow of this tick, i.e.
        // after the controller acts, so they are filled in below.
        for (std::size_t s = 0; s < stages; ++s) true_sensors[2 * s] = level[s];

        auto apply_spoofs = [&](bool flows_ready) {
            for (auto& ap : points) {
                if (t < ap.spec->start_tick || t >= ap.spec->end_tick) continue;
                if (ap.point->mode == AttackMode::ActuatorOverride) continue;
                const int k = schema.sensor_index(ap.point->channel);
                const bool is_flow = (k % 2) == 1;
                if (is_flow && !flows_ready) continue;
                if (ap.point->mode == AttackMode::ConstantSpoof) {
                    observed[k] = ap.point->value;
                } else {  // DriftSpoof: ramp from the true value at attack start
                    if (!ap.base_captured && (!is_flow || flows_ready)) {
                        ap.drift_base = true_sensors[k];
                        ap.base_captured = true;
                    }
                    observed[k] =
                        ap.drift_base +
                        ap.point->value * static_cast<double>(t - ap.spec->start_tick);
                }
            }
        };

        observed = true_sensors;
        apply_spoofs(false);
        const std::vector<double>& ctrl =
            options.controller_sees_true ? true_sensors : observed;

        // Hysteresis control on (possibly spoofed) levels.
        for (std::size_t s = 0; s < stages; ++s) {
            const StageConfig& sc = config.stages[s];
            const double lvl = ctrl[2 * s];
            // "<=" so an exact hit on L (possible in the noise-free case)
            // opens the valve instead of deadlocking at the boundary.
            if (lvl <= sc.l)
                valve[s] = 1;
            else if (lvl > sc.h)
                valve[s] = 0;
            const bool next_ok =
                s + 1 >= stages || ctrl[2 * (s + 1)] < config.stages[s + 1].h;
            pump[s] = (lvl > sc.l && next_ok) ? 1 : 0;
        }

        // Overrides force positions regardless of control logic.
        for (const auto& ap : points) {
            if (t < ap.spec->start_tick || t >= ap.spec->end_tick) continue;
            if (ap.point->mode != AttackMode::ActuatorOverride) continue;
            const int j = schema.actuator_index(ap.point->channel);
            const int pos = static_cast<int>(ap.point->value);
            if (pos < 0 || pos >= schema.actuators[j].arity)
                throw DataError("attack " + std::to_string(ap.spec->attack_id) +
                                ": override position out of range");
            if (j % 2 == 0)
                valve[j / 2] = pos;
            else
                pump[j / 2] = pos;
        }

        for (std::size_t s = 0; s < stages; ++s) {
            true_sensors[2 * s + 1] = config.stages[s].inflow_rate * valve[s];
            observed[2 * s + 1] = true_sensors[2 * s + 1];
        }
        apply_spoofs(true);

        LogEntry e;
        e.timestamp = t;
        for (std::size_t s = 0; s < stages; ++s) {
            e.actuator_values.push_back(valve[s]);
            e.actuator_values.push_back(pump[s]);
        }
        e.sensor_values = observed;
        int active_id = -1;
        for (const auto& a : attacks)
            if (t >= a.start_tick && t < a.end_tick)
                active_id = active_id < 0 ? a.attack_id : std::min(active_id, a.attack_id);
        e.label = active_id >= 0 ? Label::attack(active_id) : Label::normal();
        log.entries.push_back(std::move(e));

        // Physics: flow balance on the true level, plus process noise.
        for (std::size_t s = 0; s < stages; ++s) {
            const StageConfig& sc = config.stages[s];
            double next = level[s] + sc.inflow_rate * valve[s] -
                          sc.outflow_rate * pump[s];
            if (config.noise_std > 0.0) next += rng.gaussian(0.0, config.noise_std);
            level[s] = std::clamp(next, 0.0, sc.tank_capacity);
        }
    }
    return log;
}

PlantConfig default_plant_config() {
    PlantConfig config;
    config.stages.assign(3, StageConfig{});
    config.tick_count = 6000;
    config.seed = 1;
    config.noise_std = 1.0;
    return config;
}

std::vector<Scenario> standard_scenario_suite(std::uint64_t seed) {
    PlantConfig base = default_plant_config();
    base.seed = seed;

    Log train = simulate(base, {});

    PlantConfig test_cfg = base;
    test_cfg.tick_count = 3000;

    struct Def {
        std::string name;
        std::vector<AttackSpec> attacks;
    };
    const std::int64_t a0 = 1000, a1 = 1300;
    std::vector<Def> defs = {
        {"train", {}},
        {"constant-spoof-in-range",
         {{1, a0, a1, {{"FIT201", AttackMode::ConstantSpoof, 3.0}}}}},
        {"constant-spoof-out-of-range",
         {{2, a0, a1, {{"LIT301", AttackMode::ConstantSpoof, 1500.0}}}}},
        {"drift-up", {{3, a0, a1, {{"LIT101", AttackMode::DriftSpoof, 1.0}}}}},
        {"drift-down", {{4, a0, a1, {{"LIT101", AttackMode::DriftSpoof, -1.0}}}}},
        {"actuator-override",
         {{5, a0, a1, {{"P101", AttackMode::ActuatorOverride, 1.0}}}}},
        {"multi-point",
         {{6,
           a0,
           a1,
           {{"FIT101", AttackMode::ConstantSpoof, 0.0},
            {"MV101", AttackMode::ActuatorOverride, 1.0}}}}},
        {"multi-stage-multi-point",
         {{7,
           a0,
           a1,
           {{"LIT201", AttackMode::ConstantSpoof, 1500.0},
            {"P301", AttackMode::ActuatorOverride, 1.0}}}}},
    };

    std::vector<Scenario> suite;
    for (std::size_t i = 0; i < defs.size(); ++i) {
        Scenario sc;
        sc.name = defs[i].name;
        sc.train = train;
        sc.attacks = defs[i].attacks;
        if (defs[i].attacks.empty()) {
            sc.test = Log{};  // the training scenario has no separate test run
        } else {
            PlantConfig cfg = test_cfg;
            cfg.seed = seed + 101 + i;
            sc.test = simulate(cfg, defs[i].attacks);
        }
        suite.push_back(std::move(sc));
    }
    return suite;
}

namespace {

AttackMode mode_from_string(const std::string& s) {
    if (s == "constant_spoof") return AttackMode::ConstantSpoof;
    if (s == "drift_spoof") return AttackMode::DriftSpoof;
    if (s == "actuator_override") return AttackMode::ActuatorOverride;
    throw DataError("unknown attack mode '" + s + "'");
}

std::string mode_to_string(AttackMode m) {
    switch (m) {
        case AttackMode::ConstantSpoof: return "constant_spoof";
        case AttackMode::DriftSpoof: return "drift_spoof";
        default: return "actuator_override";
    }
}

}  // namespace

ScenarioFile read_scenario_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open scenario '" + path.string() + "'");
    nlohmann::json j;
    try {
        in >> j;
        ScenarioFile sf;
        const auto& p = j.at("plant");
        sf.plant.tick_count = p.at("tick_count").get<std::int64_t>();
        sf.plant.seed = p.at("seed").get<std::uint64_t>();
        sf.plant.noise_std = p.at("noise_std").get<double>();
        for (const auto& s : p.at("stages")) {
            StageConfig st;
            st.tank_capacity = s.at("tank_capacity").get<double>();
            st.inflow_rate = s.at("inflow_rate").get<double>();
            st.outflow_rate = s.at("outflow_rate").get<double>();
            st.ll = s.at("ll").get<double>();
            st.l = s.at("l").get<double>();
            st.h = s.at("h").get<double>();
            st.hh = s.at("hh").get<double>();
            sf.plant.stages.push_back(st);
        }
        for (const auto& a : j.value("attacks", nlohmann::json::array())) {
            AttackSpec spec;
            spec.attack_id = a.at("attack_id").get<int>();
            spec.start_tick = a.at("start_tick").get<std::int64_t>();
            spec.end_tick = a.at("end_tick").get<std::int64_t>();
            for (const auto& pt : a.at("points"))
                spec.points.push_back({pt.at("channel").get<std::string>(),
                                       mode_from_string(pt.at("mode").get<std::string>()),
                                       pt.at("value").get<double>()});
            sf.attacks.push_back(std::move(spec));
        }
        sf.plant.validate();
        return sf;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("scenario '" + path.string() + "': " + e.what());
    }
}

void write_scenario_json(const ScenarioFile& sf, const std::filesystem::path& path) {
    nlohmann::json j;
    j["plant"]["tick_count"] = sf.plant.tick_count;
    j["plant"]["seed"] = sf.plant.seed;
    j["plant"]["noise_std"] = sf.plant.noise_std;
    j["plant"]["stages"] = nlohmann::json::array();
    for (const auto& s : sf.plant.stages)
        j["plant"]["stages"].push_back({{"tank_capacity", s.tank_capacity},
                                        {"inflow_rate", s.inflow_rate},
                                        {"outflow_rate", s.outflow_rate},
                                        {"ll", s.ll},
                                        {"l", s.l},
                                        {"h", s.h},
                                        {"hh", s.hh}});
    j["attacks"] = nlohmann::json::array();
    for (const auto& a : sf.attacks) {
        nlohmann::json ja;
        ja["attack_id"] = a.attack_id;
        ja["start_tick"] = a.start_tick;
        ja["end_tick"] = a.end_tick;
        ja["points"] = nlohmann::json::array();
        for (const auto& p : a.points)
            ja["points"].push_back({{"channel", p.channel},
                                    {"mode", mode_to_string(p.mode)},
                                    {"value", p.value}});
        j["attacks"].push_back(std::move(ja));
    }
    std::ofstream out(path);
    if (!out) throw DataError("cannot write scenario '" + path.string() + "'");
    out << j.dump(2) << '\n';
}

}  // namespace wtad
