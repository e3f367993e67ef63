#ifndef WTAD_PLANT_HPP
#define WTAD_PLANT_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "wtad/log.hpp"

namespace wtad {

/// One tank stage. The controller opens the inflow valve at or below L and
/// closes it above H; the transfer pump runs while the level is above L
/// and the next stage is below its H. LL/HH are alarm bounds the
/// closed-loop trajectory must never cross in the noise-free case.
struct StageConfig {
    double tank_capacity = 1000.0;  // liters
    double inflow_rate = 6.0;       // liters/tick while valve open
    double outflow_rate = 4.0;      // liters/tick while pump on
    double ll = 100.0;
    double l = 200.0;
    double h = 800.0;
    double hh = 900.0;

    void validate() const;
};

struct PlantConfig {
    std::vector<StageConfig> stages;
    std::int64_t tick_count = 1000;
    std::uint64_t seed = 0;
    double noise_std = 0.0;  // Gaussian process noise on the level update

    void validate() const;
};

enum class AttackMode { ConstantSpoof, DriftSpoof, ActuatorOverride };

struct AttackPoint {
    std::string channel;
    AttackMode mode = AttackMode::ConstantSpoof;
    double value = 0.0;  // spoofed value, drift delta/tick, or forced position
};

struct AttackSpec {
    int attack_id = 0;
    std::int64_t start_tick = 0;
    std::int64_t end_tick = 0;  // exclusive
    std::vector<AttackPoint> points;
};

struct SimOptions {
    /// Test hook: when true the controller reads true sensor values even
    /// while a spoof is active (spoofs then affect reported values only).
    bool controller_sees_true = false;
};

/// Channel naming: stage i (1-based) owns actuators MV<i>01 (valve, arity 2)
/// and P<i>01 (pump, arity 2), and sensors LIT<i>01 (level) and FIT<i>01
/// (inflow). Spoofs target sensors and are visible to the controller;
/// overrides force actuator positions. Entries inside any attack window are
/// labeled Attack(attack_id), all others Normal.
Log simulate(const PlantConfig& config, const std::vector<AttackSpec>& attacks,
             const SimOptions& options = {});

ChannelSchema plant_schema(const PlantConfig& config);

struct Scenario {
    std::string name;
    Log train;
    Log test;
    std::vector<AttackSpec> attacks;
};

/// Fixed catalog of eight scenarios sharing one long normal training run:
/// constant spoof (in-range), constant spoof (out-of-range), drift up,
/// drift down, actuator override, multi-point, multi-stage multi-point,
/// plus the training run itself (empty attack list).
std::vector<Scenario> standard_scenario_suite(std::uint64_t seed);

PlantConfig default_plant_config();

/// Scenario file: JSON {"plant": {...}, "attacks": [...]}.
struct ScenarioFile {
    PlantConfig plant;
    std::vector<AttackSpec> attacks;
};
ScenarioFile read_scenario_json(const std::filesystem::path& path);
void write_scenario_json(const ScenarioFile& sf, const std::filesystem::path& path);

}  // namespace wtad

#endif
