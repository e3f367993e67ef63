#ifndef WTAD_LOG_HPP
#define WTAD_LOG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "wtad/errors.hpp"

namespace wtad {

struct ActuatorChannel {
    std::string name;
    int arity = 2;  // number of discrete positions, >= 2

    bool operator==(const ActuatorChannel&) const = default;
};

struct SensorChannel {
    std::string name;
    std::string unit;

    bool operator==(const SensorChannel&) const = default;
};

/// Fixed channel ordering: actuators first, then sensors. This ordering
/// defines the autoregressive factorization order used by the density net
/// and the column order of the native CSV format.
struct ChannelSchema {
    std::vector<ActuatorChannel> actuators;
    std::vector<SensorChannel> sensors;

    int actuator_count() const { return static_cast<int>(actuators.size()); }
    int sensor_count() const { return static_cast<int>(sensors.size()); }
    int channel_count() const { return actuator_count() + sensor_count(); }

    /// Sum of actuator arities; size of the one-hot actuator block.
    int arity_sum() const;

    /// Name of channel c in schema order (actuators then sensors).
    const std::string& channel_name(int c) const;

    /// Index into actuators, or -1 if `name` is not an actuator.
    int actuator_index(const std::string& name) const;
    /// Index into sensors, or -1 if `name` is not a sensor.
    int sensor_index(const std::string& name) const;

    /// Throws DataError on duplicate names or arity < 2.
    void validate() const;

    bool operator==(const ChannelSchema&) const = default;
};

enum class LabelKind { Normal, Attack, Unlabeled };

struct Label {
    LabelKind kind = LabelKind::Unlabeled;
    int attack_id = -1;  // valid iff kind == Attack

    static Label normal() { return {LabelKind::Normal, -1}; }
    static Label attack(int id) { return {LabelKind::Attack, id}; }
    static Label unlabeled() { return {LabelKind::Unlabeled, -1}; }

    bool is_attack() const { return kind == LabelKind::Attack; }
    bool operator==(const Label&) const = default;
};

/// One timestamped plant observation at the 1 Hz tick.
struct LogEntry {
    std::int64_t timestamp = 0;            // seconds since epoch
    std::vector<int> actuator_values;      // position index per actuator
    std::vector<double> sensor_values;     // one real per sensor
    Label label;

    bool operator==(const LogEntry&) const = default;
};

struct Log {
    ChannelSchema schema;
    std::vector<LogEntry> entries;

    std::size_t size() const { return entries.size(); }
    bool empty() const { return entries.empty(); }

    /// Checks schema validity, per-entry length/finiteness/arity bounds,
    /// and timestamps strictly increasing by exactly one tick.
    /// Throws DataError naming the offending entry.
    void validate() const;

    bool operator==(const Log&) const = default;
};

/// Per-sensor population mean and variance. Actuator channels are
/// categorical and never normalized.
struct NormStats {
    std::vector<double> mean;
    std::vector<double> variance;

    int sensor_count() const { return static_cast<int>(mean.size()); }
    bool operator==(const NormStats&) const = default;
};

/// Population mean/variance per sensor channel. Throws DataError on an
/// empty log.
NormStats compute_norm_stats(const Log& log);

/// Replaces each sensor value x by (x - mean) / sqrt(variance). Actuator
/// values and labels are untouched. Zero-variance channels map to 0.
/// The caller picks the stats, which is how the two normalization
/// policies (own-stats for the SVM, training-stats for the density net)
/// are expressed.
Log normalize(const Log& log, const NormStats& stats);

}  // namespace wtad

#endif
