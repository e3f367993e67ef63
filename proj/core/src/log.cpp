#include "wtad/log.hpp"

#include <cmath>
#include <set>

namespace wtad {

int ChannelSchema::arity_sum() const {
    int s = 0;
    for (const auto& a : actuators) s += a.arity;
    return s;
}

const std::string& ChannelSchema::channel_name(int c) const {
    if (c < actuator_count()) return actuators[c].name;
    return sensors[c - actuator_count()].name;
}

int ChannelSchema::actuator_index(const std::string& name) const {
    for (std::size_t i = 0; i < actuators.size(); ++i)
        if (actuators[i].name == name) return static_cast<int>(i);
    return -1;
}

int ChannelSchema::sensor_index(const std::string& name) const {
    for (std::size_t i = 0; i < sensors.size(); ++i)
        if (sensors[i].name == name) return static_cast<int>(i);
    return -1;
}

void ChannelSchema::validate() const {
    std::set<std::string> names;
    for (const auto& a : actuators) {
        if (a.arity < 2)
            throw DataError("actuator '" + a.name + "' has arity " +
                            std::to_string(a.arity) + "; must be >= 2");
        if (!names.insert(a.name).second)
            throw DataError("duplicate channel name '" + a.name + "'");
    }
    for (const auto& s : sensors) {
        if (!names.insert(s.name).second)
            throw DataError("duplicate channel name '" + s.name + "'");
    }
}

void Log::validate() const {
    schema.validate();
    const int n = schema.actuator_count();
    const int m = schema.sensor_count();
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const LogEntry& e = entries[i];
        if (static_cast<int>(e.actuator_values.size()) != n ||
            static_cast<int>(e.sensor_values.size()) != m)
            throw DataError("entry " + std::to_string(i) +
                            ": channel count does not match schema");
        for (int j = 0; j < n; ++j) {
            if (e.actuator_values[j] < 0 ||
                e.actuator_values[j] >= schema.actuators[j].arity)
                throw DataError("entry " + std::to_string(i) + ": actuator '" +
                                schema.actuators[j].name + "' position " +
                                std::to_string(e.actuator_values[j]) +
                                " out of range");
        }
        for (int k = 0; k < m; ++k) {
            if (!std::isfinite(e.sensor_values[k]))
                throw DataError("entry " + std::to_string(i) + ": sensor '" +
                                schema.sensors[k].name + "' is not finite");
        }
        if (i > 0 && e.timestamp != entries[i - 1].timestamp + 1)
            throw DataError("entry " + std::to_string(i) +
                            ": timestamp not increasing by exactly 1 tick (" +
                            std::to_string(entries[i - 1].timestamp) + " -> " +
                            std::to_string(e.timestamp) + ")");
    }
}

NormStats compute_norm_stats(const Log& log) {
    if (log.empty()) throw DataError("compute_norm_stats: empty log");
    const int m = log.schema.sensor_count();
    const double count = static_cast<double>(log.size());
    NormStats stats;
    stats.mean.assign(m, 0.0);
    stats.variance.assign(m, 0.0);
    for (const auto& e : log.entries)
        for (int k = 0; k < m; ++k) stats.mean[k] += e.sensor_values[k];
    for (int k = 0; k < m; ++k) stats.mean[k] /= count;
    for (const auto& e : log.entries)
        for (int k = 0; k < m; ++k) {
            const double d = e.sensor_values[k] - stats.mean[k];
            stats.variance[k] += d * d;
        }
    for (int k = 0; k < m; ++k) stats.variance[k] /= count;  // population
    return stats;
}

Log normalize(const Log& log, const NormStats& stats) {
    if (stats.sensor_count() != log.schema.sensor_count())
        throw DataError("normalize: stats have " +
                        std::to_string(stats.sensor_count()) +
                        " sensor channels, schema has " +
                        std::to_string(log.schema.sensor_count()));
    Log out = log;
    for (auto& e : out.entries)
        for (int k = 0; k < stats.sensor_count(); ++k) {
            if (stats.variance[k] <= 0.0) {
                e.sensor_values[k] = 0.0;
            } else {
                e.sensor_values[k] =
                    (e.sensor_values[k] - stats.mean[k]) / std::sqrt(stats.variance[k]);
            }
        }
    return out;
}

}  // namespace wtad
