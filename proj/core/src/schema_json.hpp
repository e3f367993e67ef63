#ifndef WTAD_SRC_SCHEMA_JSON_HPP
#define WTAD_SRC_SCHEMA_JSON_HPP

#include <nlohmann/json.hpp>

#include "wtad/log.hpp"

namespace wtad {

inline nlohmann::json schema_to_json(const ChannelSchema& schema) {
    nlohmann::json j;
    j["actuators"] = nlohmann::json::array();
    for (const auto& a : schema.actuators)
        j["actuators"].push_back({{"name", a.name}, {"arity", a.arity}});
    j["sensors"] = nlohmann::json::array();
    for (const auto& s : schema.sensors)
        j["sensors"].push_back({{"name", s.name}, {"unit", s.unit}});
    return j;
}

inline ChannelSchema schema_from_json(const nlohmann::json& j) {
    ChannelSchema schema;
    for (const auto& a : j.at("actuators"))
        schema.actuators.push_back(
            {a.at("name").get<std::string>(), a.at("arity").get<int>()});
    for (const auto& s : j.at("sensors"))
        schema.sensors.push_back(
            {s.at("name").get<std::string>(), s.value("unit", std::string())});
    schema.validate();
    return schema;
}

}  // namespace wtad

#endif
