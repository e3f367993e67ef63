#include "wtad/csv.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace wtad {

namespace {

std::string trim(const std::string& s) {
    auto b = s.begin();
    auto e = s.end();
    while (b != e && std::isspace(static_cast<unsigned char>(*b))) ++b;
    while (e != b && std::isspace(static_cast<unsigned char>(*(e - 1)))) --e;
    return std::string(b, e);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    cells.push_back(cur);
    return cells;
}

[[noreturn]] void row_error(std::size_t row, const std::string& msg) {
    throw DataError("row " + std::to_string(row) + ": " + msg);
}

long long parse_int(const std::string& cell, std::size_t row, const std::string& what) {
    const std::string t = trim(cell);
    long long v = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size())
        row_error(row, "unparseable " + what + " '" + cell + "'");
    return v;
}

double parse_real(const std::string& cell, std::size_t row, const std::string& what) {
    const std::string t = trim(cell);
    try {
        std::size_t pos = 0;
        double v = std::stod(t, &pos);
        if (pos != t.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        row_error(row, "unparseable " + what + " '" + cell + "'");
    }
}

/// Parses a native header column "a:<name>:<arity>" or "s:<name>[:<unit>]".
void parse_native_header(const std::vector<std::string>& cells, ChannelSchema& schema) {
    if (cells.size() < 2 || trim(cells.front()) != "timestamp" ||
        trim(cells.back()) != "label")
        throw DataError("native header must be timestamp,<channels...>,label");
    bool seen_sensor = false;
    for (std::size_t c = 1; c + 1 < cells.size(); ++c) {
        const std::string col = trim(cells[c]);
        if (col.rfind("a:", 0) == 0) {
            if (seen_sensor)
                throw DataError("header: actuator column '" + col +
                                "' after a sensor column");
            auto sep = col.rfind(':');
            if (sep == 1) throw DataError("header: missing arity in '" + col + "'");
            ActuatorChannel a;
            a.name = col.substr(2, sep - 2);
            a.arity = static_cast<int>(parse_int(col.substr(sep + 1), 1, "arity"));
            schema.actuators.push_back(a);
        } else if (col.rfind("s:", 0) == 0) {
            seen_sensor = true;
            SensorChannel s;
            auto sep = col.find(':', 2);
            if (sep == std::string::npos) {
                s.name = col.substr(2);
            } else {
                s.name = col.substr(2, sep - 2);
                s.unit = col.substr(sep + 1);
            }
            schema.sensors.push_back(s);
        } else {
            throw DataError("header: column '" + col +
                            "' has neither a: nor s: prefix");
        }
    }
    schema.validate();
}

Log ingest_native(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty file, header row required");
    Log log;
    parse_native_header(split_row(line), log.schema);
    const std::size_t cols = 2 + log.schema.channel_count();
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const auto cells = split_row(line);
        if (cells.size() != cols)
            row_error(row, "expected " + std::to_string(cols) + " cells, got " +
                               std::to_string(cells.size()));
        LogEntry e;
        e.timestamp = parse_int(cells[0], row, "timestamp");
        std::size_t c = 1;
        for (const auto& a : log.schema.actuators) {
            const long long v = parse_int(cells[c++], row, "actuator value");
            if (v < 0 || v >= a.arity)
                row_error(row, "actuator '" + a.name + "' position " +
                                   std::to_string(v) + " out of [0," +
                                   std::to_string(a.arity) + ")");
            e.actuator_values.push_back(static_cast<int>(v));
        }
        for (const auto& s : log.schema.sensors)
            e.sensor_values.push_back(parse_real(cells[c++], row, "sensor value"));
        try {
            e.label = parse_label(cells[c]);
        } catch (const DataError& err) {
            row_error(row, err.what());
        }
        if (!log.entries.empty() && e.timestamp != log.entries.back().timestamp + 1)
            row_error(row, "timestamp not increasing by exactly 1 tick");
        log.entries.push_back(std::move(e));
    }
    return log;
}

Log ingest_swat(std::istream& in, const ChannelSchema& schema) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty file, header row required");
    const auto header = split_row(line);
    if (header.size() < 3)
        throw DataError("swat header needs timestamp, channels and status columns");

    // Map schema channels to column indices by (trimmed) header name.
    std::vector<int> act_col(schema.actuators.size(), -1);
    std::vector<int> sen_col(schema.sensors.size(), -1);
    for (std::size_t c = 1; c + 1 < header.size(); ++c) {
        const std::string name = trim(header[c]);
        int ai = schema.actuator_index(name);
        if (ai >= 0) act_col[ai] = static_cast<int>(c);
        int si = schema.sensor_index(name);
        if (si >= 0) sen_col[si] = static_cast<int>(c);
    }
    for (std::size_t j = 0; j < act_col.size(); ++j)
        if (act_col[j] < 0)
            throw DataError("swat header missing actuator column '" +
                            schema.actuators[j].name + "'");
    for (std::size_t k = 0; k < sen_col.size(); ++k)
        if (sen_col[k] < 0)
            throw DataError("swat header missing sensor column '" +
                            schema.sensors[k].name + "'");

    Log log;
    log.schema = schema;
    std::size_t row = 1;
    std::int64_t tick = 0;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const auto cells = split_row(line);
        if (cells.size() != header.size())
            row_error(row, "expected " + std::to_string(header.size()) +
                               " cells, got " + std::to_string(cells.size()));
        LogEntry e;
        e.timestamp = tick++;  // SWaT timestamps are date strings; ticks by row order
        for (std::size_t j = 0; j < act_col.size(); ++j) {
            const long long v =
                static_cast<long long>(parse_real(cells[act_col[j]], row, "actuator value"));
            if (v < 0 || v >= schema.actuators[j].arity)
                row_error(row, "actuator '" + schema.actuators[j].name +
                                   "' position " + std::to_string(v) + " out of range");
            e.actuator_values.push_back(static_cast<int>(v));
        }
        for (std::size_t k = 0; k < sen_col.size(); ++k)
            e.sensor_values.push_back(parse_real(cells[sen_col[k]], row, "sensor value"));
        try {
            e.label = parse_label(cells.back());
        } catch (const DataError& err) {
            row_error(row, err.what());
        }
        log.entries.push_back(std::move(e));
    }
    return log;
}

}  // namespace

Label parse_label(const std::string& cell) {
    const std::string t = lower(trim(cell));
    if (t == "normal") return Label::normal();
    if (t == "unlabeled" || t.empty()) return Label::unlabeled();
    if (t == "attack" || t == "a ttack")  // the public SWaT CSV contains "A ttack"
        return Label::attack(0);
    if (t.rfind("attack:", 0) == 0) {
        try {
            return Label::attack(std::stoi(t.substr(7)));
        } catch (const std::exception&) {
        }
    }
    throw DataError("unknown label '" + cell + "'");
}

std::string format_label(const Label& label) {
    switch (label.kind) {
        case LabelKind::Normal:
            return "Normal";
        case LabelKind::Attack:
            return "Attack:" + std::to_string(label.attack_id);
        default:
            return "Unlabeled";
    }
}

Log ingest_csv(const std::filesystem::path& path, CsvFormat format,
               const std::optional<std::filesystem::path>& schema_path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    try {
        if (format == CsvFormat::Native) return ingest_native(in);
        if (!schema_path)
            throw DataError("swat-layout ingestion requires a schema sidecar file");
        return ingest_swat(in, read_schema_json(*schema_path));
    } catch (DataError& err) {
        throw DataError(path.string() + ": " + err.what());
    }
}

void write_csv(const Log& log, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << "timestamp";
    for (const auto& a : log.schema.actuators)
        out << ",a:" << a.name << ':' << a.arity;
    for (const auto& s : log.schema.sensors) {
        out << ",s:" << s.name;
        if (!s.unit.empty()) out << ':' << s.unit;
    }
    out << ",label\n";
    char buf[40];
    for (const auto& e : log.entries) {
        out << e.timestamp;
        for (int v : e.actuator_values) out << ',' << v;
        for (double v : e.sensor_values) {
            std::snprintf(buf, sizeof(buf), "%.9g", v);
            out << ',' << buf;
        }
        out << ',' << format_label(e.label) << '\n';
    }
    if (!out) throw DataError("I/O error writing '" + path.string() + "'");
}

ChannelSchema read_schema_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open schema '" + path.string() + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("schema '" + path.string() + "': " + e.what());
    }
    ChannelSchema schema;
    try {
        for (const auto& a : j.at("actuators"))
            schema.actuators.push_back(
                {a.at("name").get<std::string>(), a.at("arity").get<int>()});
        for (const auto& s : j.at("sensors"))
            schema.sensors.push_back({s.at("name").get<std::string>(),
                                      s.value("unit", std::string())});
    } catch (const nlohmann::json::exception& e) {
        throw DataError("schema '" + path.string() + "': " + e.what());
    }
    schema.validate();
    return schema;
}

void write_schema_json(const ChannelSchema& schema, const std::filesystem::path& path) {
    nlohmann::json j;
    j["actuators"] = nlohmann::json::array();
    for (const auto& a : schema.actuators)
        j["actuators"].push_back({{"name", a.name}, {"arity", a.arity}});
    j["sensors"] = nlohmann::json::array();
    for (const auto& s : schema.sensors)
        j["sensors"].push_back({{"name", s.name}, {"unit", s.unit}});
    std::ofstream out(path);
    if (!out) throw DataError("cannot write schema '" + path.string() + "'");
    out << j.dump(2) << '\n';
}

}  // namespace wtad
