#ifndef WTAD_CSV_HPP
#define WTAD_CSV_HPP

#include <filesystem>
#include <optional>

#include "wtad/log.hpp"

namespace wtad {

enum class CsvFormat { Native, SwatLayout };

// Native format, one entry per row:
//   timestamp,a:<name>:<arity>,...,s:<name>[:<unit>],...,label
// Actuator columns hold integer position indices; sensor columns hold
// decimals printed with 9 significant digits; label is one of
// Normal / Attack / Attack:<id> / Unlabeled (case-insensitive, trimmed).
//
// SWaT layout: first column is a timestamp string (ticks are assigned by
// row order at 1 Hz), middle columns are channels matched by name against
// a required schema sidecar, last column is the Normal/Attack status. The
// sidecar is JSON: {"actuators":[{"name":...,"arity":...}...],
// "sensors":[{"name":...,"unit":...}...]}.
Log ingest_csv(const std::filesystem::path& path, CsvFormat format,
               const std::optional<std::filesystem::path>& schema_path = std::nullopt);

void write_csv(const Log& log, const std::filesystem::path& path);

/// Parses a label cell (trimmed, case-insensitive). Throws DataError on
/// unknown text; the caller adds row context.
Label parse_label(const std::string& cell);
std::string format_label(const Label& label);

ChannelSchema read_schema_json(const std::filesystem::path& path);
void write_schema_json(const ChannelSchema& schema, const std::filesystem::path& path);

}  // namespace wtad

#endif
