#pragma once

#include "dcda/engine.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace dcda {

// Column order of the trace CSV.
const std::vector<std::string>& trace_columns();

// One row per (t, node); 17 significant digits; an empty accuracy cell means no test set.
void write_trace_csv(std::ostream& os, const RunTrace& trace);
void write_trace_csv(const std::filesystem::path& path, const RunTrace& trace);

// Rows only; n, T and metric_every are inferred from the rows. Throws ConfigError on
// a malformed file.
RunTrace read_trace_csv(const std::filesystem::path& path);

// RFC-4180 field: quoted when it contains a comma, quote or line break.
std::string csv_field(const std::string& value);

// Sidecar: the canonical config text followed by `meta.<key> = <value>` lines.
// It parses back with parse_config.
void write_metadata(const std::filesystem::path& path, const std::string& config_text,
                    const std::vector<std::pair<std::string, std::string>>& metadata);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace dcda
