#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "servosys/actuator_model.hpp"

namespace servosys {

/// Comma-separated numeric columns with a header row. Lines starting with
/// '#' are comments; numbers are written with 17 significant digits.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> comments;
};

Table read_table(const std::filesystem::path& path);
Table parse_table(std::string_view text);
void write_table(const Table& table, const std::filesystem::path& path);
std::string format_table(const Table& table);

/// Trace files carry columns t,setpoint,q,qdot and optionally tau. The sample
/// interval travels as a "dt=" comment; other comments are kept verbatim.
Trace read_trace(const std::filesystem::path& path);
Trace trace_from_table(const Table& table);
void write_trace(const Trace& trace, const std::filesystem::path& path);
Table trace_to_table(const Trace& trace);

/// Value of a "key=value" comment line, if present.
std::optional<std::string> metadata(const std::vector<std::string>& comments,
                                    std::string_view key);
void set_metadata(std::vector<std::string>& comments, std::string_view key,
                  std::string_view value);

/// Shortest-safe decimal form with 17 significant digits.
std::string format_double(double x);

}  // namespace servosys
