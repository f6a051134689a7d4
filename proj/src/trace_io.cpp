#include "servosys/trace_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "servosys/errors.hpp"

namespace servosys {

namespace {

constexpr double kUniformTolerance = 1e-9;

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_number(std::string_view field, std::size_t line_no) {
  const std::string s(field);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw ValidationError("line " + std::to_string(line_no) + ": bad number '" + s + "'");
  }
  return v;
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Table parse_table(std::string_view text) {
  Table table;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string_view raw = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty()) {
      if (nl == text.size()) break;
      continue;
    }
    if (line.front() == '#') {
      table.comments.emplace_back(trim(line.substr(1)));
      continue;
    }
    const auto fields = split(line);
    if (table.columns.empty()) {
      for (auto f : fields) table.columns.emplace_back(f);
      continue;
    }
    if (fields.size() != table.columns.size()) {
      throw ValidationError("line " + std::to_string(line_no) + ": ragged row, expected " +
                            std::to_string(table.columns.size()) + " columns, got " +
                            std::to_string(fields.size()));
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (auto f : fields) row.push_back(parse_number(f, line_no));
    table.rows.push_back(std::move(row));
  }
  if (table.columns.empty()) throw ValidationError("missing header row");
  return table;
}

Table read_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_table(ss.str());
}

std::string format_table(const Table& table) {
  std::string out;
  for (const auto& c : table.comments) out += "# " + c + "\n";
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out += ',';
    out += table.columns[i];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_double(row[i]);
    }
    out += '\n';
  }
  return out;
}

void write_table(const Table& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << format_table(table);
  if (!out) throw IoError("write failed for " + path.string());
}

std::optional<std::string> metadata(const std::vector<std::string>& comments,
                                    std::string_view key) {
  for (const auto& c : comments) {
    const auto eq = c.find('=');
    if (eq != std::string::npos && trim(std::string_view(c).substr(0, eq)) == key) {
      return std::string(trim(std::string_view(c).substr(eq + 1)));
    }
  }
  return std::nullopt;
}

void set_metadata(std::vector<std::string>& comments, std::string_view key,
                  std::string_view value) {
  const std::string line = std::string(key) + "=" + std::string(value);
  for (auto& c : comments) {
    const auto eq = c.find('=');
    if (eq != std::string::npos && trim(std::string_view(c).substr(0, eq)) == key) {
      c = line;
      return;
    }
  }
  comments.push_back(line);
}

Trace trace_from_table(const Table& table) {
  const std::vector<std::string> base = {"t", "setpoint", "q", "qdot"};
  const bool with_tau = table.columns.size() == 5 && table.columns[4] == "tau";
  if (!(table.columns.size() == 4 || with_tau) ||
      !std::equal(base.begin(), base.end(), table.columns.begin())) {
    throw ValidationError("trace header must be t,setpoint,q,qdot[,tau]");
  }
  Trace trace;
  for (const auto& c : table.comments) {
    if (!metadata({c}, "dt")) trace.comments.push_back(c);
  }
  for (const auto& r : table.rows) {
    TraceRow row{r[0], r[1], r[2], r[3], std::nullopt};
    if (with_tau) row.tau = r[4];
    trace.rows.push_back(row);
  }
  if (auto dt = metadata(table.comments, "dt")) {
    trace.dt = parse_number(*dt, 0);
  } else if (trace.rows.size() >= 2) {
    trace.dt = trace.rows[1].t - trace.rows[0].t;
  } else {
    throw ValidationError("trace dt unknown: need a dt= comment or two rows");
  }
  for (std::size_t i = 1; i < trace.rows.size(); ++i) {
    const double step = trace.rows[i].t - trace.rows[i - 1].t;
    if (std::abs(step - trace.dt) > kUniformTolerance) {
      throw ValidationError("non-uniform dt at row " + std::to_string(i) + ": step " +
                            format_double(step) + " vs dt " + format_double(trace.dt));
    }
  }
  validate(trace);
  return trace;
}

Trace read_trace(const std::filesystem::path& path) {
  return trace_from_table(read_table(path));
}

Table trace_to_table(const Trace& trace) {
  validate(trace);
  Table table;
  table.comments.push_back("dt=" + format_double(trace.dt));
  for (const auto& c : trace.comments) {
    if (!metadata({c}, "dt")) table.comments.push_back(c);
  }
  table.columns = {"t", "setpoint", "q", "qdot"};
  const bool tau = trace.has_tau();
  if (tau) table.columns.push_back("tau");
  table.rows.reserve(trace.rows.size());
  for (const auto& r : trace.rows) {
    std::vector<double> row = {r.t, r.setpoint, r.q, r.qdot};
    if (tau) row.push_back(*r.tau);
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_trace(const Trace& trace, const std::filesystem::path& path) {
  write_table(trace_to_table(trace), path);
}

}  // namespace servosys
