#include "vid/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "vid/energy.hpp"

namespace vid {

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

void write_trace_csv(std::ostream& os, const EnergyTrace& trace,
                     const std::vector<int>& probes) {
  const std::vector<std::string> names =
      EnergyTrace::column_names(static_cast<int>(probes.size()));
  for (size_t i = 0; i < names.size(); ++i)
    os << (i ? "," : "") << names[i];
  os << "\n";
  for (const EnergySample& s : trace.samples) {
    os << format_double(s.t) << "," << format_double(s.E) << ","
       << format_double(s.E_dot) << "," << format_double(s.boxG_u) << ","
       << format_double(s.boxG_udot) << "," << format_double(s.K) << ","
       << format_double(s.I) << "," << format_double(s.B) << ","
       << format_double(s.L) << "," << format_double(s.R) << ","
       << format_double(s.kinetic) << "," << format_double(s.elastic) << ","
       << format_double(s.u_L) << "," << format_double(s.v_L);
    for (double p : s.probes) os << "," << format_double(p);
    os << "\n";
  }
}

void write_trace_csv(const std::string& path, const EnergyTrace& trace,
                     const std::vector<int>& probes) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open trace output file " + path);
  write_trace_csv(f, trace, probes);
}

void write_snapshots_csv(std::ostream& os, const std::vector<Snapshot>& snaps,
                         const Mesh1D& mesh) {
  os << "t,x,u\n";
  for (const Snapshot& s : snaps)
    for (int i = 0; i < mesh.nodes(); ++i)
      os << format_double(s.t) << "," << format_double(mesh.node_x(i)) << ","
         << format_double(s.u[i]) << "\n";
}

void write_snapshots_csv(const std::string& path,
                         const std::vector<Snapshot>& snaps,
                         const Mesh1D& mesh) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open snapshot output file " + path);
  write_snapshots_csv(f, snaps, mesh);
}

const std::vector<double>& CsvTable::column(const std::string& name) const {
  for (size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return columns[i];
  throw ConfigError("CSV file has no column named " + name);
}

bool CsvTable::has_column(const std::string& name) const {
  for (const std::string& h : header)
    if (h == name) return true;
  return false;
}

CsvTable parse_csv(std::istream& is, const std::string& origin) {
  CsvTable table;
  std::string line;
  if (!std::getline(is, line))
    throw ConfigError("empty CSV input: " + origin);
  std::stringstream hs(line);
  std::string field;
  while (std::getline(hs, field, ',')) table.header.push_back(field);
  table.columns.resize(table.header.size());

  size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ls(line);
    size_t col = 0;
    while (std::getline(ls, field, ',')) {
      if (col >= table.columns.size())
        throw ConfigError(origin + ": row " + std::to_string(row) +
                          " has too many fields");
      double v = 0;
      const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
      if (res.ec != std::errc{})
        throw ConfigError(origin + ": row " + std::to_string(row) +
                          " has a non-numeric field '" + field + "'");
      table.columns[col++].push_back(v);
    }
    if (col != table.columns.size())
      throw ConfigError(origin + ": row " + std::to_string(row) +
                        " has too few fields");
  }
  return table;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open CSV file " + path);
  return parse_csv(f, path);
}

}  // namespace vid
