#ifndef VID_CSV_HPP
#define VID_CSV_HPP

#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace vid {

struct EnergyTrace;
struct Snapshot;
struct Mesh1D;

/// Shortest decimal representation that round-trips the binary64 value.
std::string format_double(double x);

/// Columns: t, E, E_dot, boxG_u, boxG_udot, K, I, B, L, R, kinetic, elastic,
/// u_L, v_L, then one u_p<i> column per probe node.
void write_trace_csv(std::ostream& os, const EnergyTrace& trace,
                     const std::vector<int>& probes);
void write_trace_csv(const std::string& path, const EnergyTrace& trace,
                     const std::vector<int>& probes);

/// Columns: t, x, u (one row per node per snapshot).
void write_snapshots_csv(std::ostream& os, const std::vector<Snapshot>& snaps,
                         const Mesh1D& mesh);
void write_snapshots_csv(const std::string& path,
                         const std::vector<Snapshot>& snaps,
                         const Mesh1D& mesh);

/// Column-store of a numeric CSV file with a header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  const std::vector<double>& column(const std::string& name) const;
  bool has_column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);
CsvTable parse_csv(std::istream& is, const std::string& origin);

}  // namespace vid

#endif
