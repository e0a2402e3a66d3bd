#include "dse/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dse/pmu_synth.hpp"
#include "dse/scenario.hpp"

namespace dse {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

CsvTable read_table(const std::filesystem::path& file,
                    const std::vector<std::string>& expected_header) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open file: " + file.string());

  std::string line;
  if (!std::getline(in, line)) throw ConfigError(file.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  CsvTable table;
  table.header = split_line(line);
  for (const auto& col : expected_header) {
    bool found = false;
    for (const auto& have : table.header)
      if (have == col) found = true;
    if (!found)
      throw ConfigError(file.string() + ": missing column '" + col + "'");
  }
  if (table.header.size() != expected_header.size() || table.header != expected_header)
    throw ConfigError(file.string() + ": header does not match expected schema");

  std::size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_line(line);
    if (fields.size() != table.header.size())
      throw ConfigError(file.string() + ": row " + std::to_string(row_no) + " has " +
                        std::to_string(fields.size()) + " fields, expected " +
                        std::to_string(table.header.size()));
    std::vector<double> values(fields.size());
    for (std::size_t i = 0; i < fields.size(); ++i) {
      const auto& f = fields[i];
      const auto res = std::from_chars(f.data(), f.data() + f.size(), values[i]);
      if (res.ec != std::errc{} || res.ptr != f.data() + f.size())
        throw ConfigError(file.string() + ": row " + std::to_string(row_no) +
                          ": cannot parse '" + f + "' in column '" + table.header[i] +
                          "'");
      if (!std::isfinite(values[i]))
        throw ConfigError(file.string() + ": row " + std::to_string(row_no) +
                          ": non-finite value in column '" + table.header[i] + "'");
    }
    table.rows.push_back(std::move(values));
  }
  return table;
}

void write_rows(const std::filesystem::path& file, const std::string& header,
                const std::vector<std::vector<double>>& rows) {
  std::ofstream out(file);
  if (!out) throw ConfigError("cannot write file: " + file.string());
  out << header << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << format_double(row[i]);
    }
    out << '\n';
  }
}

const std::vector<std::string> kTrajectoryHeader = {
    "t", "delta", "domega", "eq_p", "ed_p", "T_m", "E_fd", "i_R", "i_I", "e_R", "e_I"};
const std::vector<std::string> kMeasurementHeader = {"t",   "e_R", "e_I", "i_R",
                                                     "i_I", "T_m", "E_fd"};

}  // namespace

void write_trajectory_csv(const TruthTrajectory& traj, const std::filesystem::path& file) {
  std::vector<std::vector<double>> rows;
  rows.reserve(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto& x = traj.states[k];
    const auto& u = traj.inputs[k];
    const auto& z = traj.measurements[k];
    rows.push_back({traj.times[k], x.delta, x.domega, x.eq_p, x.ed_p, u.tm, u.efd, u.ir,
                    u.ii, z.er, z.ei});
  }
  write_rows(file, "t,delta,domega,eq_p,ed_p,T_m,E_fd,i_R,i_I,e_R,e_I", rows);
}

TruthTrajectory read_trajectory_csv(const std::filesystem::path& file) {
  const CsvTable table = read_table(file, kTrajectoryHeader);
  TruthTrajectory traj;
  for (const auto& r : table.rows) {
    traj.times.push_back(r[0]);
    traj.states.push_back({r[1], r[2], r[3], r[4]});
    traj.inputs.push_back({r[5], r[6], r[7], r[8]});
    traj.measurements.push_back({r[9], r[10]});
  }
  return traj;
}

void write_measurements_csv(const MeasurementSeries& series,
                            const std::filesystem::path& file) {
  std::vector<std::vector<double>> rows;
  rows.reserve(series.size());
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& z = series.z_seq[k];
    const auto& u = series.u_seq[k];
    rows.push_back({series.times[k], z.er, z.ei, u.ir, u.ii, u.tm, u.efd});
  }
  write_rows(file, "t,e_R,e_I,i_R,i_I,T_m,E_fd", rows);
}

MeasurementSeries read_measurements_csv(const std::filesystem::path& file) {
  const CsvTable table = read_table(file, kMeasurementHeader);
  MeasurementSeries series;
  for (const auto& r : table.rows) {
    series.times.push_back(r[0]);
    series.z_seq.push_back({r[1], r[2]});
    InputVector u;
    u.ir = r[3];
    u.ii = r[4];
    u.tm = r[5];
    u.efd = r[6];
    series.u_seq.push_back(u);
  }
  return series;
}

void write_estimates_csv(const FilterRun& run, double t0, double dt,
                         const std::filesystem::path& file) {
  std::vector<std::vector<double>> rows;
  rows.reserve(run.estimates.size());
  for (std::size_t k = 0; k < run.estimates.size(); ++k) {
    const auto& g = run.estimates[k];
    rows.push_back({t0 + static_cast<double>(k) * dt, g.mean[0], g.mean[1], g.mean[2],
                    g.mean[3], g.cov(0, 0), g.cov(1, 1), g.cov(2, 2), g.cov(3, 3)});
  }
  write_rows(file, "t,delta,domega,eq_p,ed_p,p_delta,p_domega,p_eq_p,p_ed_p", rows);
}

void write_traces_csv(const FilterRun& run, double t0, double dt,
                      const std::filesystem::path& file) {
  std::vector<std::vector<double>> rows;
  rows.reserve(run.index_trace.size());
  for (std::size_t k = 0; k < run.index_trace.size(); ++k) {
    rows.push_back({t0 + static_cast<double>(k) * dt, run.index_trace[k].n_phi,
                    run.index_trace[k].n_h, static_cast<double>(run.mp_trace[k])});
  }
  write_rows(file, "t,n_phi,n_h,m_p", rows);
}

}  // namespace dse
