#include "leotrack/csv.hpp"

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace leotrack {

const std::string& csv_header() {
  static const std::string h =
      "axis_value,method,combiner,rmse_doppler_hz,rmse_elev_rad,rmse_azim_rad,nmse,"
      "crlb_doppler,crlb_elev,crlb_azim,trials";
  return h;
}

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

void emit_csv(const std::vector<MetricRow>& rows, std::ostream& out) {
  out << csv_header() << '\n';
  for (const auto& r : rows) {
    out << num(r.axis_value) << ',' << r.method << ',' << r.combiner << ','
        << num(r.rmse_doppler_hz) << ',' << num(r.rmse_elev_rad) << ',' << num(r.rmse_azim_rad)
        << ',' << num(r.nmse) << ',' << num(r.crlb_doppler) << ',' << num(r.crlb_elev) << ','
        << num(r.crlb_azim) << ',' << r.trials << '\n';
  }
}

void emit_csv(const std::vector<MetricRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": " + std::strerror(errno));
  emit_csv(rows, out);
  out.flush();
  if (!out) throw std::runtime_error(path + ": " + std::strerror(errno));
}

std::vector<MetricRow> parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != csv_header()) {
    throw std::runtime_error("parse_csv: missing or unexpected header");
  }
  std::vector<MetricRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 11) throw std::runtime_error("parse_csv: expected 11 fields: " + line);
    MetricRow r;
    r.axis_value = std::stod(f[0]);
    r.method = f[1];
    r.combiner = f[2];
    r.rmse_doppler_hz = std::stod(f[3]);
    r.rmse_elev_rad = std::stod(f[4]);
    r.rmse_azim_rad = std::stod(f[5]);
    r.nmse = std::stod(f[6]);
    r.crlb_doppler = std::stod(f[7]);
    r.crlb_elev = std::stod(f[8]);
    r.crlb_azim = std::stod(f[9]);
    r.trials = std::stol(f[10]);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace leotrack
