#pragma once

// Scenario configuration. The file format is flat `section.key = value` lines;
// '#' starts a comment and vectors are comma separated. Omitted keys keep the
// defaults below.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "leotrack/channel.hpp"
#include "leotrack/estimators.hpp"
#include "leotrack/geometry.hpp"
#include "leotrack/tracker.hpp"

namespace leotrack {

struct Scenario {
  // link
  double carrier_hz = 1910e6;
  double bandwidth_hz = 4e6;
  int users = 1;
  int paths = 2;
  int subcarriers = 64;
  int subcarrier_index = 1;
  double tx_power_dbm = 30.0;
  double sat_gain_dbi = 8.0;
  double rician = 8.0;
  double g_over_t_db = 1.0;
  double boltzmann = 1.38e-23;
  double light_speed = 3e8;

  // array
  int m_x = 8;
  int m_y = 8;
  int m = 64;
  int m_rf = 32;
  int grid_elev = 100;
  int grid_azim = 100;

  // frame
  int blocks = 10;
  double t_sym = 8e-6;
  long long n_ofdm = 312500;
  double t_block = 2.5;
  int pilots = 10;
  int zc_root = 1;

  // geometry
  double orbit_height = 600e3;
  double earth_radius = 6370e3;
  double sat_speed = 7.6e3;
  double sat_inclination_deg = 53.0;
  double sat_node_deg = 0.0;
  double gu_speed_kmh = 100.0;
  Vec3 gu_position{5e6, 2.7908e6, 2.7908e6};
  std::optional<Vec3> gu_normal;  // default [1, -1, (y - x)/z]

  // noise
  double sigma_u = 10.0;
  double sigma_v = 1.0;
  double snr_db = -10.0;
  std::optional<double> noise_var;  // overrides snr_db
  double init_sigma_pos = 0.0;
  double init_sigma_vel = 0.0;

  // tracker
  bool crlb_from_rough = false;
  double floor_doppler_hz = 100.0;
  double floor_angle_rad = 0.01;

  // run
  std::uint64_t seed = 1;
  int trials = 500;

  /// Throws ConfigError naming the first inconsistent key.
  void validate() const;

  LinkBudget link_budget() const;  // noise_var filled in from snr/noise_var
  ArrayGeometry array() const { return {m_x, m_y}; }
  AngleGrid grid() const { return {grid_elev, grid_azim}; }
  PilotConfig pilot_config() const;
  ProcessNoiseSpec process_noise() const { return {sigma_u, sigma_v}; }

  StateVector initial_satellite() const;
  StateVector initial_ground_user() const;

  /// Large-scale coefficient at the initial slant range.
  double reference_beta() const;
  /// sigma_n^2 so that P E|h_i|^2 / sigma_n^2 equals the configured SNR.
  double derived_noise_var() const;
};

/// Parse from text; unknown keys and malformed values raise ConfigError.
Scenario parse_scenario(std::istream& in);
Scenario parse_scenario_string(const std::string& text);
Scenario load_scenario(const std::string& path);

/// Apply a single `key = value` assignment.
void set_scenario_key(Scenario& scn, const std::string& key, const std::string& value);

/// All recognised keys, in file order.
const std::vector<std::string>& scenario_keys();

/// Text form accepted by parse_scenario.
std::string describe_scenario(const Scenario& scn);

double db_to_linear(double db);

}  // namespace leotrack
