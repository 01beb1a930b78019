#include <gtest/gtest.h>

#include <sstream>

#include "leotrack/errors.hpp"
#include "leotrack/scenario.hpp"

using namespace leotrack;

TEST(Scenario, EmptyInputGivesTableDefaults) {
  const Scenario s = parse_scenario_string("");
  EXPECT_EQ(s.carrier_hz, 1910e6);
  EXPECT_EQ(s.bandwidth_hz, 4e6);
  EXPECT_EQ(s.users, 1);
  EXPECT_EQ(s.paths, 2);
  EXPECT_EQ(s.subcarriers, 64);
  EXPECT_EQ(s.m, 64);
  EXPECT_EQ(s.m_rf, 32);
  EXPECT_EQ(s.blocks, 10);
  EXPECT_EQ(s.t_sym, 8e-6);
  EXPECT_EQ(s.n_ofdm, 312500);
  EXPECT_EQ(s.t_block, 2.5);
  EXPECT_EQ(s.light_speed, 3e8);
  EXPECT_EQ(s.tx_power_dbm, 30.0);
  EXPECT_EQ(s.sat_gain_dbi, 8.0);
  EXPECT_EQ(s.rician, 8.0);
  EXPECT_EQ(s.g_over_t_db, 1.0);
  EXPECT_EQ(s.boltzmann, 1.38e-23);
  EXPECT_EQ(s.orbit_height, 600e3);
  EXPECT_EQ(s.earth_radius, 6370e3);
  EXPECT_EQ(s.sat_speed, 7.6e3);
  EXPECT_EQ(s.gu_speed_kmh, 100.0);
  EXPECT_EQ(s.sigma_u, 10.0);
  EXPECT_EQ(s.sigma_v, 1.0);
  EXPECT_EQ(s.pilots, 10);
  EXPECT_EQ(s.grid_elev, 100);
  EXPECT_EQ(s.grid_azim, 100);
  EXPECT_EQ(s.subcarrier_index, 1);
  EXPECT_EQ(s.sat_inclination_deg, 53.0);
}

TEST(Scenario, SingleOverrideChangesOnlyThatKey) {
  const Scenario base = parse_scenario_string("");
  const Scenario s = parse_scenario_string("# more pilots\nframe.pilots = 20\n");
  EXPECT_EQ(s.pilots, 20);
  EXPECT_EQ(describe_scenario(base), [&] {
    Scenario t = s;
    t.pilots = 10;
    return describe_scenario(t);
  }());
}

TEST(Scenario, DescribeRoundTrips) {
  Scenario s;
  s.snr_db = -7.5;
  s.noise_var = 0.25;
  s.grid_elev = 37;
  const Scenario back = parse_scenario_string(describe_scenario(s));
  EXPECT_EQ(describe_scenario(back), describe_scenario(s));
  ASSERT_TRUE(back.noise_var.has_value());
  EXPECT_EQ(*back.noise_var, 0.25);
}

TEST(Scenario, BlockDurationMustMatchSymbols) {
  try {
    parse_scenario_string("frame.t_block = 3.0\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "frame.t_block");
  }
}

TEST(Scenario, RejectsBadInput) {
  try {
    parse_scenario_string("frame.nonsense = 1\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "frame.nonsense");
  }
  EXPECT_THROW(parse_scenario_string("frame.pilots = ten\n"), ConfigError);
  EXPECT_THROW(parse_scenario_string("frame.pilots\n"), ConfigError);
  EXPECT_THROW(parse_scenario_string("array.m_rf = 65\n"), ConfigError);
  EXPECT_THROW(parse_scenario_string("array.m_x = 4\n"), ConfigError);
  EXPECT_THROW(parse_scenario_string("link.users = 2\n"), ConfigError);
  EXPECT_THROW(parse_scenario_string("frame.pilots = 2\n"), ConfigError);
  EXPECT_THROW(parse_scenario_string("noise.sigma_u = -1\n"), ConfigError);
  EXPECT_THROW(parse_scenario_string("frame.pilots = 10\nframe.zc_root = 5\n"), ConfigError);
  EXPECT_THROW(load_scenario("/nonexistent/scenario.cfg"), ConfigError);
}

TEST(Scenario, EveryKeyIsDescribedAndSettable) {
  Scenario s;
  std::istringstream in(describe_scenario(s));
  std::string line;
  std::size_t seen = 0;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    const std::string key = line.substr(0, eq);
    EXPECT_EQ(key, scenario_keys()[seen]);
    EXPECT_NO_THROW(set_scenario_key(s, key, line.substr(eq + 3))) << key;
    ++seen;
  }
  EXPECT_EQ(seen, scenario_keys().size());
  set_scenario_key(s, "noise.snr_db", "0");
  EXPECT_EQ(s.snr_db, 0.0);
  set_scenario_key(s, "noise.noise_var", "auto");
  EXPECT_FALSE(s.noise_var.has_value());
}

TEST(Scenario, DerivedNoiseVarianceMatchesSnrDefinition) {
  Scenario s;
  s.snr_db = 0.0;
  const LinkBudget lb = s.link_budget();
  // At 0 dB, P E|h_i|^2 = P gamma^2 beta / M equals sigma^2.
  const double per_antenna = lb.tx_power_w * lb.sat_gain * lb.sat_gain * s.reference_beta() / s.m;
  EXPECT_NEAR(lb.noise_var, per_antenna, 1e-12 * per_antenna);
  s.snr_db = 10.0;
  EXPECT_NEAR(s.link_budget().noise_var, per_antenna / 10.0, 1e-12 * per_antenna);
  s.noise_var = 0.5;
  EXPECT_EQ(s.link_budget().noise_var, 0.5);
}

TEST(Scenario, DbConversion) {
  EXPECT_DOUBLE_EQ(db_to_linear(0.0), 1.0);
  EXPECT_DOUBLE_EQ(db_to_linear(10.0), 10.0);
  EXPECT_NEAR(db_to_linear(-3.0), 0.501187233627272, 1e-15);
}
