#include "leotrack/scenario.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "leotrack/errors.hpp"

namespace leotrack {

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception&) {
    throw ConfigError(key, "expected a number, got '" + v + "'");
  }
}

long long parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long i = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return i;
  } catch (const std::exception&) {
    throw ConfigError(key, "expected an integer, got '" + v + "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    if (!v.empty() && v[0] == '-') throw std::invalid_argument("negative");
    const unsigned long long i = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return i;
  } catch (const std::exception&) {
    throw ConfigError(key, "expected an unsigned integer, got '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key, "expected true or false, got '" + v + "'");
}

Vec3 parse_vec3(const std::string& key, const std::string& v) {
  std::stringstream ss(v);
  std::string part;
  Vec3 out;
  int n = 0;
  while (std::getline(ss, part, ',')) {
    if (n == 3) throw ConfigError(key, "expected three comma-separated numbers");
    out(n++) = parse_double(key, trim(part));
  }
  if (n != 3) throw ConfigError(key, "expected three comma-separated numbers");
  return out;
}

std::string fmt(double d) {
  std::ostringstream os;
  os.precision(17);
  os << d;
  return os.str();
}

std::string fmt(const Vec3& v) { return fmt(v(0)) + ", " + fmt(v(1)) + ", " + fmt(v(2)); }

struct KeySpec {
  std::string name;
  std::function<void(Scenario&, const std::string&, const std::string&)> set;
  std::function<std::string(const Scenario&)> get;
};

template <typename T>
KeySpec real_key(const std::string& name, T Scenario::*field) {
  return {name,
          [field](Scenario& s, const std::string& k, const std::string& v) {
            s.*field = parse_double(k, v);
          },
          [field](const Scenario& s) { return fmt(s.*field); }};
}

template <typename T>
KeySpec int_key(const std::string& name, T Scenario::*field) {
  return {name,
          [field](Scenario& s, const std::string& k, const std::string& v) {
            const long long i = parse_int(k, v);
            if (i < std::numeric_limits<T>::min() || i > std::numeric_limits<T>::max()) {
              throw ConfigError(k, "value out of range");
            }
            s.*field = static_cast<T>(i);
          },
          [field](const Scenario& s) { return std::to_string(s.*field); }};
}

const std::vector<KeySpec>& key_table() {
  static const std::vector<KeySpec> table = [] {
    std::vector<KeySpec> t;
    t.push_back(real_key("link.carrier_hz", &Scenario::carrier_hz));
    t.push_back(real_key("link.bandwidth_hz", &Scenario::bandwidth_hz));
    t.push_back(int_key("link.users", &Scenario::users));
    t.push_back(int_key("link.paths", &Scenario::paths));
    t.push_back(int_key("link.subcarriers", &Scenario::subcarriers));
    t.push_back(int_key("link.subcarrier_index", &Scenario::subcarrier_index));
    t.push_back(real_key("link.tx_power_dbm", &Scenario::tx_power_dbm));
    t.push_back(real_key("link.sat_gain_dbi", &Scenario::sat_gain_dbi));
    t.push_back(real_key("link.rician", &Scenario::rician));
    t.push_back(real_key("link.g_over_t_db", &Scenario::g_over_t_db));
    t.push_back(real_key("link.boltzmann", &Scenario::boltzmann));
    t.push_back(real_key("link.light_speed", &Scenario::light_speed));
    t.push_back(int_key("array.m_x", &Scenario::m_x));
    t.push_back(int_key("array.m_y", &Scenario::m_y));
    t.push_back(int_key("array.m", &Scenario::m));
    t.push_back(int_key("array.m_rf", &Scenario::m_rf));
    t.push_back(int_key("grid.n_elev", &Scenario::grid_elev));
    t.push_back(int_key("grid.n_azim", &Scenario::grid_azim));
    t.push_back(int_key("frame.blocks", &Scenario::blocks));
    t.push_back(real_key("frame.t_sym", &Scenario::t_sym));
    t.push_back(int_key("frame.n_ofdm", &Scenario::n_ofdm));
    t.push_back(real_key("frame.t_block", &Scenario::t_block));
    t.push_back(int_key("frame.pilots", &Scenario::pilots));
    t.push_back(int_key("frame.zc_root", &Scenario::zc_root));
    t.push_back(real_key("orbit.height", &Scenario::orbit_height));
    t.push_back(real_key("orbit.earth_radius", &Scenario::earth_radius));
    t.push_back(real_key("orbit.sat_speed", &Scenario::sat_speed));
    t.push_back(real_key("orbit.sat_inclination_deg", &Scenario::sat_inclination_deg));
    t.push_back(real_key("orbit.sat_node_deg", &Scenario::sat_node_deg));
    t.push_back(real_key("orbit.gu_speed_kmh", &Scenario::gu_speed_kmh));
    t.push_back({"orbit.gu_position",
                 [](Scenario& s, const std::string& k, const std::string& v) {
                   s.gu_position = parse_vec3(k, v);
                 },
                 [](const Scenario& s) { return fmt(s.gu_position); }});
    t.push_back({"orbit.gu_normal",
                 [](Scenario& s, const std::string& k, const std::string& v) {
                   if (v == "auto") {
                     s.gu_normal.reset();
                   } else {
                     s.gu_normal = parse_vec3(k, v);
                   }
                 },
                 [](const Scenario& s) {
                   return s.gu_normal ? fmt(*s.gu_normal) : std::string("auto");
                 }});
    t.push_back(real_key("noise.sigma_u", &Scenario::sigma_u));
    t.push_back(real_key("noise.sigma_v", &Scenario::sigma_v));
    t.push_back(real_key("noise.snr_db", &Scenario::snr_db));
    t.push_back({"noise.noise_var",
                 [](Scenario& s, const std::string& k, const std::string& v) {
                   if (v == "auto") {
                     s.noise_var.reset();
                   } else {
                     s.noise_var = parse_double(k, v);
                   }
                 },
                 [](const Scenario& s) {
                   return s.noise_var ? fmt(*s.noise_var) : std::string("auto");
                 }});
    t.push_back(real_key("init.sigma_pos", &Scenario::init_sigma_pos));
    t.push_back(real_key("init.sigma_vel", &Scenario::init_sigma_vel));
    t.push_back({"tracker.crlb_from_rough",
                 [](Scenario& s, const std::string& k, const std::string& v) {
                   s.crlb_from_rough = parse_bool(k, v);
                 },
                 [](const Scenario& s) { return std::string(s.crlb_from_rough ? "true" : "false"); }});
    t.push_back(real_key("tracker.floor_doppler_hz", &Scenario::floor_doppler_hz));
    t.push_back(real_key("tracker.floor_angle_rad", &Scenario::floor_angle_rad));
    t.push_back({"run.seed",
                 [](Scenario& s, const std::string& k, const std::string& v) {
                   s.seed = parse_u64(k, v);
                 },
                 [](const Scenario& s) { return std::to_string(s.seed); }});
    t.push_back(int_key("run.trials", &Scenario::trials));
    return t;
  }();
  return table;
}

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError(key, what);
}

}  // namespace

const std::vector<std::string>& scenario_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& spec : key_table()) k.push_back(spec.name);
    return k;
  }();
  return keys;
}

void set_scenario_key(Scenario& scn, const std::string& key, const std::string& value) {
  for (const auto& spec : key_table()) {
    if (spec.name == key) {
      spec.set(scn, key, value);
      return;
    }
  }
  throw ConfigError(key, "unknown key");
}

std::string describe_scenario(const Scenario& scn) {
  std::ostringstream os;
  for (const auto& spec : key_table()) os << spec.name << " = " << spec.get(scn) << '\n';
  return os.str();
}

Scenario parse_scenario(std::istream& in) {
  Scenario scn;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno), "expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno), "empty key");
    if (value.empty()) throw ConfigError(key, "empty value");
    set_scenario_key(scn, key, value);
  }
  scn.validate();
  return scn;
}

Scenario parse_scenario_string(const std::string& text) {
  std::istringstream in(text);
  return parse_scenario(in);
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open configuration file");
  return parse_scenario(in);
}

void Scenario::validate() const {
  require(carrier_hz > 0.0, "link.carrier_hz", "must be > 0");
  require(bandwidth_hz > 0.0, "link.bandwidth_hz", "must be > 0");
  require(users == 1, "link.users", "only a single ground user per subcarrier is supported");
  require(paths >= 1, "link.paths", "must be >= 1");
  require(subcarriers >= 1, "link.subcarriers", "must be >= 1");
  require(subcarrier_index >= 0 && subcarrier_index < subcarriers, "link.subcarrier_index",
          "must lie in [0, link.subcarriers)");
  require(rician >= 0.0, "link.rician", "must be >= 0");
  require(boltzmann > 0.0, "link.boltzmann", "must be > 0");
  require(light_speed > 0.0, "link.light_speed", "must be > 0");
  require(m_x >= 1, "array.m_x", "must be >= 1");
  require(m_y >= 1, "array.m_y", "must be >= 1");
  require(m == m_x * m_y, "array.m", "must equal array.m_x * array.m_y");
  require(m_rf >= 1 && m_rf <= m, "array.m_rf", "must lie in [1, array.m]");
  require(grid_elev >= 2, "grid.n_elev", "must be >= 2");
  require(grid_azim >= 2, "grid.n_azim", "must be >= 2");
  require(blocks >= 1, "frame.blocks", "must be >= 1");
  require(t_sym > 0.0, "frame.t_sym", "must be > 0");
  require(n_ofdm >= 1, "frame.n_ofdm", "must be >= 1");
  require(std::abs(t_block - double(n_ofdm) * t_sym) <= 1e-9 * std::abs(t_block),
          "frame.t_block", "must equal frame.n_ofdm * frame.t_sym");
  require(pilots >= 3, "frame.pilots", "must be >= 3");
  require(pilots <= n_ofdm, "frame.pilots", "must not exceed frame.n_ofdm");
  require(zc_root >= 1 && std::gcd(zc_root, pilots) == 1, "frame.zc_root",
          "must be positive and coprime with frame.pilots");
  require(earth_radius > 0.0, "orbit.earth_radius", "must be > 0");
  require(orbit_height > 0.0, "orbit.height", "must be > 0");
  require(sat_speed > 0.0, "orbit.sat_speed", "must be > 0");
  require(gu_speed_kmh >= 0.0, "orbit.gu_speed_kmh", "must be >= 0");
  require(gu_position.norm() > 0.0, "orbit.gu_position", "must be nonzero");
  require(gu_position.norm() < earth_radius + orbit_height, "orbit.gu_position",
          "must lie below the satellite orbit");
  if (gu_normal) {
    require(gu_normal->norm() > 0.0, "orbit.gu_normal", "must be nonzero");
    require(std::abs(gu_normal->normalized().dot(gu_position.normalized())) < 1e-6,
            "orbit.gu_normal", "must be perpendicular to orbit.gu_position");
  } else {
    require(gu_position.z() != 0.0, "orbit.gu_position",
            "z must be nonzero for the default orbit normal");
  }
  require(sigma_u >= 0.0, "noise.sigma_u", "must be >= 0");
  require(sigma_v >= 0.0, "noise.sigma_v", "must be >= 0");
  require(std::isfinite(snr_db), "noise.snr_db", "must be finite");
  if (noise_var) require(*noise_var >= 0.0, "noise.noise_var", "must be >= 0");
  require(init_sigma_pos >= 0.0, "init.sigma_pos", "must be >= 0");
  require(init_sigma_vel >= 0.0, "init.sigma_vel", "must be >= 0");
  require(floor_doppler_hz > 0.0, "tracker.floor_doppler_hz", "must be > 0");
  require(floor_angle_rad > 0.0, "tracker.floor_angle_rad", "must be > 0");
  require(trials >= 1, "run.trials", "must be >= 1");
}

LinkBudget Scenario::link_budget() const {
  LinkBudget lb;
  lb.carrier_hz = carrier_hz;
  lb.subcarrier_spacing_hz = bandwidth_hz / subcarriers;
  lb.bandwidth_hz = bandwidth_hz;
  lb.g_over_t = db_to_linear(g_over_t_db);
  lb.sat_gain = db_to_linear(sat_gain_dbi);
  lb.rician = rician;
  lb.boltzmann = boltzmann;
  lb.light_speed = light_speed;
  lb.tx_power_w = db_to_linear(tx_power_dbm - 30.0);
  lb.noise_var = noise_var ? *noise_var : derived_noise_var();
  return lb;
}

PilotConfig Scenario::pilot_config() const {
  PilotConfig p;
  p.n_pilots = pilots;
  p.t_sym = t_sym;
  p.subcarrier = subcarrier_index;
  p.symbols = zc_pilots(pilots, zc_root);
  return p;
}

StateVector Scenario::initial_satellite() const {
  const double deg = std::numbers::pi / 180.0;
  const Mat3 frame = rot_about_z(sat_node_deg * deg) * rot_about_x(sat_inclination_deg * deg);
  return {frame * Vec3(earth_radius + orbit_height, 0.0, 0.0),
          frame * Vec3(0.0, sat_speed, 0.0)};
}

StateVector Scenario::initial_ground_user() const {
  const Vec3& p = gu_position;
  const Vec3 n = gu_normal ? *gu_normal : Vec3(1.0, -1.0, (p.y() - p.x()) / p.z());
  const Vec3 dir = n.cross(p).normalized();
  return {p, gu_speed_kmh / 3.6 * dir};
}

double Scenario::reference_beta() const {
  LinkBudget lb;
  lb.carrier_hz = carrier_hz;
  lb.bandwidth_hz = bandwidth_hz;
  lb.g_over_t = db_to_linear(g_over_t_db);
  lb.boltzmann = boltzmann;
  lb.light_speed = light_speed;
  const double d = (initial_satellite().position - initial_ground_user().position).norm();
  return large_scale_beta(d, lb);
}

double Scenario::derived_noise_var() const {
  const double p = db_to_linear(tx_power_dbm - 30.0);
  const double gamma = db_to_linear(sat_gain_dbi);
  return p * gamma * gamma * reference_beta() / (double(m) * db_to_linear(snr_db));
}

}  // namespace leotrack
