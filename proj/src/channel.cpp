#include "leotrack/channel.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "leotrack/errors.hpp"

namespace leotrack {

using std::numbers::pi;
constexpr cd kJ{0.0, 1.0};

double large_scale_beta(double distance, const LinkBudget& lb) {
  if (!(distance > 0.0)) throw ContractViolation("large_scale_beta: distance must be > 0");
  const double fsl = lb.light_speed / (4.0 * pi * lb.carrier_hz * distance);
  return fsl * fsl * lb.g_over_t / (lb.boltzmann * lb.bandwidth_hz);
}

std::vector<cd> equivalent_gains(const std::vector<cd>& gains, double rician, double beta,
                                 double gamma) {
  if (gains.empty()) throw ContractViolation("equivalent_gains: need at least one path");
  if (!(rician >= 0.0)) throw ContractViolation("equivalent_gains: rician factor must be >= 0");
  const auto n = gains.size();
  std::vector<cd> out(n);
  out[0] = gamma * std::sqrt(rician * beta / (rician + 1.0)) * gains[0];
  if (n > 1) {
    const double nlos = gamma * std::sqrt(beta / (rician + 1.0)) * std::sqrt(1.0 / double(n - 1));
    for (std::size_t l = 1; l < n; ++l) out[l] = nlos * gains[l];
  }
  return out;
}

PathSet draw_paths(int count, double beta, const LinkBudget& lb, Rng& rng) {
  if (count < 1) throw ContractViolation("draw_paths: need at least one path");
  PathSet p;
  p.beta = beta;
  p.gains.resize(count);
  p.delays.resize(count);
  for (int l = 0; l < count; ++l) {
    p.gains[l] = complex_normal(rng);
    p.delays[l] = uniform(rng, 0.0, 1.0 / lb.subcarrier_spacing_hz);
  }
  p.equivalent = equivalent_gains(p.gains, lb.rician, beta, lb.sat_gain);
  return p;
}

Eigen::VectorXcd array_response(double elevation, double azimuth, const ArrayGeometry& geom) {
  const double vx = std::sin(azimuth) * std::sin(elevation);
  const double vy = std::cos(elevation);
  Eigen::VectorXcd a(geom.size());
  const double norm = 1.0 / std::sqrt(double(geom.size()));
  for (int ix = 0; ix < geom.m_x; ++ix) {
    for (int iy = 0; iy < geom.m_y; ++iy) {
      a(ix * geom.m_y + iy) = norm * std::exp(kJ * (pi * (ix * vx + iy * vy)));
    }
  }
  return a;
}

cd summation_term(const PathSet& paths, const LinkBudget& lb, int subcarrier) {
  const double f = lb.carrier_hz + subcarrier * lb.subcarrier_spacing_hz;
  cd c{0.0, 0.0};
  for (std::size_t l = 0; l < paths.count(); ++l) {
    c += paths.equivalent[l] * std::exp(-kJ * (2.0 * pi * f * paths.delays[l]));
  }
  return c;
}

Eigen::VectorXcd synth_channel(const PathSet& paths, double elevation, double azimuth,
                               const ArrayGeometry& geom, const LinkBudget& lb, int subcarrier) {
  return summation_term(paths, lb, subcarrier) * array_response(elevation, azimuth, geom);
}

Eigen::VectorXcd zc_pilots(int n, int root) {
  if (n < 1) throw ContractViolation("zc_pilots: length must be >= 1");
  if (std::gcd(root, n) != 1) throw ContractViolation("zc_pilots: root must be coprime with length");
  Eigen::VectorXcd s(n);
  const int cf = n % 2;
  for (int b = 0; b < n; ++b) {
    // phase index mod 2n keeps the argument small for long sequences
    const long long k = (static_cast<long long>(b) * (b + cf)) % (2LL * n);
    s(b) = std::exp(-kJ * (pi * root * double(k) / n));
  }
  return s;
}

ReceivedBlock synth_received_block(const Eigen::VectorXcd& h, double doppler, const Combiner& w,
                                   const PilotConfig& pilots, const LinkBudget& lb, Rng& rng) {
  const auto m = w.W.cols();
  if (h.size() != m) throw ContractViolation("synth_received_block: channel/combiner size mismatch");
  if (pilots.symbols.size() != pilots.n_pilots) {
    throw ContractViolation("synth_received_block: pilot symbol count mismatch");
  }
  const Eigen::VectorXcd signal = std::sqrt(lb.tx_power_w) * (w.W * h);
  const double sigma = std::sqrt(lb.noise_var / 2.0);
  ReceivedBlock block;
  block.samples.resize(w.W.rows(), pilots.n_pilots);
  Eigen::VectorXcd noise(m);
  for (int b = 0; b < pilots.n_pilots; ++b) {
    for (Eigen::Index i = 0; i < m; ++i) {
      const double re = standard_normal(rng);
      const double im = standard_normal(rng);
      noise(i) = cd(sigma * re, sigma * im);
    }
    const cd s = pilots.symbols(b);
    const cd tone = std::exp(kJ * (2.0 * pi * doppler * b * pilots.t_sym));
    const Eigen::VectorXcd r = signal * (s * tone) + w.W * noise;
    block.samples.col(b) = r * std::conj(s);
  }
  return block;
}

}  // namespace leotrack
