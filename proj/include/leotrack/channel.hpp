#pragma once

// Per-subcarrier parametric channel: link budget, multipath gains collapsed
// into the summation term, UPA array response, and de-spread pilot blocks.

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "leotrack/random.hpp"

namespace leotrack {

using cd = std::complex<double>;

/// Link parameters in linear units (dB quantities are converted at load time).
struct LinkBudget {
  double carrier_hz = 1.91e9;
  double subcarrier_spacing_hz = 62.5e3;
  double bandwidth_hz = 4e6;
  double g_over_t = 1.2589254117941673;  // 1 dB/K
  double sat_gain = 6.309573444801933;    // 8 dBi
  double rician = 8.0;
  double boltzmann = 1.38e-23;
  double light_speed = 3e8;
  double tx_power_w = 1.0;
  double noise_var = 1.0;

  double wavelength() const { return light_speed / carrier_hz; }
};

/// Free-space loss times G/(kappa B T).
double large_scale_beta(double distance, const LinkBudget& lb);

/// Rician split of the raw gains into equivalent gains. Index 0 is LOS.
std::vector<cd> equivalent_gains(const std::vector<cd>& gains, double rician, double beta,
                                 double gamma);

struct PathSet {
  std::vector<cd> gains;
  std::vector<double> delays;  // s
  double beta = 0.0;
  std::vector<cd> equivalent;

  std::size_t count() const { return gains.size(); }
};

/// Gains ~ CN(0,1), delays ~ U[0, 1/spacing), equivalent gains per Rician split.
PathSet draw_paths(int count, double beta, const LinkBudget& lb, Rng& rng);

struct ArrayGeometry {
  int m_x = 8;
  int m_y = 8;

  int size() const { return m_x * m_y; }
};

/// a = a_x (x) a_y with half-wavelength spacing, unit norm.
Eigen::VectorXcd array_response(double elevation, double azimuth, const ArrayGeometry& geom);

/// C~ = sum_l g~_l exp(-j 2 pi (f_c + m df) tau_l).
cd summation_term(const PathSet& paths, const LinkBudget& lb, int subcarrier);

/// h = C~ a(elevation, azimuth).
Eigen::VectorXcd synth_channel(const PathSet& paths, double elevation, double azimuth,
                               const ArrayGeometry& geom, const LinkBudget& lb, int subcarrier);

struct PilotConfig {
  int n_pilots = 10;
  double t_sym = 8e-6;
  int subcarrier = 1;
  Eigen::VectorXcd symbols;  // unit modulus, length n_pilots
};

/// Zadoff-Chu sequence of length n with the given root.
Eigen::VectorXcd zc_pilots(int n, int root);

/// Analog combiner, M_RF x M, Frobenius norm one.
struct Combiner {
  Eigen::MatrixXcd W;

  Eigen::Index rf_chains() const { return W.rows(); }
};

/// M_RF x N_P de-spread observations; column b is r(b) s*(b).
struct ReceivedBlock {
  Eigen::MatrixXcd samples;

  Eigen::Index rf_chains() const { return samples.rows(); }
  Eigen::Index pilots() const { return samples.cols(); }
};

/// r(b) = sqrt(P) W h s(b) e^{j 2 pi u b T} + W n(b), then de-spread by s*(b).
/// n(b) ~ CN(0, noise_var I_M); the unit normals are always drawn so runs at
/// different noise levels consume identical random streams.
ReceivedBlock synth_received_block(const Eigen::VectorXcd& h, double doppler, const Combiner& w,
                                   const PilotConfig& pilots, const LinkBudget& lb, Rng& rng);

}  // namespace leotrack
