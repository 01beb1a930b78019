#pragma once

// Rough per-block estimators: ESPRIT Doppler, one-atom SOMP over an angle
// dictionary, combiner design and least-squares channel recovery.

#include <Eigen/Dense>
#include <optional>
#include <utility>
#include <vector>

#include "leotrack/channel.hpp"
#include "leotrack/geometry.hpp"
#include "leotrack/random.hpp"

namespace leotrack {

/// Elevations i*pi/(2 N_E), azimuths -pi/2 + j*pi/N_A. Linear index g = i*N_A + j.
struct AngleGrid {
  int n_elev = 100;
  int n_azim = 100;

  std::vector<double> elevations() const;
  std::vector<double> azimuths() const;
  double elevation(int i) const;
  double azimuth(int j) const;
  int size() const { return n_elev * n_azim; }
};

/// Separable steering-vector dictionary. Stores a_y per elevation and a_x per
/// grid point instead of the full M x G matrix.
class AngleDictionary {
 public:
  AngleDictionary(const AngleGrid& grid, const ArrayGeometry& geom);

  const AngleGrid& grid() const { return grid_; }
  const ArrayGeometry& geometry() const { return geom_; }

  /// Column g = i*N_A + j of the full dictionary.
  Eigen::VectorXcd atom(int i, int j) const;

  /// m_y x N_E, column i is a_y(elevation i) scaled by 1/sqrt(m_y).
  const Eigen::MatrixXcd& ay() const { return ay_; }
  /// m_x x G, column g is a_x(grid point g) scaled by 1/sqrt(m_x).
  const Eigen::MatrixXcd& ax() const { return ax_; }

 private:
  AngleGrid grid_;
  ArrayGeometry geom_;
  Eigen::MatrixXcd ay_;
  Eigen::MatrixXcd ax_;
};

struct RoughEstimate {
  MeasurementVector z;
  int elev_index = 0;
  int azim_index = 0;
};

/// Doppler from the rotation between the first and last N_P-1 columns.
/// Unambiguous for |u| < 1/(2 t_sym).
double esprit_doppler(const ReceivedBlock& block, double t_sym);

/// One-atom SOMP. Each atom's correlation is divided by ||W a_g|| so that atoms
/// the combiner happens to amplify do not win; zero-norm atoms score zero.
/// Ties go to the smallest linear index. Only the angle fields of z are set.
RoughEstimate somp_angles(const ReceivedBlock& block, const Combiner& w,
                          const AngleDictionary& dict);

/// Per-atom SOMP scores, exposed for tests.
Eigen::VectorXd somp_scores(const ReceivedBlock& block, const Combiner& w,
                            const AngleDictionary& dict);

/// Row k = (k_x, k_y) of the 2-D DFT over the UPA, unit norm, k = k_x*m_y + k_y.
Eigen::MatrixXcd dft_rows(const ArrayGeometry& geom);

/// First m_rf rows of the 2-D DFT, ||W||_F = 1.
Combiner dft_combiner(const ArrayGeometry& geom, int m_rf);

/// Row 0 = a^H(prev), remaining rows the DFT rows least correlated with a(prev),
/// ||W||_F = 1. Without prev angles this is the DFT combiner.
Combiner design_combiner(const std::optional<std::pair<double, double>>& prev_angles,
                         const ArrayGeometry& geom, int m_rf);

/// Constant-modulus random phases, ||W||_F = 1.
Combiner random_combiner(const ArrayGeometry& geom, int m_rf, Rng& rng);

/// LS estimate of the summation term given angles and Doppler.
cd ls_summation_term(const ReceivedBlock& block, const Combiner& w, double elevation,
                     double azimuth, double doppler, double power, double t_sym,
                     const ArrayGeometry& geom);

/// LS channel estimate (sqrt(P) W)^+ averaged over the Doppler-compensated pilots.
Eigen::VectorXcd ls_csi(const ReceivedBlock& block, const Combiner& w, double doppler,
                        double power, double t_sym);

/// (sqrt(P) W)^+, shared by LS estimates that use the same combiner.
Eigen::MatrixXcd ls_csi_inverse(const Combiner& w, double power);

/// ls_csi with a precomputed ls_csi_inverse.
Eigen::VectorXcd ls_csi(const ReceivedBlock& block, const Eigen::MatrixXcd& w_pinv,
                        double doppler, double t_sym);

}  // namespace leotrack
