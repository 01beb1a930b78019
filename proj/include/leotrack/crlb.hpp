#pragma once

// Fisher information for the rough Doppler and angle estimators and the
// CRLB-based measurement covariance handed to the tracker.

#include <Eigen/Dense>
#include <optional>
#include <utility>

#include "leotrack/channel.hpp"
#include "leotrack/estimators.hpp"
#include "leotrack/geometry.hpp"

namespace leotrack {

/// Partial derivatives of array_response with respect to elevation and azimuth.
std::pair<Eigen::VectorXcd, Eigen::VectorXcd> array_response_derivs(double elevation,
                                                                    double azimuth,
                                                                    const ArrayGeometry& geom);

/// Sigma^{-1/2} W with Sigma = W W^H. Throws CrlbError if Sigma is ill conditioned.
Eigen::MatrixXcd whitened_combiner(const Combiner& w);

/// Observation model shared by the Fisher-information routines.
struct FisherInputs {
  double elevation = 0.0;
  double azimuth = 0.0;
  cd c_tilde{0.0, 0.0};
  double power = 1.0;
  double noise_var = 1.0;
  int n_pilots = 10;
  double t_sym = 8e-6;
};

double fim_doppler(const FisherInputs& in, const Combiner& w, const ArrayGeometry& geom);

/// 1 / I_u. Throws CrlbError when the information is zero or not finite.
double crlb_doppler(double fim);

/// 2x2 symmetric information matrix for (elevation, azimuth).
Eigen::Matrix2d fim_angles(const FisherInputs& in, const Combiner& w, const ArrayGeometry& geom);

/// Diagonal of the inverse FIM. Throws CrlbError when cond(fim) >= 1e12.
std::pair<double, double> crlb_angles(const Eigen::Matrix2d& fim);

/// Predicted measurement-error variances, i.e. diag(Q_z).
struct CrlbPrediction {
  double var_doppler = 0.0;  // Hz^2
  double var_elev = 0.0;     // rad^2
  double var_azim = 0.0;     // rad^2

  Eigen::Matrix3d covariance() const { return Eigen::Vector3d(var_doppler, var_elev, var_azim).asDiagonal(); }
  bool valid() const;
};

/// All three bounds at one operating point.
CrlbPrediction crlb_at(const FisherInputs& in, const Combiner& w, const ArrayGeometry& geom);

/// Evaluation point for the prediction: the rough estimate in block 0, the
/// previous block's updated parameters afterwards.
MeasurementVector crlb_evaluation_point(int block_index, const RoughEstimate& rough,
                                        const std::optional<MeasurementVector>& prev_update);

/// Bounds at the selected point, with the summation term estimated by LS from
/// the current block.
CrlbPrediction predict_measurement_cov(int block_index, const RoughEstimate& rough,
                                       const std::optional<MeasurementVector>& prev_update,
                                       const ReceivedBlock& block, const Combiner& w, double power,
                                       double noise_var, const PilotConfig& pilots,
                                       const ArrayGeometry& geom);

}  // namespace leotrack
