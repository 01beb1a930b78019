#pragma once

// EKF over the ground-user state and the per-block joint parameter and channel
// tracking loop built on it.

#include <Eigen/Dense>
#include <functional>
#include <optional>

#include "leotrack/channel.hpp"
#include "leotrack/crlb.hpp"
#include "leotrack/estimators.hpp"
#include "leotrack/geometry.hpp"

namespace leotrack {

struct EkfState {
  StateVector q_sat;
  StateVector q_gu;
  Mat6 cov = Mat6::Zero();
};

struct PredictResult {
  EkfState state;
  MeasurementVector z_pred;
  ArrayFrame frame;
};

/// Satellite propagated without noise, ground user through F C F^T + Q_U.
PredictResult predict(const EkfState& state, const EvolutionMatrix& f_sat,
                      const EvolutionMatrix& f_gu, const ProcessNoiseSpec& q_u, double wavelength);

/// Kalman update of the ground-user state with the rough measurement.
/// Throws UpdateError when the innovation covariance cannot be inverted.
EkfState update(const EkfState& predicted, const MeasurementVector& z_pred,
                const MeasurementVector& z_rough, const CrlbPrediction& q_z, const Mat36& g);

/// Parameters implied by the tracked states.
MeasurementVector update_parameters(const EkfState& state, const ArrayFrame& frame,
                                    double wavelength);

enum class CombinerKind { Proposed, Dft, Random };
enum class CovarianceMode { Predicted, Genie };

/// True angles and summation term, visible only to the genie covariance.
struct GenieInfo {
  double elevation = 0.0;
  double azimuth = 0.0;
  cd c_tilde{0.0, 0.0};
};

struct Observation {
  ReceivedBlock block;
  GenieInfo genie;
};

/// Produces the received block for a given combiner.
using ObservationSource = std::function<Observation(const Combiner&)>;

struct TrackerConfig {
  ArrayGeometry geom;
  AngleGrid grid;
  int m_rf = 32;
  PilotConfig pilots;
  LinkBudget link;
  EvolutionMatrix f_sat;
  EvolutionMatrix f_gu;
  ProcessNoiseSpec process_noise;
  CombinerKind combiner = CombinerKind::Proposed;
  CovarianceMode cov_mode = CovarianceMode::Predicted;
  bool crlb_from_rough = false;
  CrlbPrediction floor{100.0 * 100.0, 0.01 * 0.01, 0.01 * 0.01};
};

struct BlockResult {
  Combiner combiner;
  RoughEstimate rough;
  bool rough_ok = false;
  CrlbPrediction used_cov;    // Q_z fed to the update
  bool cov_fallback = false;
  std::optional<CrlbPrediction> crlb_rough;  // bound evaluated at the rough estimate
  MeasurementVector z_pred;
  bool updated = false;
  MeasurementVector updated_params;
  EkfState state;
  Eigen::VectorXcd csi;        // LS with the tracked Doppler
  Eigen::VectorXcd csi_rough;  // LS with the rough Doppler
  bool csi_ok = false;
  bool csi_rough_ok = false;
};

/// One run of the tracking loop over consecutive blocks.
class JointTracker {
 public:
  JointTracker(const TrackerConfig& config, const AngleDictionary& dict, const EkfState& init);

  BlockResult run_block(const ObservationSource& source, Rng& combiner_rng);

  const EkfState& state() const { return state_; }
  int block_index() const { return n_; }

 private:
  Combiner make_combiner(const std::optional<MeasurementVector>& prev, Rng& rng) const;

  TrackerConfig cfg_;
  const AngleDictionary& dict_;
  EkfState state_;
  int n_ = 0;
  std::optional<MeasurementVector> prev_update_;
  std::optional<CrlbPrediction> prev_cov_;
};

struct BenchmarkResult {
  Combiner combiner;
  RoughEstimate rough;
  bool rough_ok = false;
  Eigen::VectorXcd csi;
  bool csi_ok = false;
};

/// ESPRIT + SOMP + LS without filtering. The proposed combiner is steered by
/// the previous block's rough angles.
class BenchmarkTracker {
 public:
  BenchmarkTracker(const TrackerConfig& config, const AngleDictionary& dict);

  BenchmarkResult run_block(const ObservationSource& source, Rng& combiner_rng);

 private:
  TrackerConfig cfg_;
  const AngleDictionary& dict_;
  std::optional<MeasurementVector> prev_rough_;
};

}  // namespace leotrack
