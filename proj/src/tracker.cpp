#include "leotrack/tracker.hpp"

#include "leotrack/errors.hpp"

namespace leotrack {

PredictResult predict(const EkfState& state, const EvolutionMatrix& f_sat,
                      const EvolutionMatrix& f_gu, const ProcessNoiseSpec& q_u, double wavelength) {
  PredictResult out;
  out.state.q_sat = evolve_state(state.q_sat, f_sat);
  out.state.q_gu = evolve_state(state.q_gu, f_gu);
  const Mat6 f = f_gu.stacked();
  out.state.cov = f * state.cov * f.transpose() + q_u.covariance();
  out.state.cov = 0.5 * (out.state.cov + out.state.cov.transpose()).eval();
  out.frame = array_frame(out.state.q_sat);
  out.z_pred = measurement_map(out.state.q_sat, out.state.q_gu, out.frame, wavelength);
  return out;
}

EkfState update(const EkfState& predicted, const MeasurementVector& z_pred,
                const MeasurementVector& z_rough, const CrlbPrediction& q_z, const Mat36& g) {
  if (!q_z.valid()) throw UpdateError("update: measurement covariance is not valid");
  const Mat3 s = g * predicted.cov * g.transpose() + q_z.covariance();
  Eigen::LLT<Mat3> llt(s);
  if (llt.info() != Eigen::Success || !(llt.rcond() > 1e-15)) {
    throw UpdateError("update: innovation covariance is singular");
  }
  // K = C G^T S^{-1}
  const Eigen::Matrix<double, 6, 3> k = llt.solve(g * predicted.cov).transpose();
  EkfState out = predicted;
  const Vec3 innovation = z_rough.vector() - z_pred.vector();
  out.q_gu = StateVector::from_stacked(predicted.q_gu.stacked() + k * innovation);
  out.cov = (Mat6::Identity() - k * g) * predicted.cov;
  out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
  return out;
}

MeasurementVector update_parameters(const EkfState& state, const ArrayFrame& frame,
                                    double wavelength) {
  return measurement_map(state.q_sat, state.q_gu, frame, wavelength);
}

namespace {

Combiner choose_combiner(CombinerKind kind, const std::optional<MeasurementVector>& steer,
                         const ArrayGeometry& geom, int m_rf, Rng& rng) {
  switch (kind) {
    case CombinerKind::Proposed: {
      std::optional<std::pair<double, double>> angles;
      if (steer) angles = std::make_pair(steer->elevation, steer->azimuth);
      return design_combiner(angles, geom, m_rf);
    }
    case CombinerKind::Dft:
      return dft_combiner(geom, m_rf);
    case CombinerKind::Random:
      return random_combiner(geom, m_rf, rng);
  }
  throw ContractViolation("unknown combiner kind");
}

bool rough_estimate(const ReceivedBlock& block, const Combiner& w, const AngleDictionary& dict,
                    double t_sym, RoughEstimate& out) {
  try {
    out = somp_angles(block, w, dict);
    out.z.doppler = esprit_doppler(block, t_sym);
    return true;
  } catch (const EstimationError&) {
    return false;
  }
}

bool try_ls_csi(const ReceivedBlock& block, const Combiner& w, double doppler, double power,
                double t_sym, Eigen::VectorXcd& out) {
  try {
    out = ls_csi(block, w, doppler, power, t_sym);
    return true;
  } catch (const EstimationError&) {
    return false;
  }
}

}  // namespace

JointTracker::JointTracker(const TrackerConfig& config, const AngleDictionary& dict,
                           const EkfState& init)
    : cfg_(config), dict_(dict), state_(init) {}

Combiner JointTracker::make_combiner(const std::optional<MeasurementVector>& prev,
                                     Rng& rng) const {
  return choose_combiner(cfg_.combiner, prev, cfg_.geom, cfg_.m_rf, rng);
}

BlockResult JointTracker::run_block(const ObservationSource& source, Rng& combiner_rng) {
  const double power = cfg_.link.tx_power_w;
  const double noise_var = cfg_.link.noise_var;
  const double lambda = cfg_.link.wavelength();

  BlockResult res;
  res.combiner = make_combiner(prev_update_, combiner_rng);
  const Observation obs = source(res.combiner);
  const ReceivedBlock& block = obs.block;

  res.rough_ok = rough_estimate(block, res.combiner, dict_, cfg_.pilots.t_sym, res.rough);

  if (res.rough_ok) {
    try {
      res.crlb_rough = predict_measurement_cov(0, res.rough, std::nullopt, block, res.combiner,
                                               power, noise_var, cfg_.pilots, cfg_.geom);
    } catch (const CrlbError&) {
    }
  }

  std::optional<CrlbPrediction> cov;
  try {
    if (cfg_.cov_mode == CovarianceMode::Genie) {
      FisherInputs in{obs.genie.elevation, obs.genie.azimuth, obs.genie.c_tilde, power,
                      noise_var, cfg_.pilots.n_pilots, cfg_.pilots.t_sym};
      cov = crlb_at(in, res.combiner, cfg_.geom);
    } else if (res.rough_ok) {
      const int idx = cfg_.crlb_from_rough ? 0 : n_;
      if (idx == 0 || !prev_update_) {
        cov = res.crlb_rough;
      } else {
        cov = predict_measurement_cov(idx, res.rough, prev_update_, block, res.combiner, power,
                                      noise_var, cfg_.pilots, cfg_.geom);
      }
    }
  } catch (const CrlbError&) {
  }
  if (!cov || !cov->valid()) {
    res.cov_fallback = true;
    cov = prev_cov_ ? *prev_cov_ : cfg_.floor;
  }
  res.used_cov = *cov;
  prev_cov_ = *cov;

  const PredictResult pred =
      predict(state_, cfg_.f_sat, cfg_.f_gu, cfg_.process_noise, lambda);
  res.z_pred = pred.z_pred;
  res.state = pred.state;
  if (res.rough_ok) {
    try {
      const Mat36 g = jacobian_G(pred.state.q_sat, pred.state.q_gu, pred.frame, lambda);
      res.state = update(pred.state, pred.z_pred, res.rough.z, res.used_cov, g);
      res.updated = true;
    } catch (const UpdateError&) {
    } catch (const GeometryError&) {
    }
  }
  res.updated_params = update_parameters(res.state, pred.frame, lambda);

  try {
    const Eigen::MatrixXcd w_pinv = ls_csi_inverse(res.combiner, power);
    res.csi = ls_csi(block, w_pinv, res.updated_params.doppler, cfg_.pilots.t_sym);
    res.csi_ok = true;
    if (res.rough_ok) {
      res.csi_rough = ls_csi(block, w_pinv, res.rough.z.doppler, cfg_.pilots.t_sym);
      res.csi_rough_ok = true;
    }
  } catch (const EstimationError&) {
  }

  state_ = res.state;
  prev_update_ = res.updated_params;
  ++n_;
  return res;
}

BenchmarkTracker::BenchmarkTracker(const TrackerConfig& config, const AngleDictionary& dict)
    : cfg_(config), dict_(dict) {}

BenchmarkResult BenchmarkTracker::run_block(const ObservationSource& source, Rng& combiner_rng) {
  BenchmarkResult res;
  res.combiner = choose_combiner(cfg_.combiner, prev_rough_, cfg_.geom, cfg_.m_rf, combiner_rng);
  const Observation obs = source(res.combiner);
  res.rough_ok = rough_estimate(obs.block, res.combiner, dict_, cfg_.pilots.t_sym, res.rough);
  if (res.rough_ok) {
    prev_rough_ = res.rough.z;
    res.csi_ok = try_ls_csi(obs.block, res.combiner, res.rough.z.doppler, cfg_.link.tx_power_w,
                            cfg_.pilots.t_sym, res.csi);
  }
  return res;
}

}  // namespace leotrack
