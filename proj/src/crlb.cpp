#include "leotrack/crlb.hpp"

#include <cmath>
#include <numbers>
#include <tuple>

#include "leotrack/errors.hpp"
#include "leotrack/numkit.hpp"

namespace leotrack {

using std::numbers::pi;
constexpr cd kJ{0.0, 1.0};

std::pair<Eigen::VectorXcd, Eigen::VectorXcd> array_response_derivs(double elevation,
                                                                    double azimuth,
                                                                    const ArrayGeometry& geom) {
  const Eigen::VectorXcd a = array_response(elevation, azimuth, geom);
  // d(theta_x)/dE, d(theta_y)/dE, d(theta_x)/dA
  const double dx_de = std::sin(azimuth) * std::cos(elevation);
  const double dy_de = -std::sin(elevation);
  const double dx_da = std::cos(azimuth) * std::sin(elevation);
  Eigen::VectorXcd de(geom.size());
  Eigen::VectorXcd da(geom.size());
  for (int ix = 0; ix < geom.m_x; ++ix) {
    for (int iy = 0; iy < geom.m_y; ++iy) {
      const int k = ix * geom.m_y + iy;
      de(k) = kJ * pi * (ix * dx_de + iy * dy_de) * a(k);
      da(k) = kJ * pi * (ix * dx_da) * a(k);
    }
  }
  return {de, da};
}

Eigen::MatrixXcd whitened_combiner(const Combiner& w) {
  const Eigen::MatrixXcd sigma = w.W * w.W.adjoint();
  const auto eig = num::hermitian_eig(sigma);
  const double lmax = eig.eigenvalues.maxCoeff();
  if (!(lmax > 0.0) || eig.eigenvalues.minCoeff() <= 1e-12 * lmax) {
    throw CrlbError("combiner covariance W W^H is singular");
  }
  const Eigen::VectorXd inv_sqrt = eig.eigenvalues.cwiseMax(1e-12 * lmax).cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXcd s = eig.eigenvectors * inv_sqrt.asDiagonal() * eig.eigenvectors.adjoint();
  return s * w.W;
}

namespace {

void check_inputs(const FisherInputs& in, const Combiner& w, const ArrayGeometry& geom) {
  if (w.W.cols() != geom.size()) throw ContractViolation("fim: combiner/array size mismatch");
  if (!(in.noise_var > 0.0)) throw CrlbError("fim: noise variance must be > 0");
  if (in.n_pilots < 1) throw ContractViolation("fim: need at least one pilot");
}

double fim_doppler_white(const FisherInputs& in, const Eigen::MatrixXcd& wt,
                         const ArrayGeometry& geom) {
  const double g = (wt * array_response(in.elevation, in.azimuth, geom)).squaredNorm();
  const double n = in.n_pilots;
  return 4.0 * pi * pi / (3.0 * in.noise_var) * in.power * in.t_sym * in.t_sym * n * (n - 1.0) *
         (2.0 * n - 1.0) * g * std::norm(in.c_tilde);
}

Eigen::Matrix2d fim_angles_white(const FisherInputs& in, const Eigen::MatrixXcd& wt,
                                 const ArrayGeometry& geom) {
  const auto [de, da] = array_response_derivs(in.elevation, in.azimuth, geom);
  const Eigen::VectorXcd ve = wt * de;
  const Eigen::VectorXcd va = wt * da;
  const double k = 2.0 * in.power * in.n_pilots / in.noise_var * std::norm(in.c_tilde);
  Eigen::Matrix2d f;
  f(0, 0) = k * ve.squaredNorm();
  f(1, 1) = k * va.squaredNorm();
  f(0, 1) = f(1, 0) = k * ve.dot(va).real();
  return f;
}

}  // namespace

double fim_doppler(const FisherInputs& in, const Combiner& w, const ArrayGeometry& geom) {
  check_inputs(in, w, geom);
  return fim_doppler_white(in, whitened_combiner(w), geom);
}

double crlb_doppler(double fim) {
  if (!(fim > 0.0) || !std::isfinite(fim)) throw CrlbError("Doppler information is zero");
  return 1.0 / fim;
}

Eigen::Matrix2d fim_angles(const FisherInputs& in, const Combiner& w, const ArrayGeometry& geom) {
  check_inputs(in, w, geom);
  return fim_angles_white(in, whitened_combiner(w), geom);
}

std::pair<double, double> crlb_angles(const Eigen::Matrix2d& fim) {
  if (!fim.allFinite()) throw CrlbError("angle FIM is not finite");
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(fim);
  const double lmax = es.eigenvalues()(1);
  const double lmin = es.eigenvalues()(0);
  if (!(lmax > 0.0) || !(lmin > lmax * 1e-12)) throw CrlbError("angle FIM is singular");
  const double det = fim(0, 0) * fim(1, 1) - fim(0, 1) * fim(1, 0);
  return {fim(1, 1) / det, fim(0, 0) / det};
}

bool CrlbPrediction::valid() const {
  return std::isfinite(var_doppler) && std::isfinite(var_elev) && std::isfinite(var_azim) &&
         var_doppler > 0.0 && var_elev > 0.0 && var_azim > 0.0;
}

CrlbPrediction crlb_at(const FisherInputs& in, const Combiner& w, const ArrayGeometry& geom) {
  check_inputs(in, w, geom);
  const Eigen::MatrixXcd wt = whitened_combiner(w);
  CrlbPrediction p;
  p.var_doppler = crlb_doppler(fim_doppler_white(in, wt, geom));
  std::tie(p.var_elev, p.var_azim) = crlb_angles(fim_angles_white(in, wt, geom));
  if (!p.valid()) throw CrlbError("CRLB prediction is not finite");
  return p;
}

MeasurementVector crlb_evaluation_point(int block_index, const RoughEstimate& rough,
                                        const std::optional<MeasurementVector>& prev_update) {
  if (block_index == 0 || !prev_update) return rough.z;
  return *prev_update;
}

CrlbPrediction predict_measurement_cov(int block_index, const RoughEstimate& rough,
                                       const std::optional<MeasurementVector>& prev_update,
                                       const ReceivedBlock& block, const Combiner& w, double power,
                                       double noise_var, const PilotConfig& pilots,
                                       const ArrayGeometry& geom) {
  const MeasurementVector z = crlb_evaluation_point(block_index, rough, prev_update);
  FisherInputs in;
  in.elevation = z.elevation;
  in.azimuth = z.azimuth;
  in.power = power;
  in.noise_var = noise_var;
  in.n_pilots = pilots.n_pilots;
  in.t_sym = pilots.t_sym;
  try {
    in.c_tilde = ls_summation_term(block, w, z.elevation, z.azimuth, z.doppler, power,
                                   pilots.t_sym, geom);
  } catch (const EstimationError& e) {
    throw CrlbError(std::string("summation term: ") + e.what());
  }
  return crlb_at(in, w, geom);
}

}  // namespace leotrack
