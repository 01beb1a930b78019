#include "leotrack/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "leotrack/errors.hpp"
#include "leotrack/numkit.hpp"

namespace leotrack {

using std::numbers::pi;
constexpr cd kJ{0.0, 1.0};

double AngleGrid::elevation(int i) const { return i * pi / (2.0 * n_elev); }
double AngleGrid::azimuth(int j) const { return -pi / 2.0 + j * pi / n_azim; }

std::vector<double> AngleGrid::elevations() const {
  std::vector<double> v(n_elev);
  for (int i = 0; i < n_elev; ++i) v[i] = elevation(i);
  return v;
}

std::vector<double> AngleGrid::azimuths() const {
  std::vector<double> v(n_azim);
  for (int j = 0; j < n_azim; ++j) v[j] = azimuth(j);
  return v;
}

AngleDictionary::AngleDictionary(const AngleGrid& grid, const ArrayGeometry& geom)
    : grid_(grid), geom_(geom) {
  if (grid.n_elev < 2 || grid.n_azim < 2) throw ContractViolation("AngleGrid: sizes must be >= 2");
  if (geom.m_x < 1 || geom.m_y < 1) throw ContractViolation("AngleDictionary: empty array");
  const double nx = 1.0 / std::sqrt(double(geom.m_x));
  const double ny = 1.0 / std::sqrt(double(geom.m_y));
  ay_.resize(geom.m_y, grid.n_elev);
  ax_.resize(geom.m_x, grid.size());
  for (int i = 0; i < grid.n_elev; ++i) {
    const double el = grid.elevation(i);
    const double vy = std::cos(el);
    for (int iy = 0; iy < geom.m_y; ++iy) ay_(iy, i) = ny * std::exp(kJ * (pi * iy * vy));
    for (int j = 0; j < grid.n_azim; ++j) {
      const double vx = std::sin(grid.azimuth(j)) * std::sin(el);
      const int g = i * grid.n_azim + j;
      for (int ix = 0; ix < geom.m_x; ++ix) ax_(ix, g) = nx * std::exp(kJ * (pi * ix * vx));
    }
  }
}

Eigen::VectorXcd AngleDictionary::atom(int i, int j) const {
  if (i < 0 || i >= grid_.n_elev || j < 0 || j >= grid_.n_azim) {
    throw ContractViolation("AngleDictionary::atom: index out of range");
  }
  const int g = i * grid_.n_azim + j;
  Eigen::VectorXcd a(geom_.size());
  for (int ix = 0; ix < geom_.m_x; ++ix) {
    a.segment(ix * geom_.m_y, geom_.m_y) = ax_(ix, g) * ay_.col(i);
  }
  return a;
}

double esprit_doppler(const ReceivedBlock& block, double t_sym) {
  const auto n = block.pilots();
  const auto m_rf = block.rf_chains();
  if (n < 3) throw ContractViolation("esprit_doppler: need at least 3 pilots");
  if (m_rf < 1) throw ContractViolation("esprit_doppler: empty block");
  if (!(t_sym > 0.0)) throw ContractViolation("esprit_doppler: t_sym must be > 0");

  const Eigen::MatrixXcd y1 = block.samples.leftCols(n - 1).transpose();
  const Eigen::MatrixXcd y2 = block.samples.rightCols(n - 1).transpose();
  const double scale = 1.0 / (double(n - 1) * double(m_rf));
  Eigen::MatrixXcd r11 = scale * (y1 * y1.adjoint());
  Eigen::MatrixXcd r12 = scale * (y1 * y2.adjoint());
  r11 = 0.5 * (r11 + r11.adjoint()).eval();

  const double lmin = num::hermitian_eig(r11).eigenvalues(0);
  r11.diagonal().array() -= lmin;
  for (Eigen::Index p = 1; p < r12.rows(); ++p) r12(p, p - 1) -= lmin;

  const cd lambda = num::solve_rank1_pencil(r11, r12);
  if (!(std::abs(lambda) > 0.0) || !std::isfinite(std::abs(lambda))) {
    throw EstimationError("esprit_doppler: degenerate rotation factor");
  }
  return std::arg(lambda / std::abs(lambda)) / (2.0 * pi * t_sym);
}

Eigen::VectorXd somp_scores(const ReceivedBlock& block, const Combiner& w,
                            const AngleDictionary& dict) {
  const auto& geom = dict.geometry();
  const auto& grid = dict.grid();
  const int mx = geom.m_x;
  const int my = geom.m_y;
  const auto m_rf = w.rf_chains();
  const auto np = block.pilots();
  if (w.W.cols() != geom.size() || block.rf_chains() != m_rf) {
    throw ContractViolation("somp_angles: dimension mismatch");
  }

  // y(b) = W^H r(b); then contract over the y-axis of the array for every elevation.
  const Eigen::MatrixXcd y = w.W.adjoint() * block.samples;
  Eigen::MatrixXcd y2(np * mx, my);
  Eigen::MatrixXcd w2(m_rf * mx, my);
  for (int ix = 0; ix < mx; ++ix) {
    for (int iy = 0; iy < my; ++iy) {
      y2.block(ix * np, iy, np, 1) = y.row(ix * my + iy).transpose();
      w2.block(ix * m_rf, iy, m_rf, 1) = w.W.col(ix * my + iy);
    }
  }
  const Eigen::MatrixXcd z = y2 * dict.ay().conjugate();  // column i: np x mx
  const Eigen::MatrixXcd wk = w2 * dict.ay();             // column i: m_rf x mx

  const int na = grid.n_azim;
  Eigen::VectorXd corr(grid.size());
  Eigen::VectorXd norm2(grid.size());
  for (int i = 0; i < grid.n_elev; ++i) {
    const Eigen::Map<const Eigen::MatrixXcd> zi(z.col(i).data(), np, mx);
    const Eigen::Map<const Eigen::MatrixXcd> wki(wk.col(i).data(), m_rf, mx);
    const auto axi = dict.ax().middleCols(i * na, na);
    const Eigen::MatrixXcd s = zi * axi.conjugate();
    const Eigen::MatrixXcd d = wki.adjoint() * wki;
    const Eigen::MatrixXcd e = d * axi;
    for (int j = 0; j < na; ++j) {
      corr(i * na + j) = s.col(j).cwiseAbs().sum();
      norm2(i * na + j) = std::max(0.0, axi.col(j).dot(e.col(j)).real());
    }
  }
  const double floor = 1e-24 * std::max(norm2.maxCoeff(), 1e-300);
  Eigen::VectorXd score(grid.size());
  for (int g = 0; g < grid.size(); ++g) {
    score(g) = norm2(g) > floor ? corr(g) / std::sqrt(norm2(g)) : 0.0;
  }
  return score;
}

RoughEstimate somp_angles(const ReceivedBlock& block, const Combiner& w,
                          const AngleDictionary& dict) {
  const Eigen::VectorXd score = somp_scores(block, w, dict);
  int best = 0;
  for (int g = 1; g < score.size(); ++g) {
    if (score(g) > score(best)) best = g;
  }
  const auto& grid = dict.grid();
  RoughEstimate est;
  est.elev_index = best / grid.n_azim;
  est.azim_index = best % grid.n_azim;
  est.z.elevation = grid.elevation(est.elev_index);
  est.z.azimuth = grid.azimuth(est.azim_index);
  return est;
}

Eigen::MatrixXcd dft_rows(const ArrayGeometry& geom) {
  const int m = geom.size();
  Eigen::MatrixXcd f(m, m);
  const double norm = 1.0 / std::sqrt(double(m));
  for (int kx = 0; kx < geom.m_x; ++kx) {
    for (int ky = 0; ky < geom.m_y; ++ky) {
      const int k = kx * geom.m_y + ky;
      for (int ix = 0; ix < geom.m_x; ++ix) {
        for (int iy = 0; iy < geom.m_y; ++iy) {
          const double ph = double(kx * ix) / geom.m_x + double(ky * iy) / geom.m_y;
          f(k, ix * geom.m_y + iy) = norm * std::exp(-kJ * (2.0 * pi * ph));
        }
      }
    }
  }
  return f;
}

namespace {

void check_rf(const ArrayGeometry& geom, int m_rf) {
  if (m_rf < 1 || m_rf > geom.size()) {
    throw ContractViolation("combiner: m_rf must be in [1, M]");
  }
}

}  // namespace

Combiner dft_combiner(const ArrayGeometry& geom, int m_rf) {
  check_rf(geom, m_rf);
  // Beams closest to broadside along x first: kx = 0, 1, m_x - 1, 2, m_x - 2, ...
  std::vector<int> kx_order(geom.m_x);
  std::iota(kx_order.begin(), kx_order.end(), 0);
  std::stable_sort(kx_order.begin(), kx_order.end(), [&](int l, int r) {
    return std::min(l, geom.m_x - l) < std::min(r, geom.m_x - r);
  });
  const Eigen::MatrixXcd f = dft_rows(geom);
  Combiner c;
  c.W.resize(m_rf, geom.size());
  for (int r = 0; r < m_rf; ++r) {
    c.W.row(r) = f.row(kx_order[r / geom.m_y] * geom.m_y + r % geom.m_y);
  }
  c.W /= c.W.norm();
  return c;
}

Combiner design_combiner(const std::optional<std::pair<double, double>>& prev_angles,
                         const ArrayGeometry& geom, int m_rf) {
  check_rf(geom, m_rf);
  if (!prev_angles) return dft_combiner(geom, m_rf);
  const Eigen::VectorXcd a = array_response(prev_angles->first, prev_angles->second, geom);
  const Eigen::MatrixXcd f = dft_rows(geom);
  const Eigen::VectorXd corr = (f * a).cwiseAbs();
  std::vector<int> order(geom.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int l, int r) { return corr(l) < corr(r); });
  std::vector<int> picked(order.begin(), order.begin() + (m_rf - 1));
  std::sort(picked.begin(), picked.end());

  Combiner c;
  c.W.resize(m_rf, geom.size());
  c.W.row(0) = a.adjoint();
  for (int r = 1; r < m_rf; ++r) c.W.row(r) = f.row(picked[r - 1]);
  c.W /= c.W.norm();
  return c;
}

Combiner random_combiner(const ArrayGeometry& geom, int m_rf, Rng& rng) {
  check_rf(geom, m_rf);
  Combiner c;
  c.W.resize(m_rf, geom.size());
  const double norm = 1.0 / std::sqrt(double(m_rf) * geom.size());
  for (Eigen::Index col = 0; col < c.W.cols(); ++col) {
    for (Eigen::Index row = 0; row < c.W.rows(); ++row) {
      c.W(row, col) = norm * std::exp(kJ * uniform(rng, -pi, pi));
    }
  }
  return c;
}

namespace {

// sum_b r(b) e^{-j 2 pi u b T} / N_P
Eigen::VectorXcd compensated_mean(const ReceivedBlock& block, double doppler, double t_sym) {
  Eigen::VectorXcd phasor(block.pilots());
  for (Eigen::Index b = 0; b < phasor.size(); ++b) {
    phasor(b) = std::exp(-kJ * (2.0 * pi * doppler * double(b) * t_sym));
  }
  return block.samples * phasor / double(block.pilots());
}

}  // namespace

cd ls_summation_term(const ReceivedBlock& block, const Combiner& w, double elevation,
                     double azimuth, double doppler, double power, double t_sym,
                     const ArrayGeometry& geom) {
  if (w.W.cols() != geom.size() || block.rf_chains() != w.rf_chains()) {
    throw ContractViolation("ls_summation_term: dimension mismatch");
  }
  const Eigen::VectorXcd v = std::sqrt(power) * (w.W * array_response(elevation, azimuth, geom));
  if (!(v.norm() > 0.0)) throw EstimationError("ls_summation_term: zero effective steering vector");
  const Eigen::RowVectorXcd vp = num::pseudo_inverse(v);
  return (vp * compensated_mean(block, doppler, t_sym))(0);
}

Eigen::MatrixXcd ls_csi_inverse(const Combiner& w, double power) {
  const auto pinv = num::pseudo_inverse_with_rank(Eigen::MatrixXcd(std::sqrt(power) * w.W));
  if (pinv.rank < w.rf_chains()) throw EstimationError("ls_csi: combiner is rank deficient");
  return pinv.matrix;
}

Eigen::VectorXcd ls_csi(const ReceivedBlock& block, const Eigen::MatrixXcd& w_pinv,
                        double doppler, double t_sym) {
  if (block.rf_chains() != w_pinv.cols()) throw ContractViolation("ls_csi: dimension mismatch");
  return w_pinv * compensated_mean(block, doppler, t_sym);
}

Eigen::VectorXcd ls_csi(const ReceivedBlock& block, const Combiner& w, double doppler,
                        double power, double t_sym) {
  if (block.rf_chains() != w.rf_chains()) throw ContractViolation("ls_csi: dimension mismatch");
  return ls_csi(block, ls_csi_inverse(w, power), doppler, t_sym);
}

}  // namespace leotrack
