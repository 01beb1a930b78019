#include "leotrack/geometry.hpp"

#include <algorithm>
#include <numbers>

#include "leotrack/errors.hpp"

namespace leotrack {

Vec3 OrbitSpec::normal() const {
  return rot_about_z(node_angle) * rot_about_x(inclination) * Vec3::UnitZ();
}

OrbitSpec OrbitSpec::from_state(const StateVector& state) {
  const Vec3 h = state.position.cross(state.velocity);
  const double r = state.position.norm();
  if (r <= 0.0) throw GeometryError("orbit: zero radius");
  OrbitSpec orbit;
  orbit.radius = r;
  if (h.norm() == 0.0) {
    // Stationary or radial motion: no plane, no rotation.
    return orbit;
  }
  const Vec3 n = h.normalized();
  // n = (sin(i) sin(node), -sin(i) cos(node), cos(i))
  orbit.inclination = std::acos(std::clamp(n.z(), -1.0, 1.0));
  orbit.node_angle = std::hypot(n.x(), n.y()) > 1e-15 ? std::atan2(n.x(), -n.y()) : 0.0;
  orbit.angular_rate = state.velocity.norm() / r;
  return orbit;
}

Mat6 ProcessNoiseSpec::covariance() const {
  Vec6 d;
  const double p = sigma_pos * sigma_pos;
  const double v = sigma_vel * sigma_vel;
  d << p, p, p, v, v, v;
  return d.asDiagonal();
}

EvolutionMatrix build_evolution(const OrbitSpec& orbit, double block_duration) {
  if (!(block_duration > 0.0)) throw ContractViolation("build_evolution: block duration must be > 0");
  const Mat3 frame = rot_about_z(orbit.node_angle) * rot_about_x(orbit.inclination);
  const Mat3 in_plane = rot_about_z(orbit.angular_rate * block_duration);
  return {frame * in_plane * frame.transpose()};
}

StateVector evolve_state(const StateVector& q, const EvolutionMatrix& f) {
  return {f.per_vector * q.position, f.per_vector * q.velocity};
}

StateVector evolve_state(const StateVector& q, const EvolutionMatrix& f,
                         const ProcessNoiseSpec& noise, Rng& rng) {
  StateVector out = evolve_state(q, f);
  Vec6 w;
  for (int i = 0; i < 6; ++i) w(i) = standard_normal(rng);
  out.position += noise.sigma_pos * w.head<3>();
  out.velocity += noise.sigma_vel * w.tail<3>();
  return out;
}

ArrayFrame array_frame(const StateVector& sat) {
  const double r = sat.position.norm();
  const Vec3 h = sat.position.cross(sat.velocity);
  if (r == 0.0 || h.norm() <= 1e-12 * r * sat.velocity.norm()) {
    throw GeometryError("array_frame: velocity parallel to position, frame undefined");
  }
  ArrayFrame frame;
  frame.normal = -sat.position / r;
  frame.s_x = h.normalized();
  frame.s_y = frame.normal.cross(frame.s_x);
  return frame;
}

Vec3 project_onto_plane(const Vec3& p_u, const Vec3& p_s, const Vec3& n) {
  const double nn = n.squaredNorm();
  if (nn <= 0.0) throw ContractViolation("project_onto_plane: zero normal");
  const double c_s = -n.dot(p_s);
  Vec3 out;
  out.x() = ((n.y() * n.y() + n.z() * n.z()) * p_u.x() - n.x() * (n.y() * p_u.y() + n.z() * p_u.z() + c_s)) / nn;
  out.y() = ((n.x() * n.x() + n.z() * n.z()) * p_u.y() - n.y() * (n.x() * p_u.x() + n.z() * p_u.z() + c_s)) / nn;
  out.z() = ((n.x() * n.x() + n.y() * n.y()) * p_u.z() - n.z() * (n.x() * p_u.x() + n.y() * p_u.y() + c_s)) / nn;
  return out;
}

namespace {

Vec3 line_of_sight(const StateVector& sat, const StateVector& gu) {
  const Vec3 d = sat.position - gu.position;
  if (d.norm() == 0.0) throw GeometryError("satellite and ground user coincide");
  return d;
}

}  // namespace

double measure_doppler(const StateVector& sat, const StateVector& gu, double wavelength) {
  if (!(wavelength > 0.0)) throw ContractViolation("measure_doppler: wavelength must be > 0");
  const Vec3 d = line_of_sight(sat, gu);
  return -(sat.velocity - gu.velocity).dot(d) / (wavelength * d.norm());
}

double measure_elevation(const StateVector& sat, const StateVector& gu, const Vec3& n) {
  const Vec3 d = line_of_sight(sat, gu);
  const double s = std::abs(n.dot(d)) / (n.norm() * d.norm());
  return std::asin(std::clamp(s, -1.0, 1.0));
}

double measure_azimuth(const StateVector& sat, const StateVector& gu, const ArrayFrame& frame) {
  const Vec3 sp = project_onto_plane(gu.position, sat.position, frame.normal) - sat.position;
  const double len = sp.norm();
  if (len <= 1e-12 * std::max(1.0, sat.position.norm())) {
    throw GeometryError("measure_azimuth: ground user on the array boresight");
  }
  const double c = sp.dot(frame.s_x) / (len * frame.s_x.norm());
  return std::numbers::pi / 2.0 - std::acos(std::clamp(c, -1.0, 1.0));
}

MeasurementVector measurement_map(const StateVector& sat, const StateVector& gu,
                                  const ArrayFrame& frame, double wavelength) {
  return {measure_doppler(sat, gu, wavelength), measure_elevation(sat, gu, frame.normal),
          measure_azimuth(sat, gu, frame)};
}

Mat36 jacobian_G(const StateVector& sat, const StateVector& gu_pred, const ArrayFrame& frame,
                 double wavelength) {
  Mat36 g;
  const Vec6 x0 = gu_pred.stacked();
  try {
    for (int i = 0; i < 6; ++i) {
      const double h = 1e-6 * std::max(1.0, std::abs(x0(i)));
      Vec6 xp = x0;
      Vec6 xm = x0;
      xp(i) += h;
      xm(i) -= h;
      const Vec3 zp =
          measurement_map(sat, StateVector::from_stacked(xp), frame, wavelength).vector();
      const Vec3 zm =
          measurement_map(sat, StateVector::from_stacked(xm), frame, wavelength).vector();
      g.col(i) = (zp - zm) / (xp(i) - xm(i));
    }
  } catch (const GeometryError& e) {
    throw GeometryError(std::string("jacobian_G: map undefined within stencil: ") + e.what());
  }
  return g;
}

Eigen::Matrix<double, 1, 6> doppler_gradient(const StateVector& sat, const StateVector& gu,
                                             double wavelength) {
  const Vec3 d = line_of_sight(sat, gu);
  const double r = d.norm();
  const Vec3 dhat = d / r;
  const Vec3 dv = sat.velocity - gu.velocity;
  Eigen::Matrix<double, 1, 6> grad;
  grad.head<3>() = ((dv - dv.dot(dhat) * dhat) / (wavelength * r)).transpose();
  grad.tail<3>() = (dhat / wavelength).transpose();
  return grad;
}

}  // namespace leotrack
