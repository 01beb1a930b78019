#pragma once

// Earth-centered fixed (ECF) geometry: circular-orbit state evolution built
// from coordinate rotations, the satellite array frame, and the map from
// satellite/ground-user states to (Doppler, elevation, azimuth).

#include <Eigen/Dense>
#include <cmath>

#include "leotrack/random.hpp"

namespace leotrack {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat36 = Eigen::Matrix<double, 3, 6>;

/// Rotation about the z-axis (counterclockwise by theta).
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 3> rot_about_z(Scalar theta) {
  using std::cos;
  using std::sin;
  Eigen::Matrix<Scalar, 3, 3> r;
  r << cos(theta), -sin(theta), Scalar(0),
       sin(theta), cos(theta), Scalar(0),
       Scalar(0), Scalar(0), Scalar(1);
  return r;
}

/// Rotation about the x-axis (counterclockwise by theta).
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 3> rot_about_x(Scalar theta) {
  using std::cos;
  using std::sin;
  Eigen::Matrix<Scalar, 3, 3> r;
  r << Scalar(1), Scalar(0), Scalar(0),
       Scalar(0), cos(theta), -sin(theta),
       Scalar(0), sin(theta), cos(theta);
  return r;
}

/// Position (m) and velocity (m/s) in the ECF frame.
struct StateVector {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();

  Vec6 stacked() const {
    Vec6 q;
    q << position, velocity;
    return q;
  }
  static StateVector from_stacked(const Vec6& q) { return {q.head<3>(), q.tail<3>()}; }
};

/// Circular orbit about the earth center.
///
/// node_angle is the angle between the X-axis and the node line, inclination
/// the tilt of the orbit plane against XOY, angular_rate is signed
/// (positive = counterclockwise about the plane normal).
struct OrbitSpec {
  double node_angle = 0.0;
  double inclination = 0.0;
  double angular_rate = 0.0;
  double radius = 1.0;

  /// Unit normal of the orbit plane, P_z(node) P_x(incl) e_z.
  Vec3 normal() const;

  /// Orbit through `state` with counterclockwise motion about
  /// position x velocity. Velocity is assumed tangential.
  static OrbitSpec from_state(const StateVector& state);
};

/// Per-block transition. `per_vector` acts on position and velocity alike.
struct EvolutionMatrix {
  Mat3 per_vector = Mat3::Identity();

  Mat6 stacked() const {
    Mat6 f = Mat6::Zero();
    f.topLeftCorner<3, 3>() = per_vector;
    f.bottomRightCorner<3, 3>() = per_vector;
    return f;
  }
};

/// Per-axis standard deviations of the ground-user evolution noise.
struct ProcessNoiseSpec {
  double sigma_pos = 0.0;  // m
  double sigma_vel = 0.0;  // m/s

  Mat6 covariance() const;
};

/// F = P_z(node) P_x(incl) P_z(rate * T) P_x(incl)^T P_z(node)^T.
EvolutionMatrix build_evolution(const OrbitSpec& orbit, double block_duration);

/// Noise-free propagation (satellite).
StateVector evolve_state(const StateVector& q, const EvolutionMatrix& f);

/// q' = F q + w with per-axis real Gaussian w. Six standard normals are drawn
/// on every call, whatever the sigmas, so sweeps over the noise level share
/// the same underlying variates.
StateVector evolve_state(const StateVector& q, const EvolutionMatrix& f,
                         const ProcessNoiseSpec& noise, Rng& rng);

/// Orientation of the satellite UPA. The plane is perpendicular to the orbit
/// plane and its normal points at the earth center.
struct ArrayFrame {
  Vec3 normal;
  Vec3 s_x;
  Vec3 s_y;
};

ArrayFrame array_frame(const StateVector& sat);

/// Projection of p_u onto the plane through p_s with normal n.
Vec3 project_onto_plane(const Vec3& p_u, const Vec3& p_s, const Vec3& n);

/// Doppler shift (Hz) of the uplink seen at the satellite.
double measure_doppler(const StateVector& sat, const StateVector& gu, double wavelength);

/// Elevation (rad) of the ground user relative to the array plane, in [0, pi/2].
double measure_elevation(const StateVector& sat, const StateVector& gu, const Vec3& n);

/// Azimuth (rad) in [-pi/2, pi/2]. Throws GeometryError when the user projects
/// onto the array origin.
double measure_azimuth(const StateVector& sat, const StateVector& gu, const ArrayFrame& frame);

/// The tracked parameter triple.
struct MeasurementVector {
  double doppler = 0.0;    // Hz
  double elevation = 0.0;  // rad
  double azimuth = 0.0;    // rad

  Vec3 vector() const { return {doppler, elevation, azimuth}; }
  static MeasurementVector from_vector(const Vec3& z) { return {z(0), z(1), z(2)}; }
};

MeasurementVector measurement_map(const StateVector& sat, const StateVector& gu,
                                  const ArrayFrame& frame, double wavelength);

/// d z / d q_gu by central differences, h_i = 1e-6 * max(1, |x_i|).
Mat36 jacobian_G(const StateVector& sat, const StateVector& gu_pred, const ArrayFrame& frame,
                 double wavelength);

/// Closed-form gradient of the Doppler map with respect to the ground-user state.
Eigen::Matrix<double, 1, 6> doppler_gradient(const StateVector& sat, const StateVector& gu,
                                             double wavelength);

}  // namespace leotrack
