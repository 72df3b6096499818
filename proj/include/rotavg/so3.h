#pragma once

#include <random>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace rotavg {

inline constexpr double kPi = 3.14159265358979323846;

inline constexpr double DegToRad(double deg) { return deg * kPi / 180.0; }
inline constexpr double RadToDeg(double rad) { return rad * 180.0 / kPi; }

// log_map refuses rotation angles closer than this to pi.
inline constexpr double kNearPiBand = 1e-6;

// An element of SO(3), stored as a unit quaternion with non-negative scalar
// part. Instances are immutable; every factory normalizes its input.
class Rotation {
 public:
  Rotation() : q_(Eigen::Quaterniond::Identity()) {}

  static Rotation Identity() { return Rotation(); }

  // (w, x, y, z) order. Throws std::invalid_argument on a zero or
  // non-finite quaternion.
  static Rotation FromQuaternion(double w, double x, double y, double z);
  static Rotation FromQuaternion(const Eigen::Quaterniond& q);

  // Projects onto SO(3) through the quaternion of the matrix.
  static Rotation FromMatrix(const Eigen::Matrix3d& m);

  static Rotation FromAxisAngle(const Eigen::Vector3d& axis, double angle_rad);

  // Rotation about a coordinate axis by an angle in degrees.
  static Rotation AboutX(double deg);
  static Rotation AboutY(double deg);
  static Rotation AboutZ(double deg);

  const Eigen::Quaterniond& quaternion() const { return q_; }
  double w() const { return q_.w(); }
  double x() const { return q_.x(); }
  double y() const { return q_.y(); }
  double z() const { return q_.z(); }

  Eigen::Matrix3d Matrix() const { return q_.toRotationMatrix(); }

  Rotation Inverse() const;

  // Rotation angle in radians, in [0, pi].
  double Angle() const;

  Rotation operator*(const Rotation& rhs) const;

  Eigen::Vector3d operator*(const Eigen::Vector3d& v) const { return q_ * v; }

  // Exact equality of the canonical quaternions.
  bool operator==(const Rotation& rhs) const { return q_.coeffs() == rhs.q_.coeffs(); }

 private:
  explicit Rotation(const Eigen::Quaterniond& unit_q);

  Eigen::Quaterniond q_;
};

// Tangent-space coordinate: unit axis and angle in [0, pi].
struct AxisAngle {
  Eigen::Vector3d axis = Eigen::Vector3d::UnitX();
  double angle = 0.0;

  // Splits a rotation vector. A zero vector maps to angle 0 about x.
  static AxisAngle FromVector(const Eigen::Vector3d& v);
  Eigen::Vector3d Vector() const { return axis * angle; }
};

// Flips the quaternion sign so that w >= 0 (and normalizes).
Eigen::Quaterniond Canonical(const Eigen::Quaterniond& q);

inline Rotation Compose(const Rotation& a, const Rotation& b) { return a * b; }
inline Rotation Inverse(const Rotation& a) { return a.Inverse(); }

// Geodesic distance arccos((tr(B A^T) - 1) / 2), evaluated through the
// relative quaternion for full precision near zero and pi.
double AngularDistanceRad(const Rotation& a, const Rotation& b);
double AngularDistanceDeg(const Rotation& a, const Rotation& b);

// Rotation vector (radians). Throws NearPiAmbiguity when the angle is
// within kNearPiBand of pi.
Eigen::Vector3d LogMap(const Rotation& r);
Rotation ExpMap(const Eigen::Vector3d& v);

// Inverse of the right Jacobian of SO(3) at rotation vector `v`.
Eigen::Matrix3d RightJacobianInverse(const Eigen::Vector3d& v);

Eigen::Matrix3d Hat(const Eigen::Vector3d& v);

// Haar-uniform rotation.
Rotation SampleUniform(std::mt19937_64& rng);

// Uniform random axis, angle |N(0, sigma_deg)|.
Rotation SamplePerturbation(std::mt19937_64& rng, double sigma_deg);

}  // namespace rotavg
