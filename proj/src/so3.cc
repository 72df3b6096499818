#include "rotavg/so3.h"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "rotavg/errors.h"

namespace rotavg {

Eigen::Quaterniond Canonical(const Eigen::Quaterniond& q) {
  Eigen::Quaterniond out = q;
  // Leave already-unit input untouched so that canonicalization is
  // idempotent bit for bit.
  const double n = q.norm();
  if (std::abs(n - 1.0) > 4.0 * std::numeric_limits<double>::epsilon()) {
    out.coeffs() /= n;
  }
  bool flip = out.w() < 0.0;
  if (out.w() == 0.0) {
    for (int k = 0; k < 3; ++k) {
      if (out.vec()[k] != 0.0) {
        flip = out.vec()[k] < 0.0;
        break;
      }
    }
  }
  if (flip) {
    out.coeffs() = -out.coeffs();
  }
  return out;
}

Rotation::Rotation(const Eigen::Quaterniond& unit_q) : q_(Canonical(unit_q)) {}

Rotation Rotation::FromQuaternion(double w, double x, double y, double z) {
  return FromQuaternion(Eigen::Quaterniond(w, x, y, z));
}

Rotation Rotation::FromQuaternion(const Eigen::Quaterniond& q) {
  const double n = q.norm();
  if (!std::isfinite(n) || n < 1e-12) {
    throw std::invalid_argument("quaternion is zero or not finite");
  }
  return Rotation(q);
}

Rotation Rotation::FromMatrix(const Eigen::Matrix3d& m) {
  return FromQuaternion(Eigen::Quaterniond(m));
}

Rotation Rotation::FromAxisAngle(const Eigen::Vector3d& axis, double angle_rad) {
  const double n = axis.norm();
  if (!std::isfinite(n) || n < 1e-15) {
    throw std::invalid_argument("rotation axis is zero or not finite");
  }
  return Rotation(Eigen::Quaterniond(Eigen::AngleAxisd(angle_rad, axis / n)));
}

Rotation Rotation::AboutX(double deg) {
  return FromAxisAngle(Eigen::Vector3d::UnitX(), DegToRad(deg));
}
Rotation Rotation::AboutY(double deg) {
  return FromAxisAngle(Eigen::Vector3d::UnitY(), DegToRad(deg));
}
Rotation Rotation::AboutZ(double deg) {
  return FromAxisAngle(Eigen::Vector3d::UnitZ(), DegToRad(deg));
}

Rotation Rotation::Inverse() const { return Rotation(q_.conjugate()); }

double Rotation::Angle() const {
  return 2.0 * std::atan2(q_.vec().norm(), std::abs(q_.w()));
}

Rotation Rotation::operator*(const Rotation& rhs) const {
  return Rotation(q_ * rhs.q_);
}

AxisAngle AxisAngle::FromVector(const Eigen::Vector3d& v) {
  AxisAngle out;
  out.angle = v.norm();
  if (out.angle > 0.0) {
    out.axis = v / out.angle;
  }
  return out;
}

double AngularDistanceRad(const Rotation& a, const Rotation& b) {
  // b * a^T and a^T * b share the rotation angle.
  const Eigen::Quaterniond rel = a.quaternion().conjugate() * b.quaternion();
  return 2.0 * std::atan2(rel.vec().norm(), std::abs(rel.w()));
}

double AngularDistanceDeg(const Rotation& a, const Rotation& b) {
  return RadToDeg(AngularDistanceRad(a, b));
}

Eigen::Vector3d LogMap(const Rotation& r) {
  const Eigen::Quaterniond& q = r.quaternion();  // w >= 0
  const double vnorm = q.vec().norm();
  const double angle = 2.0 * std::atan2(vnorm, q.w());
  if (angle > kPi - kNearPiBand) {
    throw NearPiAmbiguity("log map undefined near pi (angle " +
                          std::to_string(RadToDeg(angle)) + " deg)");
  }
  if (vnorm < 1e-8) {
    // 2 atan(s / w) / s = 2 / w * (1 - s^2 / (3 w^2) + ...)
    const double w2 = q.w() * q.w();
    return (2.0 / q.w()) * (1.0 - vnorm * vnorm / (3.0 * w2)) * q.vec();
  }
  return (angle / vnorm) * q.vec();
}

Rotation ExpMap(const Eigen::Vector3d& v) {
  const double theta = v.norm();
  const double half = 0.5 * theta;
  double scale;  // sin(theta/2) / theta
  if (theta < 1e-8) {
    scale = 0.5 - theta * theta / 48.0;
  } else {
    scale = std::sin(half) / theta;
  }
  return Rotation::FromQuaternion(std::cos(half), scale * v.x(), scale * v.y(),
                                  scale * v.z());
}

Eigen::Matrix3d Hat(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

Eigen::Matrix3d RightJacobianInverse(const Eigen::Vector3d& v) {
  const double theta = v.norm();
  const Eigen::Matrix3d w = Hat(v);
  double c;
  if (theta < 1e-5) {
    c = 1.0 / 12.0 + theta * theta / 720.0;
  } else {
    c = 1.0 / (theta * theta) -
        (1.0 + std::cos(theta)) / (2.0 * theta * std::sin(theta));
  }
  return Eigen::Matrix3d::Identity() + 0.5 * w + c * w * w;
}

Rotation SampleUniform(std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (;;) {
    const double w = normal(rng);
    const double x = normal(rng);
    const double y = normal(rng);
    const double z = normal(rng);
    if (w * w + x * x + y * y + z * z > 1e-12) {
      return Rotation::FromQuaternion(w, x, y, z);
    }
  }
}

Rotation SamplePerturbation(std::mt19937_64& rng, double sigma_deg) {
  if (sigma_deg < 0.0) {
    throw std::invalid_argument("perturbation sigma must be non-negative");
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::Vector3d axis;
  do {
    const double ax = normal(rng);
    const double ay = normal(rng);
    const double az = normal(rng);
    axis = Eigen::Vector3d(ax, ay, az);
  } while (axis.norm() < 1e-12);
  const double angle = std::abs(normal(rng)) * DegToRad(sigma_deg);
  return Rotation::FromAxisAngle(axis, angle);
}

}  // namespace rotavg
