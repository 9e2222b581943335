#ifndef TOWBOT_GEOMETRY_HPP_
#define TOWBOT_GEOMETRY_HPP_

#include <array>
#include <cmath>
#include <stdexcept>

namespace towbot {

struct Vec2 {
  double x{0.0};
  double y{0.0};

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double k) const { return {x * k, y * k}; }
  Vec2 operator-() const { return {-x, -y}; }

  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double cross(const Vec2& o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
  Vec2 normalized() const {
    const double n = norm();
    if (n < 1e-15) throw std::domain_error("cannot normalize zero vector");
    return {x / n, y / n};
  }
  // 90-deg CCW rotation
  Vec2 perp() const { return {-y, x}; }
  double angle() const { return std::atan2(y, x); }
};

inline Vec2 operator*(double k, const Vec2& v) { return v * k; }

// Wraps to (-pi, pi], half-open at -pi.
inline double wrap_angle(double a) {
  if (!std::isfinite(a)) throw std::domain_error("wrap_angle: non-finite input");
  double r = std::remainder(a, 2.0 * M_PI);  // [-pi, pi]
  if (r <= -M_PI) r += 2.0 * M_PI;
  return r;
}

// Planar pose; heading psi is the forward direction angle, CCW positive,
// stored wrapped to (-pi, pi].
struct Pose2 {
  double x{0.0};
  double y{0.0};
  double psi{0.0};

  Pose2() = default;
  Pose2(double x_, double y_, double psi_) : x(x_), y(y_), psi(wrap_angle(psi_)) {}
};

enum class FrameId { Global, Robot, Wheelchair, CameraD, CameraT, Bev };

// SE(2) homogeneous transform. Factories always produce a valid transform:
// orthonormal rotation block, bottom row [0 0 1].
class Transform2 {
 public:
  Transform2() : m_{1, 0, 0, 0, 1, 0, 0, 0, 1} {}

  static Transform2 identity() { return Transform2{}; }

  static Transform2 rotation(double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    return Transform2{{c, -s, 0, s, c, 0, 0, 0, 1}};
  }

  static Transform2 translation(double x, double y) {
    return Transform2{{1, 0, x, 0, 1, y, 0, 0, 1}};
  }

  static Transform2 from_pose(const Pose2& p) {
    const double c = std::cos(p.psi), s = std::sin(p.psi);
    return Transform2{{c, -s, p.x, s, c, p.y, 0, 0, 1}};
  }

  double at(int r, int c) const { return m_[3 * r + c]; }

  Vec2 apply(const Vec2& p) const {
    return {m_[0] * p.x + m_[1] * p.y + m_[2],
            m_[3] * p.x + m_[4] * p.y + m_[5]};
  }

  // Rotates a direction without translating it.
  Vec2 apply_direction(const Vec2& d) const {
    return {m_[0] * d.x + m_[1] * d.y, m_[3] * d.x + m_[4] * d.y};
  }

  double rotation_angle() const { return std::atan2(m_[3], m_[0]); }
  Vec2 translation_part() const { return {m_[2], m_[5]}; }

  Transform2 operator*(const Transform2& o) const {
    // Rigid structure: rotation blocks multiply, translation composes.
    return Transform2{{m_[0] * o.m_[0] + m_[1] * o.m_[3],
                       m_[0] * o.m_[1] + m_[1] * o.m_[4],
                       m_[0] * o.m_[2] + m_[1] * o.m_[5] + m_[2],
                       m_[3] * o.m_[0] + m_[4] * o.m_[3],
                       m_[3] * o.m_[1] + m_[4] * o.m_[4],
                       m_[3] * o.m_[2] + m_[4] * o.m_[5] + m_[5],
                       0, 0, 1}};
  }

  Transform2 inverse() const {
    // [R t]^-1 = [R^T  -R^T t]
    const double ix = -(m_[0] * m_[2] + m_[3] * m_[5]);
    const double iy = -(m_[1] * m_[2] + m_[4] * m_[5]);
    return Transform2{{m_[0], m_[3], ix, m_[1], m_[4], iy, 0, 0, 1}};
  }

  bool is_rigid(double tol = 1e-9) const {
    const double det = m_[0] * m_[4] - m_[1] * m_[3];
    const double c0 = m_[0] * m_[0] + m_[3] * m_[3];
    const double c1 = m_[1] * m_[1] + m_[4] * m_[4];
    const double dot = m_[0] * m_[1] + m_[3] * m_[4];
    return std::abs(det - 1.0) < tol && std::abs(c0 - 1.0) < tol &&
           std::abs(c1 - 1.0) < tol && std::abs(dot) < tol &&
           m_[6] == 0.0 && m_[7] == 0.0 && m_[8] == 1.0;
  }

 private:
  explicit Transform2(const std::array<double, 9>& m) : m_(m) {}
  std::array<double, 9> m_;
};

inline Transform2 compose(const Transform2& a, const Transform2& b) { return a * b; }
inline Transform2 invert(const Transform2& t) { return t.inverse(); }
inline Transform2 pose_to_transform(const Pose2& p) { return Transform2::from_pose(p); }

}  // namespace towbot

#endif  // TOWBOT_GEOMETRY_HPP_
