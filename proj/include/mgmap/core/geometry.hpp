#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

namespace mgmap {

constexpr double kPi = 3.14159265358979323846;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double cross(const Vec2& o) const { return x * o.y - y * o.x; }
  double norm() const { return std::sqrt(x * x + y * y); }
  double norm2() const { return x * x + y * y; }
  Vec2 normalized() const {
    double n = norm();
    return n > 0 ? Vec2{x / n, y / n} : Vec2{0, 0};
  }
  Vec2 rotated(double theta) const {
    double c = std::cos(theta), s = std::sin(theta);
    return {c * x - s * y, s * x + c * y};
  }
};

struct Segment {
  Vec2 a, b;
};

// Normalizes into (-pi, pi].
inline double normalize_angle(double theta) {
  theta = std::fmod(theta, 2.0 * kPi);
  if (theta <= -kPi) theta += 2.0 * kPi;
  if (theta > kPi) theta -= 2.0 * kPi;
  return theta;
}

inline double deg2rad(double d) { return d * kPi / 180.0; }

inline double point_segment_distance(const Vec2& p, const Segment& s) {
  Vec2 ab = s.b - s.a;
  double len2 = ab.norm2();
  if (len2 == 0.0) return (p - s.a).norm();
  double t = std::clamp((p - s.a).dot(ab) / len2, 0.0, 1.0);
  return (p - (s.a + ab * t)).norm();
}

// Ray p + t*d against segment; returns smallest t >= 0 or nullopt.
inline std::optional<double> ray_segment(const Vec2& p, const Vec2& d, const Segment& s) {
  Vec2 v = s.b - s.a;
  double denom = d.cross(v);
  if (std::abs(denom) < 1e-15) return std::nullopt;
  Vec2 w = s.a - p;
  double t = w.cross(v) / denom;
  double u = w.cross(d) / denom;
  if (t >= 0.0 && u >= 0.0 && u <= 1.0) return t;
  return std::nullopt;
}

// Ray against circle boundary; smallest t >= 0.
inline std::optional<double> ray_circle(const Vec2& p, const Vec2& d, const Vec2& c, double r) {
  Vec2 m = p - c;
  double b = m.dot(d);
  double cc = m.norm2() - r * r;
  double disc = b * b - cc;  // d assumed unit length
  if (disc < 0.0) return std::nullopt;
  double sq = std::sqrt(disc);
  double t0 = -b - sq;
  double t1 = -b + sq;
  if (t0 >= 0.0) return t0;
  if (t1 >= 0.0) return t1;
  return std::nullopt;
}

struct Polyline {
  std::vector<Vec2> pts;

  double length() const {
    double s = 0;
    for (size_t i = 1; i < pts.size(); ++i) s += (pts[i] - pts[i - 1]).norm();
    return s;
  }

  // Point at arc length s (clamped to the ends).
  Vec2 at_arc(double s) const {
    if (pts.empty()) return {};
    if (s <= 0) return pts.front();
    for (size_t i = 1; i < pts.size(); ++i) {
      double seg = (pts[i] - pts[i - 1]).norm();
      if (s <= seg) {
        if (seg == 0) return pts[i];
        return pts[i - 1] + (pts[i] - pts[i - 1]) * (s / seg);
      }
      s -= seg;
    }
    return pts.back();
  }

  // Distance from p to the polyline.
  double distance(const Vec2& p) const {
    if (pts.empty()) return std::numeric_limits<double>::infinity();
    if (pts.size() == 1) return (p - pts[0]).norm();
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 1; i < pts.size(); ++i)
      best = std::min(best, point_segment_distance(p, Segment{pts[i - 1], pts[i]}));
    return best;
  }

  // Arc-length parameter of the point on the polyline nearest to p.
  double nearest_arc(const Vec2& p) const {
    double best = std::numeric_limits<double>::infinity();
    double best_arc = 0.0, acc = 0.0;
    if (pts.size() == 1) return 0.0;
    for (size_t i = 1; i < pts.size(); ++i) {
      Vec2 ab = pts[i] - pts[i - 1];
      double len2 = ab.norm2();
      double t = len2 > 0 ? std::clamp((p - pts[i - 1]).dot(ab) / len2, 0.0, 1.0) : 0.0;
      Vec2 q = pts[i - 1] + ab * t;
      double d = (p - q).norm();
      if (d < best) {
        best = d;
        best_arc = acc + t * std::sqrt(len2);
      }
      acc += std::sqrt(len2);
    }
    return best_arc;
  }
};

}  // namespace mgmap
