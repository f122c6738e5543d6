#include "loopsim/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace loopsim::env {

double Vec2::norm() const { return std::sqrt(norm2()); }

double point_segment_distance(Vec2 p, const Segment& s) {
    const Vec2 e = s.b - s.a;
    const double len2 = e.norm2();
    if (len2 == 0.0) return (p - s.a).norm();
    const double u = std::clamp((p - s.a).dot(e) / len2, 0.0, 1.0);
    return (p - (s.a + e * u)).norm();
}

std::optional<double> ray_segment_hit(Vec2 origin, Vec2 dir, const Segment& s) {
    const Vec2 e = s.b - s.a;
    const Vec2 ao = s.a - origin;
    const double denom = dir.cross(e);
    if (std::abs(denom) < 1e-14) {
        // parallel; hit only when collinear, then the nearest overlap point
        if (std::abs(ao.cross(dir)) > 1e-12) return std::nullopt;
        const double d2 = dir.norm2();
        if (d2 == 0.0) return std::nullopt;
        const double sa = ao.dot(dir) / d2;
        const double sb = (s.b - origin).dot(dir) / d2;
        const double hi = std::max(sa, sb);
        if (hi < 0.0) return std::nullopt;
        return std::max(0.0, std::min(sa, sb));
    }
    const double t = ao.cross(e) / denom;
    const double w = ao.cross(dir) / denom;
    if (t < 0.0 || w < 0.0 || w > 1.0) return std::nullopt;
    return t;
}

namespace {

// smaller root of the quadratic a t^2 + b t + c = 0 if real
std::optional<double> entering_root(double a, double b, double c) {
    if (a <= 0.0) return std::nullopt;
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) return std::nullopt;
    return (-b - std::sqrt(disc)) / (2.0 * a);
}

}  // namespace

std::optional<double> sweep_circle_segment(Vec2 p0, Vec2 disp, double r,
                                           const Segment& s) {
    const double speed2 = disp.norm2();
    if (speed2 == 0.0) return std::nullopt;
    std::optional<double> best;
    auto consider = [&](double t) {
        if (t < 0.0) t = 0.0;
        if (t > 1.0) return;
        if (!best || t < *best) best = t;
    };

    // endpoint caps: |p0 + t*disp - E|^2 = r^2
    for (Vec2 endpoint : {s.a, s.b}) {
        const Vec2 rel = p0 - endpoint;
        const double b = 2.0 * disp.dot(rel);
        if (b >= 0.0) continue;  // receding from this endpoint
        const auto t = entering_root(speed2, b, rel.norm2() - r * r);
        if (t && *t <= 1.0) consider(*t);
    }

    // flat side: signed line distance crosses +-r with the foot of the
    // perpendicular inside the segment
    const Vec2 e = s.b - s.a;
    const double elen = e.norm();
    if (elen > 0.0) {
        const Vec2 n{-e.y / elen, e.x / elen};
        const double s0 = n.dot(p0 - s.a);
        const double sv = n.dot(disp);
        if (std::abs(sv) > 0.0) {
            const double target = s0 >= 0.0 ? r : -r;
            const double t = (target - s0) / sv;
            // approaching means the signed distance moves toward zero
            if (t <= 1.0 && s0 * sv < 0.0) {
                const double tc = std::max(t, 0.0);
                const Vec2 pc = p0 + disp * tc;
                const double u = (pc - s.a).dot(e) / (elen * elen);
                if (u >= 0.0 && u <= 1.0) consider(t);
            }
        }
    }
    return best;
}

bool segments_intersect(const Segment& s1, const Segment& s2) {
    const auto orient = [](Vec2 a, Vec2 b, Vec2 c) {
        const double v = (b - a).cross(c - a);
        if (v > 1e-12) return 1;
        if (v < -1e-12) return -1;
        return 0;
    };
    const int o1 = orient(s1.a, s1.b, s2.a);
    const int o2 = orient(s1.a, s1.b, s2.b);
    const int o3 = orient(s2.a, s2.b, s1.a);
    const int o4 = orient(s2.a, s2.b, s1.b);
    if (o1 != o2 && o3 != o4) return true;
    const auto on = [](Vec2 a, Vec2 b, Vec2 p) {
        return std::min(a.x, b.x) - 1e-12 <= p.x && p.x <= std::max(a.x, b.x) + 1e-12 &&
               std::min(a.y, b.y) - 1e-12 <= p.y && p.y <= std::max(a.y, b.y) + 1e-12;
    };
    if (o1 == 0 && on(s1.a, s1.b, s2.a)) return true;
    if (o2 == 0 && on(s1.a, s1.b, s2.b)) return true;
    if (o3 == 0 && on(s2.a, s2.b, s1.a)) return true;
    if (o4 == 0 && on(s2.a, s2.b, s1.b)) return true;
    return false;
}

bool point_in_polygon(Vec2 p, const std::vector<Vec2>& poly) {
    bool inside = false;
    const std::size_t n = poly.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if (p.x < x) inside = !inside;
        }
    }
    return inside;
}

}  // namespace loopsim::env
