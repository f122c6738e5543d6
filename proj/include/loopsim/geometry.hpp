#pragma once

#include <optional>
#include <vector>

namespace loopsim::env {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double cross(Vec2 o) const { return x * o.y - y * o.x; }
    double norm2() const { return x * x + y * y; }
    double norm() const;
};

struct Segment {
    Vec2 a;
    Vec2 b;
};

double point_segment_distance(Vec2 p, const Segment& s);

// smallest s >= 0 with origin + s*dir on the segment; dir need not be unit
// (the result is in units of |dir|)
std::optional<double> ray_segment_hit(Vec2 origin, Vec2 dir, const Segment& s);

// earliest t in [0,1] at which a circle of radius r moving from p0 along
// disp first touches the segment; nullopt if the sweep stays clear.
// A start already in contact yields t=0 only when the motion approaches.
std::optional<double> sweep_circle_segment(Vec2 p0, Vec2 disp, double r,
                                           const Segment& s);

bool segments_intersect(const Segment& s1, const Segment& s2);

// even-odd rule; points exactly on the boundary are unspecified
bool point_in_polygon(Vec2 p, const std::vector<Vec2>& poly);

}  // namespace loopsim::env
