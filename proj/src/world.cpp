#include "loopsim/world.hpp"

#include <cmath>
#include <stdexcept>

namespace loopsim::env {

namespace {

struct Movement {
    double turn;
    double speed;
};

constexpr double kTurn = 14.0 * M_PI / 180.0;
constexpr Movement kMovements[4] = {
    {0.0, 0.2},     // slow forward
    {-kTurn, 0.4},  // right
    {kTurn, 0.4},   // left
    {0.0, 0.6},     // fast forward
};

double wrap_angle(double a) {
    a = std::fmod(a, 2.0 * M_PI);
    if (a < 0.0) a += 2.0 * M_PI;
    return a;
}

bool ray_hits_wall(Vec2 origin, Vec2 dir, double reach, const Track& t) {
    for (const Segment& s : t.segments()) {
        const auto hit = ray_segment_hit(origin, dir, s);
        if (hit && *hit <= reach) return true;
    }
    return false;
}

}  // namespace

SensorState sense(const WorldState& w, const Track& t, const BodySpec& b) {
    SensorState s;
    const double angles[2] = {w.heading + b.sensor_mount, w.heading - b.sensor_mount};
    bool* hits[2] = {&s.left, &s.right};
    for (int k = 0; k < 2; ++k) {
        const Vec2 dir{std::cos(angles[k]), std::sin(angles[k])};
        const Vec2 origin = w.position + dir * b.radius;
        *hits[k] = ray_hits_wall(origin, dir, b.sensor_length, t);
    }
    s.contact = t.wall_distance(w.position) <= b.radius + kContactTol;
    return s;
}

WorldState apply_action(const WorldState& w, const Track& t, const BodySpec& b,
                        unsigned action) {
    const Movement& mv = kMovements[action & 3u];
    WorldState out = w;
    out.heading = wrap_angle(w.heading + mv.turn);

    if (w.stuck) {
        // rotate on the spot; free only once both rays are clear
        out.sensors = sense(out, t, b);
        if (!out.sensors.left && !out.sensors.right) out.stuck = false;
        return out;
    }

    const Vec2 dir{std::cos(out.heading), std::sin(out.heading)};
    const Vec2 disp = dir * mv.speed;
    double t_hit = 1.0;
    bool contact = false;
    for (const Segment& s : t.segments()) {
        const auto hit = sweep_circle_segment(w.position, disp, b.radius, s);
        if (hit && *hit < t_hit) {
            t_hit = *hit;
            contact = true;
        }
    }
    out.position = w.position + disp * t_hit;
    if (contact) {
        // guard against float drift past the wall
        while (t_hit > 0.0 && t.wall_distance(out.position) < b.radius - kContactTol) {
            t_hit *= 0.5;
            out.position = w.position + disp * t_hit;
        }
        out.stuck = true;
    }
    out.sensors = sense(out, t, b);
    return out;
}

WorldState spawn(const Track& t, const BodySpec& b, Rng& rng) {
    const Track::Bounds bb = t.bounds();
    for (int tries = 0; tries < 100000; ++tries) {
        WorldState w;
        w.position = {rng.uniform(bb.min_x, bb.max_x), rng.uniform(bb.min_y, bb.max_y)};
        if (!t.inside_corridor(w.position)) continue;
        if (t.wall_distance(w.position) <= b.radius + 1e-3) continue;
        w.heading = rng.uniform(0.0, 2.0 * M_PI);
        w.sensors = sense(w, t, b);
        return w;
    }
    throw std::runtime_error(
        "spawn: no collision-free pose found; track too narrow for the body");
}

}  // namespace loopsim::env
