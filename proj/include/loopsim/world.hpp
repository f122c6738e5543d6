#pragma once

#include "loopsim/rng.hpp"
#include "loopsim/track.hpp"

namespace loopsim::env {

inline constexpr double kContactTol = 1e-6;

// Round body with two wall-detecting rays mounted at +-sensor_mount from the
// heading; each ray starts on the body surface and reaches sensor_length.
struct BodySpec {
    double radius = 0.5;
    double sensor_length = 1.0;          // valid range [0.5, 2]
    double sensor_mount = M_PI / 6.0;    // 30 degrees
};

// Sensor bits, packed as bit0 = left ray, bit1 = right ray, bit2 = contact.
struct SensorState {
    bool left = false;
    bool right = false;
    bool contact = false;

    unsigned bits() const {
        return (left ? 1u : 0u) | (right ? 2u : 0u) | (contact ? 4u : 0u);
    }
    static SensorState from_bits(unsigned b) {
        return {(b & 1u) != 0, (b & 2u) != 0, (b & 4u) != 0};
    }
};

struct WorldState {
    Vec2 position;
    double heading = 0.0;
    bool stuck = false;
    SensorState sensors;
};

SensorState sense(const WorldState& w, const Track& t, const BodySpec& b);

// Movements: action bits (a0,a1) with index a0|a1<<1.
//   (0,0) slow forward 0.2   (1,0) right -14deg at 0.4
//   (0,1) left +14deg at 0.4 (1,1) fast forward 0.6
// Rotation is applied first, then the translation along the new heading,
// swept against the walls. Contact truncates the move and sets `stuck`;
// while stuck the body only rotates, and the flag clears once both rays
// are free of walls.
WorldState apply_action(const WorldState& w, const Track& t, const BodySpec& b,
                        unsigned action);

// collision-free pose, uniform over the corridor with uniform heading
WorldState spawn(const Track& t, const BodySpec& b, Rng& rng);

}  // namespace loopsim::env
