#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "loopsim/geometry.hpp"

namespace loopsim::env {

// Closed racetrack corridor between an outer and an inner boundary polyline.
// Coordinates are in unit lengths.
class Track {
public:
    Track(std::vector<Vec2> outer, std::vector<Vec2> inner);

    const std::vector<Vec2>& outer() const { return outer_; }
    const std::vector<Vec2>& inner() const { return inner_; }
    const std::vector<Segment>& segments() const { return segments_; }

    // between the boundaries (inside outer, outside inner)
    bool inside_corridor(Vec2 p) const;
    double wall_distance(Vec2 p) const;

    struct Bounds {
        double min_x, min_y, max_x, max_y;
    };
    Bounds bounds() const;

    // empty when the track is well-formed; otherwise one message per problem
    std::vector<std::string> validate() const;

    // rounded-rectangle annulus centered at the origin
    static Track rounded_rect_annulus(double outer_w, double outer_h,
                                      double corridor_width,
                                      double outer_corner_radius,
                                      double inner_corner_radius,
                                      int arc_steps = 8);

    // outer 20x12, corridor width 4 (see README for the file format)
    static Track default_track();

    static Track parse(std::istream& in);
    static Track load_file(const std::string& path);
    void write(std::ostream& out) const;

private:
    std::vector<Vec2> outer_;
    std::vector<Vec2> inner_;
    std::vector<Segment> segments_;
};

}  // namespace loopsim::env
