#include "loopsim/track.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace loopsim::env {

namespace {

void append_ring(std::vector<Segment>& segs, const std::vector<Vec2>& ring) {
    for (std::size_t i = 0; i < ring.size(); ++i)
        segs.push_back({ring[i], ring[(i + 1) % ring.size()]});
}

// rounded rectangle of total width w, height h, traversed counterclockwise
std::vector<Vec2> rounded_rect(double w, double h, double r, int arc_steps) {
    const double hw = w / 2.0, hh = h / 2.0;
    r = std::clamp(r, 0.0, std::min(hw, hh));
    std::vector<Vec2> pts;
    const auto arc = [&](Vec2 center, double from_rad) {
        for (int k = 0; k <= arc_steps; ++k) {
            const double a = from_rad + (M_PI / 2.0) * k / arc_steps;
            pts.push_back({center.x + r * std::cos(a), center.y + r * std::sin(a)});
        }
    };
    if (r <= 0.0) {
        pts = {{hw, -hh}, {hw, hh}, {-hw, hh}, {-hw, -hh}};
    } else {
        arc({hw - r, -hh + r}, -M_PI / 2.0);
        arc({hw - r, hh - r}, 0.0);
        arc({-hw + r, hh - r}, M_PI / 2.0);
        arc({-hw + r, -hh + r}, M_PI);
    }
    // drop consecutive duplicates produced by degenerate arcs
    std::vector<Vec2> out;
    for (const Vec2& p : pts) {
        if (out.empty() || (p - out.back()).norm() > 1e-9) out.push_back(p);
    }
    if (out.size() > 1 && (out.front() - out.back()).norm() <= 1e-9) out.pop_back();
    return out;
}

bool ring_simple(const std::vector<Vec2>& ring) {
    const std::size_t n = ring.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Segment si{ring[i], ring[(i + 1) % n]};
        for (std::size_t j = i + 1; j < n; ++j) {
            if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
            const Segment sj{ring[j], ring[(j + 1) % n]};
            if (segments_intersect(si, sj)) return false;
        }
    }
    return true;
}

}  // namespace

Track::Track(std::vector<Vec2> outer, std::vector<Vec2> inner)
    : outer_(std::move(outer)), inner_(std::move(inner)) {
    if (outer_.size() < 3 || inner_.size() < 3)
        throw std::runtime_error("track boundaries need at least 3 vertices");
    append_ring(segments_, outer_);
    append_ring(segments_, inner_);
}

bool Track::inside_corridor(Vec2 p) const {
    return point_in_polygon(p, outer_) && !point_in_polygon(p, inner_);
}

double Track::wall_distance(Vec2 p) const {
    double d = std::numeric_limits<double>::infinity();
    for (const Segment& s : segments_) d = std::min(d, point_segment_distance(p, s));
    return d;
}

Track::Bounds Track::bounds() const {
    Bounds b{outer_[0].x, outer_[0].y, outer_[0].x, outer_[0].y};
    for (const Vec2& p : outer_) {
        b.min_x = std::min(b.min_x, p.x);
        b.min_y = std::min(b.min_y, p.y);
        b.max_x = std::max(b.max_x, p.x);
        b.max_y = std::max(b.max_y, p.y);
    }
    return b;
}

std::vector<std::string> Track::validate() const {
    std::vector<std::string> problems;
    if (!ring_simple(outer_)) problems.push_back("outer boundary self-intersects");
    if (!ring_simple(inner_)) problems.push_back("inner boundary self-intersects");
    for (const Vec2& p : inner_) {
        if (!point_in_polygon(p, outer_)) {
            problems.push_back("inner boundary is not strictly inside the outer one");
            break;
        }
    }
    const std::size_t n_out = outer_.size();
    for (std::size_t i = 0; i < n_out; ++i) {
        const Segment so{outer_[i], outer_[(i + 1) % n_out]};
        for (std::size_t j = 0; j < inner_.size(); ++j) {
            const Segment si{inner_[j], inner_[(j + 1) % inner_.size()]};
            if (segments_intersect(so, si)) {
                problems.push_back("inner and outer boundaries intersect");
                return problems;
            }
        }
    }
    return problems;
}

Track Track::rounded_rect_annulus(double outer_w, double outer_h,
                                  double corridor_width,
                                  double outer_corner_radius,
                                  double inner_corner_radius, int arc_steps) {
    auto outer = rounded_rect(outer_w, outer_h, outer_corner_radius, arc_steps);
    auto inner = rounded_rect(outer_w - 2.0 * corridor_width,
                              outer_h - 2.0 * corridor_width,
                              inner_corner_radius, arc_steps);
    return Track(std::move(outer), std::move(inner));
}

Track Track::default_track() {
    // sharp corner pockets make proactive wall avoidance matter; the corridor
    // itself stays 4 units wide throughout
    return rounded_rect_annulus(20.0, 12.0, 4.0, 0.5, 0.5, 8);
}

Track Track::parse(std::istream& in) {
    std::vector<Vec2> outer, inner;
    std::vector<Vec2>* current = nullptr;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first)) continue;
        if (first == "outer") {
            current = &outer;
        } else if (first == "inner") {
            current = &inner;
        } else {
            if (!current)
                throw std::runtime_error("track line " + std::to_string(lineno) +
                                         ": vertex before 'outer'/'inner' header");
            double y;
            std::istringstream vs(line);
            double x;
            if (!(vs >> x >> y))
                throw std::runtime_error("track line " + std::to_string(lineno) +
                                         ": expected 'x y'");
            current->push_back({x, y});
        }
    }
    Track t(std::move(outer), std::move(inner));
    const auto problems = t.validate();
    if (!problems.empty()) throw std::runtime_error("invalid track: " + problems.front());
    return t;
}

Track Track::load_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open track file: " + path);
    return parse(f);
}

void Track::write(std::ostream& out) const {
    out << "# racetrack boundaries, unit lengths\n";
    out << "outer\n";
    for (const Vec2& p : outer_) out << p.x << " " << p.y << "\n";
    out << "inner\n";
    for (const Vec2& p : inner_) out << p.x << " " << p.y << "\n";
}

}  // namespace loopsim::env
