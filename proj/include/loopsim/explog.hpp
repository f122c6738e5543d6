#pragma once

#include <string>
#include <vector>

#include "loopsim/harness.hpp"

namespace loopsim::harness {

// Experience log: everything needed to re-derive the sampled tables and
// re-evaluate the measures of one run offline. Binary, versioned header;
// see write_experience_log in explog.cpp for the exact layout.
struct ExperienceCapture {
    RunSpec spec;
    std::vector<agents::Experience> steps;
    std::vector<long> sched;
    // mechanisms as they stood at each scheduled measurement
    struct Snapshot {
        std::array<std::array<double, 32>, 2> controller;
        std::array<std::array<double, 32>, 2> policy;
        std::array<std::array<double, 8>, 16> wm;
        bool has_wm = false;
    };
    std::vector<Snapshot> snapshots;
    std::vector<measures::MeasureRecord> records;
};

ExperienceCapture::Snapshot snapshot_of(const agents::Mechanisms& m);

void write_experience_log(const std::string& path, const ExperienceCapture& log);

// throws std::runtime_error naming the byte offset when the file is short
ExperienceCapture read_experience_log(const std::string& path);

struct ReplayResult {
    std::vector<measures::MeasureRecord> recomputed;
    double max_abs_deviation = 0.0;
};

// rebuild the sampled tables step by step and re-evaluate every measure
ReplayResult replay(const ExperienceCapture& log);

}  // namespace loopsim::harness
