#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace loopsim::harness {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Experiment configuration. File format is INI-style sections of key = value
// lines; configs/default.cfg is the documented reference.
struct ExperimentConfig {
    // [experiment]
    std::vector<std::string> variants = {"complete-lwm", "split-lwm",
                                         "complete-pwm", "split-pwm", "random"};
    std::vector<double> sensor_lengths = {0.5, 1.0, 1.5, 2.0};
    int runs = 50;
    long steps = 2000;
    std::vector<long> horizons;  // PWM sampling horizons; -1 means "full"
    std::uint64_t seed = 1;
    int workers = 0;  // 0 = hardware concurrency

    // [learning]
    double noise_sigma = 0.01;
    int projection_budget = 15;

    // [env]
    std::string track_file;  // empty = built-in default track
    double body_radius = 0.5;
    double sensor_mount_deg = 30.0;

    // [output]
    std::string out_dir = "out";
    std::string log_experience = "none";  // none | first | all
    std::string learn_diag = "none";      // none | first

    void validate() const;  // throws ConfigError
};

// Parse a config file. Unknown sections, keys or malformed values raise
// ConfigError with the line number.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(std::istream& in, const std::string& origin);

// canonical single-line-per-key rendering, used for the manifest hash
std::string render_config(const ExperimentConfig& cfg);

// command line / environment overrides applied on top of a file
struct ConfigOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<long> steps;
    std::optional<int> runs;
    std::optional<std::vector<std::string>> variants;
    std::optional<std::vector<double>> sensor_lengths;
    std::optional<std::vector<long>> horizons;
    std::optional<std::string> out_dir;
    std::optional<int> workers;
    bool full_scale = false;  // full-scale run: 1000 runs x 20000 steps
};

void apply_overrides(ExperimentConfig& cfg, const ConfigOverrides& o);

std::vector<long> parse_horizon_list(const std::string& text);

}  // namespace loopsim::harness
