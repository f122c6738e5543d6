#include "loopsim/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace loopsim::harness {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream ss(s);
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

[[noreturn]] void fail(const std::string& origin, int line, const std::string& msg) {
    throw ConfigError(origin + ":" + std::to_string(line) + ": " + msg);
}

double to_double(const std::string& origin, int line, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        fail(origin, line, "expected a number, got '" + v + "'");
    }
}

long to_long(const std::string& origin, int line, const std::string& v) {
    try {
        std::size_t pos = 0;
        const long d = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        fail(origin, line, "expected an integer, got '" + v + "'");
    }
}

const std::vector<std::string> kKnownVariants = {
    "complete-lwm", "split-lwm", "complete-pwm", "split-pwm", "random"};

}  // namespace

std::vector<long> parse_horizon_list(const std::string& text) {
    std::vector<long> out;
    for (const auto& item : split_list(text)) {
        if (item == "full")
            out.push_back(-1);
        else
            out.push_back(std::stol(item));
    }
    return out;
}

void ExperimentConfig::validate() const {
    if (runs < 1) throw ConfigError("runs must be >= 1");
    if (steps < 1) throw ConfigError("steps must be >= 1");
    if (variants.empty()) throw ConfigError("variants list is empty");
    for (const auto& v : variants)
        if (std::find(kKnownVariants.begin(), kKnownVariants.end(), v) ==
            kKnownVariants.end())
            throw ConfigError("unknown variant '" + v + "'");
    if (sensor_lengths.empty()) throw ConfigError("sensor_lengths list is empty");
    for (double s : sensor_lengths)
        if (s < 0.5 || s > 2.0)
            throw ConfigError("sensor length must lie in [0.5, 2]");
    for (long h : horizons) {
        if (h == -1) continue;
        if (h < 1 || h > steps)
            throw ConfigError("sampling horizons must lie in [1, steps] or be 'full'");
    }
    if (noise_sigma < 0.0) throw ConfigError("noise_sigma must be >= 0");
    if (projection_budget < 2) throw ConfigError("projection_budget must be >= 2");
    if (body_radius <= 0.0) throw ConfigError("body_radius must be > 0");
    if (log_experience != "none" && log_experience != "first" &&
        log_experience != "all")
        throw ConfigError("log_experience must be none, first or all");
    if (learn_diag != "none" && learn_diag != "first")
        throw ConfigError("learn_diag must be none or first");
    if (workers < 0) throw ConfigError("workers must be >= 0");
}

ExperimentConfig parse_config(std::istream& in, const std::string& origin) {
    ExperimentConfig cfg;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail(origin, lineno, "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section != "experiment" && section != "learning" &&
                section != "env" && section != "output")
                fail(origin, lineno, "unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(origin, lineno, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const std::string qual = section + "." + key;

        if (qual == "experiment.variants") {
            cfg.variants = split_list(value);
        } else if (qual == "experiment.sensor_lengths") {
            cfg.sensor_lengths.clear();
            for (const auto& item : split_list(value))
                cfg.sensor_lengths.push_back(to_double(origin, lineno, item));
        } else if (qual == "experiment.runs") {
            cfg.runs = static_cast<int>(to_long(origin, lineno, value));
        } else if (qual == "experiment.steps") {
            cfg.steps = to_long(origin, lineno, value);
        } else if (qual == "experiment.horizons") {
            cfg.horizons.clear();
            for (const auto& item : split_list(value)) {
                if (item == "full")
                    cfg.horizons.push_back(-1);
                else
                    cfg.horizons.push_back(to_long(origin, lineno, item));
            }
        } else if (qual == "experiment.seed") {
            cfg.seed = static_cast<std::uint64_t>(to_long(origin, lineno, value));
        } else if (qual == "experiment.workers") {
            cfg.workers = static_cast<int>(to_long(origin, lineno, value));
        } else if (qual == "learning.noise_sigma") {
            cfg.noise_sigma = to_double(origin, lineno, value);
        } else if (qual == "learning.projection_budget") {
            cfg.projection_budget = static_cast<int>(to_long(origin, lineno, value));
        } else if (qual == "env.track") {
            cfg.track_file = value;
        } else if (qual == "env.body_radius") {
            cfg.body_radius = to_double(origin, lineno, value);
        } else if (qual == "env.sensor_mount_deg") {
            cfg.sensor_mount_deg = to_double(origin, lineno, value);
        } else if (qual == "output.dir") {
            cfg.out_dir = value;
        } else if (qual == "output.log_experience") {
            cfg.log_experience = value;
        } else if (qual == "output.learn_diag") {
            cfg.learn_diag = value;
        } else {
            fail(origin, lineno, "unknown key '" + key + "' in section [" + section + "]");
        }
    }
    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path);
    return parse_config(f, path);
}

std::string render_config(const ExperimentConfig& cfg) {
    std::ostringstream out;
    out.precision(17);
    out << "variants=";
    for (std::size_t i = 0; i < cfg.variants.size(); ++i)
        out << (i ? "," : "") << cfg.variants[i];
    out << "\nsensor_lengths=";
    for (std::size_t i = 0; i < cfg.sensor_lengths.size(); ++i)
        out << (i ? "," : "") << cfg.sensor_lengths[i];
    out << "\nruns=" << cfg.runs << "\nsteps=" << cfg.steps << "\nhorizons=";
    for (std::size_t i = 0; i < cfg.horizons.size(); ++i)
        out << (i ? "," : "") << cfg.horizons[i];
    out << "\nseed=" << cfg.seed << "\nworkers=" << cfg.workers
        << "\nnoise_sigma=" << cfg.noise_sigma
        << "\nprojection_budget=" << cfg.projection_budget
        << "\ntrack=" << cfg.track_file << "\nbody_radius=" << cfg.body_radius
        << "\nsensor_mount_deg=" << cfg.sensor_mount_deg
        << "\nout_dir=" << cfg.out_dir
        << "\nlog_experience=" << cfg.log_experience
        << "\nlearn_diag=" << cfg.learn_diag << "\n";
    return out.str();
}

void apply_overrides(ExperimentConfig& cfg, const ConfigOverrides& o) {
    if (o.seed) cfg.seed = *o.seed;
    if (o.steps) cfg.steps = *o.steps;
    if (o.runs) cfg.runs = *o.runs;
    if (o.variants) cfg.variants = *o.variants;
    if (o.sensor_lengths) cfg.sensor_lengths = *o.sensor_lengths;
    if (o.horizons) cfg.horizons = *o.horizons;
    if (o.out_dir) cfg.out_dir = *o.out_dir;
    if (o.workers) cfg.workers = *o.workers;
    if (o.full_scale) {
        cfg.runs = 1000;
        cfg.steps = 20000;
    }
    cfg.validate();
}

}  // namespace loopsim::harness
