#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "loopsim/agent.hpp"
#include "loopsim/config.hpp"
#include "loopsim/learner.hpp"
#include "loopsim/measures.hpp"
#include "loopsim/schedule.hpp"
#include "loopsim/track.hpp"
#include "loopsim/world.hpp"

namespace loopsim::harness {

struct Variant {
    enum class Kind { random, pwm, lwm };
    Kind kind = Kind::lwm;
    agents::Topology topology = agents::Topology::complete;

    std::string name() const;
    std::string topology_name() const;
    static Variant parse(const std::string& name);
};

// success thresholds: best-third cutoffs reported for the two agent families;
// the LWM one is also applied to split and random agents
inline constexpr double kLwmSuccessThreshold = 0.168;
inline constexpr double kPwmSuccessThreshold = 0.615;
double success_threshold(Variant::Kind kind);

struct RunSpec {
    Variant variant;
    double sensor_len = 1.0;
    long horizon = -1;  // -1 = sample transitions for the whole run
    std::uint64_t seed = 0;
    long steps = 2000;
    double noise_sigma = 0.01;
    int projection_budget = 15;
    double body_radius = 0.5;
    double sensor_mount_deg = 30.0;
    std::string run_id;
};

struct RunResult {
    RunSpec spec;
    std::vector<measures::MeasureRecord> records;
    long stuck_steps = 0;
    long total_steps = 0;
    double success_rate = 0.0;
    std::string error;  // non-empty marks a failed, excluded run

    bool failed() const { return !error.empty(); }
    bool successful() const {
        return success_rate > success_threshold(spec.variant.kind);
    }
};

// deterministic per-run seed; the variant is deliberately not part of the
// derivation so matched cells share their random draws
std::uint64_t derive_run_seed(std::uint64_t master, double sensor_len,
                              long horizon, int run_index);

// full simulation of one agent; optionally captures the experience log and
// streams learning diagnostics (one CSV row per projection) to `learn_diag`
struct ExperienceCapture;
RunResult run_one(const RunSpec& spec, const env::Track& track,
                  ExperienceCapture* capture = nullptr,
                  std::ostream* learn_diag = nullptr);

struct ClassifiedRuns {
    std::vector<const RunResult*> successful;
    std::vector<const RunResult*> unsuccessful;
};
ClassifiedRuns classify(const std::vector<RunResult>& results, double threshold);

struct CellKey {
    std::string variant;
    std::string topology;
    double sensor_len = 0.0;
    long horizon = -1;
    bool operator==(const CellKey&) const = default;
};

struct CellSummary {
    CellKey key;
    int runs = 0;
    int failed = 0;
    int successful_count = 0;
    double threshold = 0.0;
    double mean_success = 0.0;
    struct Point {
        long step = 0;
        int count = 0;
        double success = 0.0;
        double phi_iit = 0.0, psi_si = 0.0, psi_c = 0.0, phi_eii = 0.0, psi_mc = 0.0;
        std::optional<double> psi_synp;
    };
    std::vector<Point> series;
};

struct HorizonPivot {
    long horizon = -1;
    int count = 0;
    double mean_psi_mc = 0.0;
    double mean_phi_eii = 0.0;
};

struct Summary {
    std::vector<CellSummary> cells;
    std::vector<HorizonPivot> horizon_pivot;  // final-step PWM means per horizon
};

Summary aggregate(const std::vector<RunResult>& results);

void write_results_csv(std::ostream& out, const std::vector<RunResult>& results);
std::string summary_json(const Summary& summary, const ExperimentConfig& cfg);
std::string manifest_json(const ExperimentConfig& cfg);

// all (cell x run) work items of a config, executed on a worker pool;
// results come back in deterministic order regardless of worker count
std::vector<RunSpec> enumerate_runs(const ExperimentConfig& cfg);
std::vector<RunResult> run_batch(const ExperimentConfig& cfg,
                                 const env::Track& track,
                                 const std::vector<RunSpec>& specs,
                                 std::ostream* progress = nullptr);

// top-level entry: runs the config and writes results.csv, summary.json and
// manifest.json (plus experience logs when configured) into cfg.out_dir
int run_experiment(const ExperimentConfig& cfg, std::ostream& log, bool verbose);

}  // namespace loopsim::harness
