#include "loopsim/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "loopsim/explog.hpp"
#include "loopsim/harness.hpp"

namespace loopsim::cli {

namespace {

nlohmann::json table_to_json(const prob::JointTable& t) {
    nlohmann::json j;
    j["vars"] = nlohmann::json::array();
    for (const auto& v : t.vars()) j["vars"].push_back(v.name);
    j["probs"] = std::vector<double>(t.probs().begin(), t.probs().end());
    return j;
}

prob::JointTable table_from_json(const nlohmann::json& j) {
    std::vector<prob::VarId> vars;
    for (const auto& name : j.at("vars")) vars.push_back({name.get<std::string>()});
    return prob::JointTable(std::move(vars), j.at("probs").get<std::vector<double>>());
}

int cmd_measures(const std::string& path, std::ostream& out, std::ostream& err) {
    std::ifstream f(path);
    if (!f) {
        err << "cannot open joint file: " << path << "\n";
        return 2;
    }
    std::stringstream buf;
    buf << f.rdbuf();
    measures::LoopJoint joint = loop_joint_from_json(buf.str());
    const auto rec = measures::evaluate(joint, 0, 0.0);
    out << "units: nats\n";
    out << "phi_iit  " << rec.phi_iit << "\n";
    out << "psi_si   " << rec.psi_si << "\n";
    out << "psi_c    " << rec.psi_c << "\n";
    out << "phi_eii  " << rec.phi_eii << "\n";
    out << "psi_mc   " << rec.psi_mc << "\n";
    if (rec.psi_synp)
        out << "psi_synp " << *rec.psi_synp << "\n";
    else
        out << "psi_synp n/a (no internal world model table)\n";
    return 0;
}

int cmd_validate_track(const std::string& path, std::ostream& out, std::ostream& err) {
    env::Track track = env::Track::load_file(path);
    const auto problems = track.validate();
    if (!problems.empty()) {
        for (const auto& p : problems) err << "invalid: " << p << "\n";
        return 1;
    }
    const auto b = track.bounds();
    out << "track ok: outer " << track.outer().size() << " vertices, inner "
        << track.inner().size() << " vertices, bounds [" << b.min_x << ", " << b.min_y
        << "] .. [" << b.max_x << ", " << b.max_y << "]\n";
    return 0;
}

int cmd_replay(const std::string& path, std::ostream& out, std::ostream& err) {
    const auto log = harness::read_experience_log(path);
    const auto res = harness::replay(log);
    out << "replayed " << res.recomputed.size() << " measurement points from "
        << log.steps.size() << " logged steps\n";
    out << "max measure deviation: " << res.max_abs_deviation << "\n";
    if (res.max_abs_deviation > 1e-12) {
        err << "replay mismatch exceeds 1e-12\n";
        return 1;
    }
    return 0;
}

}  // namespace

std::string loop_joint_to_json(const measures::LoopJoint& j) {
    nlohmann::json out;
    out["schema_version"] = 1;
    out["controller"] = table_to_json(j.controller);
    out["world"] = table_to_json(j.world);
    if (j.prediction) out["prediction"] = table_to_json(*j.prediction);
    return out.dump(2) + "\n";
}

measures::LoopJoint loop_joint_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    std::optional<prob::JointTable> prediction;
    if (j.contains("prediction") && !j.at("prediction").is_null())
        prediction = table_from_json(j.at("prediction"));
    return measures::LoopJoint{table_from_json(j.at("controller")),
                               table_from_json(j.at("world")), std::move(prediction)};
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"sensorimotor-loop learning experiments"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "run a batch experiment from a config file");
    std::string config_path;
    run->add_option("--config", config_path, "experiment config file")
        ->required()
        ->envname("LOOPSIM_CONFIG");
    harness::ConfigOverrides ov;
    std::uint64_t seed_ov = 0;
    long steps_ov = 0;
    int runs_ov = 0, workers_ov = 0;
    std::string variants_ov, lengths_ov, horizons_ov, out_ov;
    bool verbose = false;
    auto* seed_opt = run->add_option("--seed", seed_ov, "master seed")
                         ->envname("LOOPSIM_SEED");
    auto* steps_opt = run->add_option("--steps", steps_ov, "steps per run");
    auto* runs_opt = run->add_option("--runs", runs_ov, "runs per cell");
    auto* variants_opt =
        run->add_option("--variants", variants_ov, "comma list of agent variants");
    auto* lengths_opt = run->add_option("--sensor-lengths", lengths_ov,
                                        "comma list of sensor lengths");
    auto* horizons_opt = run->add_option(
        "--horizons", horizons_ov, "comma list of PWM sampling horizons (or 'full')");
    auto* out_opt = run->add_option("--out", out_ov, "output directory")
                        ->envname("LOOPSIM_OUT");
    auto* workers_opt = run->add_option("--workers", workers_ov, "worker threads")
                            ->envname("LOOPSIM_WORKERS");
    run->add_flag("--full", ov.full_scale, "full scale: 1000 runs x 20000 steps");
    run->add_flag("--verbose", verbose, "progress output");

    // measures
    auto* meas = app.add_subcommand("measures",
                                    "evaluate all measures on a serialized joint");
    std::string joint_path;
    meas->add_option("joint_file", joint_path, "LoopJoint JSON file")->required();

    // validate-track
    auto* vt = app.add_subcommand("validate-track", "check a track file");
    std::string track_path;
    vt->add_option("track_file", track_path, "track file")->required();

    // replay
    auto* rp = app.add_subcommand("replay",
                                  "re-derive measures from an experience log");
    std::string log_path;
    rp->add_option("log_file", log_path, "experience log (.bin)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {  // --help
            out << app.help();
            return 0;
        }
        err << e.what() << "\n";
        return 2;
    }

    try {
        if (run->parsed()) {
            harness::ExperimentConfig cfg;
            try {
                cfg = harness::load_config(config_path);
                if (*seed_opt) ov.seed = seed_ov;
                if (*steps_opt) ov.steps = steps_ov;
                if (*runs_opt) ov.runs = runs_ov;
                if (*workers_opt) ov.workers = workers_ov;
                if (*out_opt) ov.out_dir = out_ov;
                if (*variants_opt) {
                    std::vector<std::string> vs;
                    std::istringstream ss(variants_ov);
                    std::string item;
                    while (std::getline(ss, item, ',')) vs.push_back(item);
                    ov.variants = vs;
                }
                if (*lengths_opt) {
                    std::vector<double> ls;
                    std::istringstream ss(lengths_ov);
                    std::string item;
                    while (std::getline(ss, item, ',')) ls.push_back(std::stod(item));
                    ov.sensor_lengths = ls;
                }
                if (*horizons_opt) ov.horizons = harness::parse_horizon_list(horizons_ov);
                harness::apply_overrides(cfg, ov);
            } catch (const harness::ConfigError& e) {
                err << "config error: " << e.what() << "\n";
                return 2;
            } catch (const std::exception& e) {
                err << "config error: " << e.what() << "\n";
                return 2;
            }
            return harness::run_experiment(cfg, verbose ? out : err, verbose);
        }
        if (meas->parsed()) return cmd_measures(joint_path, out, err);
        if (vt->parsed()) return cmd_validate_track(track_path, out, err);
        if (rp->parsed()) return cmd_replay(log_path, out, err);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace loopsim::cli
