#include "loopsim/harness.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "loopsim/explog.hpp"

namespace loopsim::harness {

namespace {

std::string fmt_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string horizon_label(long h) { return h < 0 ? "full" : std::to_string(h); }

}  // namespace

std::string Variant::name() const {
    if (kind == Kind::random) return "random";
    const std::string base = kind == Kind::pwm ? "pwm" : "lwm";
    return (topology == agents::Topology::split ? "split-" : "complete-") + base;
}

std::string Variant::topology_name() const {
    if (kind == Kind::random) return "none";
    return topology == agents::Topology::split ? "split" : "complete";
}

Variant Variant::parse(const std::string& name) {
    Variant v;
    if (name == "random") {
        v.kind = Kind::random;
        return v;
    }
    if (name == "complete-lwm") return {Kind::lwm, agents::Topology::complete};
    if (name == "split-lwm") return {Kind::lwm, agents::Topology::split};
    if (name == "complete-pwm") return {Kind::pwm, agents::Topology::complete};
    if (name == "split-pwm") return {Kind::pwm, agents::Topology::split};
    throw ConfigError("unknown variant '" + name + "'");
}

double success_threshold(Variant::Kind kind) {
    return kind == Variant::Kind::pwm ? kPwmSuccessThreshold : kLwmSuccessThreshold;
}

std::uint64_t derive_run_seed(std::uint64_t master, double sensor_len,
                              long horizon, int run_index) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(sensor_len));
    std::memcpy(&bits, &sensor_len, sizeof(bits));
    std::uint64_t s = mix_seed(master, bits);
    s = mix_seed(s, static_cast<std::uint64_t>(horizon + 2));
    s = mix_seed(s, static_cast<std::uint64_t>(run_index));
    return s;
}

RunResult run_one(const RunSpec& spec, const env::Track& track,
                  ExperienceCapture* capture, std::ostream* learn_diag) {
    if (learn_diag) learn::write_diag_csv_header(*learn_diag);
    RunResult result;
    result.spec = spec;
    result.total_steps = spec.steps;

    env::BodySpec body;
    body.radius = spec.body_radius;
    body.sensor_length = spec.sensor_len;
    body.sensor_mount = spec.sensor_mount_deg * M_PI / 180.0;

    agents::VariantSpec aspec;
    aspec.mode = spec.variant.kind == Variant::Kind::lwm ? agents::WorldModelMode::lwm
                                                         : agents::WorldModelMode::pwm;
    aspec.topology = spec.variant.topology;
    aspec.sampling_horizon = spec.horizon;

    const Rng root(spec.seed);
    Rng rng_env = root.substream(0xE);
    Rng rng_act = root.substream(0xA);
    Rng rng_noise = root.substream(0x17);

    agents::Agent agent(aspec, root.substream(0x1));
    if (spec.variant.kind == Variant::Kind::random) agent.set_uniform_policy();

    learn::LearnConfig lcfg{spec.noise_sigma, spec.projection_budget};
    const std::vector<long> sched = schedule(spec.steps);

    if (capture) {
        capture->spec = spec;
        capture->sched = sched;
    }

    env::WorldState w = env::spawn(track, body, rng_env);
    unsigned s_prev = w.sensors.bits();
    unsigned c_prev = static_cast<unsigned>(rng_act.below(4));
    auto [c0, a0] = agent.act(s_prev, c_prev, rng_act);
    c_prev = c0;
    unsigned a_prev = a0;
    w = env::apply_action(w, track, body, a_prev);

    long stuck = 0;
    std::size_t next_sched = 0;
    for (long step = 1; step <= spec.steps; ++step) {
        const unsigned s_next = w.sensors.bits();
        const agents::Experience e{s_prev, a_prev, c_prev, s_next};
        agent.record(e);
        if (capture) capture->steps.push_back(e);

        if (spec.variant.kind != Variant::Kind::random) {
            if (learn_diag) {
                learn::PlanDiag diag;
                learn::learn_step(agent, s_prev, a_prev, c_prev, lcfg, rng_noise,
                                  &diag);
                learn::append_diag_csv(*learn_diag, step, diag);
            } else {
                learn::learn_step(agent, s_prev, a_prev, c_prev, lcfg, rng_noise);
            }
        }

        const auto [c_next, a_next] = agent.act(s_next, c_prev, rng_act);
        w = env::apply_action(w, track, body, a_next);
        if (w.stuck) ++stuck;

        if (next_sched < sched.size() && sched[next_sched] == step) {
            ++next_sched;
            const double rate = 1.0 - static_cast<double>(stuck) / step;
            const auto joints = agent.build_measure_joints();
            result.records.push_back(measures::evaluate(joints, step, rate));
            if (capture) {
                capture->snapshots.push_back(snapshot_of(agent.mechanisms()));
                capture->records.push_back(result.records.back());
            }
        }

        s_prev = s_next;
        a_prev = a_next;
        c_prev = c_next;
    }

    result.stuck_steps = stuck;
    result.success_rate = 1.0 - static_cast<double>(stuck) / spec.steps;
    return result;
}

ClassifiedRuns classify(const std::vector<RunResult>& results, double threshold) {
    ClassifiedRuns out;
    for (const auto& r : results) {
        if (r.failed()) continue;
        (r.success_rate > threshold ? out.successful : out.unsuccessful).push_back(&r);
    }
    return out;
}

std::vector<RunSpec> enumerate_runs(const ExperimentConfig& cfg) {
    std::vector<RunSpec> specs;
    for (const auto& vname : cfg.variants) {
        const Variant variant = Variant::parse(vname);
        std::vector<long> horizons{-1};
        if (variant.kind == Variant::Kind::pwm && !cfg.horizons.empty())
            horizons = cfg.horizons;
        for (double sl : cfg.sensor_lengths)
            for (long h : horizons)
                for (int r = 0; r < cfg.runs; ++r) {
                    RunSpec spec;
                    spec.variant = variant;
                    spec.sensor_len = sl;
                    spec.horizon = h;
                    spec.seed = derive_run_seed(cfg.seed, sl, h, r);
                    spec.steps = cfg.steps;
                    spec.noise_sigma = cfg.noise_sigma;
                    spec.projection_budget = cfg.projection_budget;
                    spec.body_radius = cfg.body_radius;
                    spec.sensor_mount_deg = cfg.sensor_mount_deg;
                    spec.run_id = variant.name() + "-sl" + fmt_double(sl) + "-h" +
                                  horizon_label(h) + "-r" + std::to_string(r);
                    specs.push_back(std::move(spec));
                }
    }
    return specs;
}

std::vector<RunResult> run_batch(const ExperimentConfig& cfg,
                                 const env::Track& track,
                                 const std::vector<RunSpec>& specs,
                                 std::ostream* progress) {
    std::vector<RunResult> results(specs.size());
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    std::mutex log_mutex;

    unsigned workers = cfg.workers > 0
                           ? static_cast<unsigned>(cfg.workers)
                           : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, std::max<std::size_t>(specs.size(), 1));

    const auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= specs.size()) return;
            try {
                results[i] = run_one(specs[i], track);
            } catch (const std::exception& e) {
                results[i].spec = specs[i];
                results[i].error = e.what();
            }
            const std::size_t d = done.fetch_add(1) + 1;
            if (progress && (d % std::max<std::size_t>(1, specs.size() / 20) == 0 ||
                             d == specs.size())) {
                std::lock_guard<std::mutex> lock(log_mutex);
                *progress << "  " << d << "/" << specs.size() << " runs done\n";
            }
        }
    };

    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return results;
}

Summary aggregate(const std::vector<RunResult>& results) {
    struct Accum {
        CellKey key;
        Variant::Kind kind;
        int runs = 0, failed = 0, successful = 0;
        double success_sum = 0.0;
        std::map<long, std::vector<const measures::MeasureRecord*>> by_step;
    };
    std::map<std::string, Accum> cells;

    for (const auto& r : results) {
        CellKey key{r.spec.variant.name(), r.spec.variant.topology_name(),
                    r.spec.sensor_len, r.spec.horizon};
        const std::string id = key.variant + "|" + fmt_double(key.sensor_len) + "|" +
                               horizon_label(key.horizon);
        auto& acc = cells[id];
        if (acc.runs == 0 && acc.failed == 0) {
            acc.key = key;
            acc.kind = r.spec.variant.kind;
        }
        if (r.failed()) {
            ++acc.failed;
            continue;
        }
        ++acc.runs;
        acc.success_sum += r.success_rate;
        if (r.successful()) ++acc.successful;
        for (const auto& rec : r.records) acc.by_step[rec.step].push_back(&rec);
    }

    Summary out;
    std::map<long, std::pair<HorizonPivot, int>> pivot;
    for (auto& [id, acc] : cells) {
        CellSummary cell;
        cell.key = acc.key;
        cell.runs = acc.runs;
        cell.failed = acc.failed;
        cell.successful_count = acc.successful;
        cell.threshold = success_threshold(acc.kind);
        cell.mean_success = acc.runs ? acc.success_sum / acc.runs : 0.0;
        for (const auto& [step, recs] : acc.by_step) {
            CellSummary::Point pt;
            pt.step = step;
            pt.count = static_cast<int>(recs.size());
            double synp_sum = 0.0;
            int synp_count = 0;
            for (const auto* r : recs) {
                pt.success += r->success_rate_so_far;
                pt.phi_iit += r->phi_iit;
                pt.psi_si += r->psi_si;
                pt.psi_c += r->psi_c;
                pt.phi_eii += r->phi_eii;
                pt.psi_mc += r->psi_mc;
                if (r->psi_synp) {
                    synp_sum += *r->psi_synp;
                    ++synp_count;
                }
            }
            const double n = pt.count;
            pt.success /= n;
            pt.phi_iit /= n;
            pt.psi_si /= n;
            pt.psi_c /= n;
            pt.phi_eii /= n;
            pt.psi_mc /= n;
            if (synp_count) pt.psi_synp = synp_sum / synp_count;
            cell.series.push_back(pt);
        }
        // horizon pivot: final-step means over PWM runs, all sensor lengths
        if (acc.kind == Variant::Kind::pwm && !cell.series.empty()) {
            auto& [pv, count] = pivot[acc.key.horizon];
            pv.horizon = acc.key.horizon;
            const auto& last = cell.series.back();
            pv.mean_psi_mc += last.psi_mc * last.count;
            pv.mean_phi_eii += last.phi_eii * last.count;
            count += last.count;
        }
        out.cells.push_back(std::move(cell));
    }
    for (auto& [h, entry] : pivot) {
        auto& [pv, count] = entry;
        if (count > 0) {
            pv.mean_psi_mc /= count;
            pv.mean_phi_eii /= count;
            pv.count = count;
        }
        out.horizon_pivot.push_back(pv);
    }
    return out;
}

void write_results_csv(std::ostream& out, const std::vector<RunResult>& results) {
    out << "run_id,variant,topology,sensor_len,horizon,step,success_rate_so_far,"
           "phi_iit,psi_si,psi_c,phi_eii,psi_mc,psi_synp,seed\n";
    for (const auto& r : results) {
        if (r.failed()) continue;
        const std::string prefix = r.spec.run_id + "," + r.spec.variant.name() + "," +
                                   r.spec.variant.topology_name() + "," +
                                   fmt_double(r.spec.sensor_len) + "," +
                                   horizon_label(r.spec.horizon) + ",";
        for (const auto& rec : r.records) {
            out << prefix << rec.step << "," << fmt_double(rec.success_rate_so_far)
                << "," << fmt_double(rec.phi_iit) << "," << fmt_double(rec.psi_si)
                << "," << fmt_double(rec.psi_c) << "," << fmt_double(rec.phi_eii)
                << "," << fmt_double(rec.psi_mc) << ","
                << (rec.psi_synp ? fmt_double(*rec.psi_synp) : "") << ","
                << r.spec.seed << "\n";
        }
    }
}

namespace {

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

nlohmann::json config_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["variants"] = cfg.variants;
    j["sensor_lengths"] = cfg.sensor_lengths;
    j["runs"] = cfg.runs;
    j["steps"] = cfg.steps;
    j["horizons"] = cfg.horizons;
    j["seed"] = cfg.seed;
    j["workers"] = cfg.workers;
    j["noise_sigma"] = cfg.noise_sigma;
    j["projection_budget"] = cfg.projection_budget;
    j["track"] = cfg.track_file;
    j["body_radius"] = cfg.body_radius;
    j["sensor_mount_deg"] = cfg.sensor_mount_deg;
    j["out_dir"] = cfg.out_dir;
    j["log_experience"] = cfg.log_experience;
    j["learn_diag"] = cfg.learn_diag;
    return j;
}

}  // namespace

std::string summary_json(const Summary& summary, const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["units"] = "nats";
    j["config"] = config_json(cfg);
    j["cells"] = nlohmann::json::array();
    for (const auto& cell : summary.cells) {
        nlohmann::json c;
        c["variant"] = cell.key.variant;
        c["topology"] = cell.key.topology;
        c["sensor_len"] = cell.key.sensor_len;
        c["horizon"] = horizon_label(cell.key.horizon);
        c["runs"] = cell.runs;
        c["failed"] = cell.failed;
        c["successful"] = cell.successful_count;
        c["success_threshold"] = cell.threshold;
        c["mean_success_rate"] = cell.mean_success;
        c["series"] = nlohmann::json::array();
        for (const auto& pt : cell.series) {
            nlohmann::json p;
            p["step"] = pt.step;
            p["count"] = pt.count;
            p["success_rate"] = pt.success;
            p["phi_iit"] = pt.phi_iit;
            p["psi_si"] = pt.psi_si;
            p["psi_c"] = pt.psi_c;
            p["phi_eii"] = pt.phi_eii;
            p["psi_mc"] = pt.psi_mc;
            if (pt.psi_synp) p["psi_synp"] = *pt.psi_synp;
            c["series"].push_back(std::move(p));
        }
        j["cells"].push_back(std::move(c));
    }
    j["horizon_pivot"] = nlohmann::json::array();
    for (const auto& pv : summary.horizon_pivot) {
        nlohmann::json p;
        p["horizon"] = horizon_label(pv.horizon);
        p["count"] = pv.count;
        p["mean_psi_mc"] = pv.mean_psi_mc;
        p["mean_phi_eii"] = pv.mean_phi_eii;
        j["horizon_pivot"].push_back(std::move(p));
    }
    return j.dump(2) + "\n";
}

std::string manifest_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["app"] = "loopsim";
    j["version"] = "0.1.0";
    j["results_schema"] = 1;
    j["seed"] = cfg.seed;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a(render_config(cfg))));
    j["config_hash"] = buf;
    j["config"] = config_json(cfg);
    return j.dump(2) + "\n";
}

int run_experiment(const ExperimentConfig& cfg, std::ostream& log, bool verbose) {
    namespace fs = std::filesystem;
    const env::Track track = cfg.track_file.empty()
                                 ? env::Track::default_track()
                                 : env::Track::load_file(cfg.track_file);
    const auto problems = track.validate();
    if (!problems.empty()) throw std::runtime_error("invalid track: " + problems.front());

    if (cfg.steps <= 90)
        log << "note: only " << cfg.steps
            << " steps; measurement schedule degrades to every step\n";

    const auto specs = enumerate_runs(cfg);
    log << "running " << specs.size() << " runs (" << cfg.runs << " per cell)\n";
    auto results = run_batch(cfg, track, specs, verbose ? &log : nullptr);

    for (const auto& r : results)
        if (r.failed())
            log << "warning: run " << r.spec.run_id << " failed and is excluded: "
                << r.error << "\n";

    fs::create_directories(cfg.out_dir);
    {
        std::ofstream csv(fs::path(cfg.out_dir) / "results.csv", std::ios::binary);
        if (!csv) throw std::runtime_error("cannot write results.csv");
        write_results_csv(csv, results);
    }
    {
        std::ofstream js(fs::path(cfg.out_dir) / "summary.json", std::ios::binary);
        js << summary_json(aggregate(results), cfg);
    }
    {
        std::ofstream mf(fs::path(cfg.out_dir) / "manifest.json", std::ios::binary);
        mf << manifest_json(cfg);
    }

    if (cfg.learn_diag == "first" && !specs.empty()) {
        std::ofstream diag(fs::path(cfg.out_dir) / "learn_diag.csv", std::ios::binary);
        if (!diag) throw std::runtime_error("cannot write learn_diag.csv");
        run_one(specs.front(), track, nullptr, &diag);
        log << "wrote " << (fs::path(cfg.out_dir) / "learn_diag.csv").string() << "\n";
    }

    if (cfg.log_experience != "none") {
        fs::create_directories(fs::path(cfg.out_dir) / "logs");
        for (std::size_t i = 0; i < specs.size(); ++i) {
            if (results[i].failed()) continue;
            ExperienceCapture capture;
            run_one(specs[i], track, &capture);
            write_experience_log(
                (fs::path(cfg.out_dir) / "logs" / (specs[i].run_id + ".bin")).string(),
                capture);
            if (cfg.log_experience == "first") break;
        }
    }

    log << "wrote " << (fs::path(cfg.out_dir) / "results.csv").string() << "\n";
    return 0;
}

}  // namespace loopsim::harness
