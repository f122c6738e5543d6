#include "loopsim/explog.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

namespace loopsim::harness {

namespace {

constexpr char kMagic[8] = {'L', 'S', 'I', 'M', 'L', 'O', 'G', '1'};
constexpr std::uint32_t kVersion = 1;

struct Writer {
    std::ofstream out;
    explicit Writer(const std::string& path) : out(path, std::ios::binary) {
        if (!out) throw std::runtime_error("cannot open log file for writing: " + path);
    }
    void raw(const void* p, std::size_t n) {
        out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    }
    template <typename T>
    void put(T v) {
        raw(&v, sizeof(T));
    }
};

struct Reader {
    std::ifstream in;
    std::size_t offset = 0;
    explicit Reader(const std::string& path) : in(path, std::ios::binary) {
        if (!in) throw std::runtime_error("cannot open log file: " + path);
    }
    void raw(void* p, std::size_t n) {
        in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in.gcount()) != n)
            throw std::runtime_error("truncated experience log at byte offset " +
                                     std::to_string(offset));
        offset += n;
    }
    template <typename T>
    T get() {
        T v;
        raw(&v, sizeof(T));
        return v;
    }
};

std::uint8_t kind_code(Variant::Kind k) {
    switch (k) {
        case Variant::Kind::random: return 0;
        case Variant::Kind::pwm: return 1;
        case Variant::Kind::lwm: return 2;
    }
    return 2;
}

Variant::Kind kind_from_code(std::uint8_t c) {
    if (c == 0) return Variant::Kind::random;
    if (c == 1) return Variant::Kind::pwm;
    if (c == 2) return Variant::Kind::lwm;
    throw std::runtime_error("experience log: unknown variant code");
}

}  // namespace

ExperienceCapture::Snapshot snapshot_of(const agents::Mechanisms& m) {
    ExperienceCapture::Snapshot s;
    s.controller = m.controller;
    s.policy = m.policy;
    s.wm = m.wm;
    s.has_wm = m.has_wm;
    return s;
}

void write_experience_log(const std::string& path, const ExperienceCapture& log) {
    Writer w(path);
    w.raw(kMagic, sizeof(kMagic));
    w.put(kVersion);
    w.put(kind_code(log.spec.variant.kind));
    w.put<std::uint8_t>(log.spec.variant.topology == agents::Topology::split ? 1 : 0);
    w.put(log.spec.sensor_len);
    w.put<std::int64_t>(log.spec.horizon);
    w.put<std::uint64_t>(log.spec.seed);
    w.put<std::int64_t>(log.spec.steps);
    w.put(log.spec.noise_sigma);
    w.put<std::int32_t>(log.spec.projection_budget);
    w.put(log.spec.body_radius);
    w.put(log.spec.sensor_mount_deg);
    w.put<std::int64_t>(static_cast<std::int64_t>(log.steps.size()));
    w.put<std::int64_t>(static_cast<std::int64_t>(log.sched.size()));
    for (long s : log.sched) w.put<std::int64_t>(s);
    for (const auto& e : log.steps) {
        w.put<std::uint8_t>(static_cast<std::uint8_t>(e.s_prev));
        w.put<std::uint8_t>(static_cast<std::uint8_t>(e.a_prev));
        w.put<std::uint8_t>(static_cast<std::uint8_t>(e.c_prev));
        w.put<std::uint8_t>(static_cast<std::uint8_t>(e.s_next));
    }
    for (const auto& snap : log.snapshots) {
        for (const auto& rows : snap.controller)
            for (double v : rows) w.put(v);
        for (const auto& rows : snap.policy)
            for (double v : rows) w.put(v);
        w.put<std::uint8_t>(snap.has_wm ? 1 : 0);
        for (const auto& row : snap.wm)
            for (double v : row) w.put(v);
    }
    for (const auto& r : log.records) {
        w.put<std::int64_t>(r.step);
        w.put(r.phi_iit);
        w.put(r.psi_si);
        w.put(r.psi_c);
        w.put(r.phi_eii);
        w.put(r.psi_mc);
        w.put(r.psi_synp ? *r.psi_synp : std::numeric_limits<double>::quiet_NaN());
        w.put(r.success_rate_so_far);
    }
    if (!w.out) throw std::runtime_error("failed writing experience log: " + path);
}

ExperienceCapture read_experience_log(const std::string& path) {
    Reader r(path);
    char magic[8];
    r.raw(magic, sizeof(magic));
    if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("not an experience log: " + path);
    if (r.get<std::uint32_t>() != kVersion)
        throw std::runtime_error("unsupported experience log version");

    ExperienceCapture log;
    log.spec.variant.kind = kind_from_code(r.get<std::uint8_t>());
    log.spec.variant.topology = r.get<std::uint8_t>() ? agents::Topology::split
                                                      : agents::Topology::complete;
    log.spec.sensor_len = r.get<double>();
    log.spec.horizon = static_cast<long>(r.get<std::int64_t>());
    log.spec.seed = r.get<std::uint64_t>();
    log.spec.steps = static_cast<long>(r.get<std::int64_t>());
    log.spec.noise_sigma = r.get<double>();
    log.spec.projection_budget = r.get<std::int32_t>();
    log.spec.body_radius = r.get<double>();
    log.spec.sensor_mount_deg = r.get<double>();
    const auto n_steps = r.get<std::int64_t>();
    const auto n_sched = r.get<std::int64_t>();
    if (n_steps < 0 || n_sched < 0)
        throw std::runtime_error("corrupt experience log header");
    log.sched.resize(static_cast<std::size_t>(n_sched));
    for (auto& s : log.sched) s = static_cast<long>(r.get<std::int64_t>());
    log.steps.resize(static_cast<std::size_t>(n_steps));
    for (auto& e : log.steps) {
        e.s_prev = r.get<std::uint8_t>();
        e.a_prev = r.get<std::uint8_t>();
        e.c_prev = r.get<std::uint8_t>();
        e.s_next = r.get<std::uint8_t>();
    }
    log.snapshots.resize(static_cast<std::size_t>(n_sched));
    for (auto& snap : log.snapshots) {
        for (auto& rows : snap.controller)
            for (double& v : rows) v = r.get<double>();
        for (auto& rows : snap.policy)
            for (double& v : rows) v = r.get<double>();
        snap.has_wm = r.get<std::uint8_t>() != 0;
        for (auto& row : snap.wm)
            for (double& v : row) v = r.get<double>();
    }
    log.records.resize(static_cast<std::size_t>(n_sched));
    for (auto& rec : log.records) {
        rec.step = static_cast<long>(r.get<std::int64_t>());
        rec.phi_iit = r.get<double>();
        rec.psi_si = r.get<double>();
        rec.psi_c = r.get<double>();
        rec.phi_eii = r.get<double>();
        rec.psi_mc = r.get<double>();
        const double synp = r.get<double>();
        if (!std::isnan(synp)) rec.psi_synp = synp;
        rec.success_rate_so_far = r.get<double>();
    }
    return log;
}

ReplayResult replay(const ExperienceCapture& log) {
    agents::VariantSpec spec;
    spec.mode = log.spec.variant.kind == Variant::Kind::lwm
                    ? agents::WorldModelMode::lwm
                    : agents::WorldModelMode::pwm;
    spec.topology = log.spec.variant.topology;
    spec.sampling_horizon = log.spec.horizon;
    agents::Agent agent(spec, Rng(0));

    ReplayResult out;
    std::size_t fed = 0;
    for (std::size_t i = 0; i < log.sched.size(); ++i) {
        const auto upto = static_cast<std::size_t>(log.sched[i]);
        for (; fed < upto && fed < log.steps.size(); ++fed) agent.record(log.steps[fed]);
        const auto& snap = log.snapshots[i];
        agents::Mechanisms& m = agent.mechanisms();
        m.controller = snap.controller;
        m.policy = snap.policy;
        m.wm = snap.wm;
        m.has_wm = snap.has_wm;
        const auto joints = agent.build_measure_joints();
        const auto& orig = log.records[i];
        auto rec = measures::evaluate(joints, orig.step, orig.success_rate_so_far);
        const auto dev = [&](double a, double b) {
            out.max_abs_deviation = std::max(out.max_abs_deviation, std::abs(a - b));
        };
        dev(rec.phi_iit, orig.phi_iit);
        dev(rec.psi_si, orig.psi_si);
        dev(rec.psi_c, orig.psi_c);
        dev(rec.phi_eii, orig.phi_eii);
        dev(rec.psi_mc, orig.psi_mc);
        if (rec.psi_synp && orig.psi_synp) dev(*rec.psi_synp, *orig.psi_synp);
        else if (rec.psi_synp.has_value() != orig.psi_synp.has_value())
            out.max_abs_deviation = std::numeric_limits<double>::infinity();
        out.recomputed.push_back(std::move(rec));
    }
    return out;
}

}  // namespace loopsim::harness
