#pragma once

#include <cmath>
#include <cstdint>
#include <span>

namespace loopsim {

// splitmix64, Sebastiano Vigna (public domain). Used both as a seed mixer
// and as the generator itself so every draw is reproducible across
// platforms and standard-library versions.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = a ^ (0x9E3779B97F4A7C15ull + (b << 6) + (b >> 2));
    return splitmix64(s);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : state_(seed) {
        // warm up so nearby seeds decorrelate
        splitmix64(state_);
        splitmix64(state_);
    }

    std::uint64_t next_u64() { return splitmix64(state_); }

    // uniform on [0, 1)
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n)
    std::uint64_t below(std::uint64_t n) {
        // rejection-free modulo is fine here; n is tiny in this project
        return next_u64() % n;
    }

    bool bernoulli(double p) { return uniform() < p; }

    // standard normal via Box-Muller
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 1e-300) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925287 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double sigma) { return mean + sigma * normal(); }

    // symmetric Dirichlet(1): normalized unit-rate exponentials
    void dirichlet_row(std::span<double> out) {
        double sum = 0.0;
        for (double& x : out) {
            double u = uniform();
            while (u <= 1e-300) u = uniform();
            x = -std::log(u);
            sum += x;
        }
        for (double& x : out) x /= sum;
    }

    // derive an independent substream; `purpose` tags keep streams stable
    // when unrelated draws are added elsewhere
    Rng substream(std::uint64_t purpose) const {
        return Rng(mix_seed(state_, purpose));
    }

private:
    std::uint64_t state_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace loopsim
