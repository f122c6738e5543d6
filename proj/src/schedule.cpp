#include "loopsim/schedule.hpp"

#include <algorithm>
#include <cmath>

namespace loopsim::harness {

std::vector<long> schedule(long total_steps) {
    std::vector<long> out;
    if (total_steps <= 0) return out;
    if (total_steps <= 90) {
        const long stride = (total_steps + 89) / 90;  // 1 for these totals
        for (long s = stride; s <= total_steps; s += stride) out.push_back(s);
        return out;
    }

    static constexpr double kAnchorFractions[9] = {
        50.0 / 20000.0,   100.0 / 20000.0,  200.0 / 20000.0,
        500.0 / 20000.0,  1000.0 / 20000.0, 2000.0 / 20000.0,
        5000.0 / 20000.0, 10000.0 / 20000.0, 1.0};

    std::vector<long> anchors;
    for (double f : kAnchorFractions)
        anchors.push_back(std::llround(f * static_cast<double>(total_steps)));

    double lo = 0.0;
    for (long a : anchors) {
        const double hi = static_cast<double>(a);
        for (int k = 1; k <= 9; ++k)
            out.push_back(std::llround(lo + (hi - lo) * k / 10.0));
        out.push_back(a);
        lo = hi;
    }

    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    out.erase(std::remove_if(out.begin(), out.end(),
                             [&](long s) { return s < 1 || s > total_steps; }),
              out.end());
    return out;
}

}  // namespace loopsim::harness
