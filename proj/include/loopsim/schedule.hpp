#pragma once

#include <vector>

namespace loopsim::harness {

// Measurement schedule: nine anchor points at fixed fractions of the run
// (the 20000-step reference anchors 50, 100, 200, 500, 1000, 2000, 5000,
// 10000, 20000), nine equidistant points inside every anchor gap and nine
// below the first anchor. Runs of 90 steps or fewer degrade to one
// measurement every ceil(total/90) steps.
std::vector<long> schedule(long total_steps);

}  // namespace loopsim::harness
