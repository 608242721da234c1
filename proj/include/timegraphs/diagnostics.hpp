#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace timegraphs {

struct GradCheckRow {
    std::string loss;
    double max_rel_error = 0.0;
    int checked = 0;
    double seconds = 0.0;
};

// Finite-difference checks of every trainable loss on fixed toy fixtures:
// the pyramid hierarchy loss on a 6-node graph (2 scales), the weighted BCE
// classification loss on a 4-category toy, and the combined loss with the
// epoch-weighted alpha. Central differences, eps 1e-5.
std::vector<GradCheckRow> run_gradcheck_suite(uint64_t seed = 7);

}  // namespace timegraphs
