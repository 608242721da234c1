#pragma once

#include <functional>
#include <string>
#include <vector>

#include "timegraphs/tape.hpp"

namespace timegraphs {

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::string worst_param;
    int checked = 0;
};

// Compares analytic gradients against central finite differences.
//
// `build_loss` constructs the scalar loss on a fresh tape, registering every
// trainable tensor through tape.param(). `params` lists the tensors to
// perturb (they must be the same storage the builder registers). Relative
// error per coordinate is |analytic - fd| / max(|analytic|, |fd|, 1e-8).
GradCheckReport grad_check(const std::function<Tape::Id(Tape&)>& build_loss,
                           const std::vector<std::pair<std::string, Tensor*>>& params,
                           double eps = 1e-5);

}  // namespace timegraphs
