#pragma once

#include <cstdint>
#include <unordered_map>
#include <utility>
#include <vector>

#include "timegraphs/tensor.hpp"

namespace timegraphs {

struct AdamConfig {
    double lr = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Adam with bias correction. Moment buffers are keyed by parameter storage
// address and created lazily; the step order follows the order of the pairs
// passed in, which is the tape registration order.
class Adam {
public:
    explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

    // Applies one update. lr_scale multiplies the base learning rate and is
    // how the multi-step schedule is applied.
    void step(const std::vector<std::pair<Tensor*, const Tensor*>>& param_grads,
              double lr_scale = 1.0);

    int64_t step_count() const { return t_; }
    const AdamConfig& config() const { return cfg_; }

private:
    struct Moments {
        Tensor m;
        Tensor v;
    };
    AdamConfig cfg_;
    int64_t t_ = 0;
    std::unordered_map<Tensor*, Moments> moments_;
};

// Multi-step LR schedule: the base rate is multiplied by `decay` at each
// milestone, where milestones are fractions of the total epoch budget.
double multi_step_lr_scale(int epoch, int total_epochs,
                           const std::vector<double>& milestones, double decay);

}  // namespace timegraphs
