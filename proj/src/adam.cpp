#include "timegraphs/adam.hpp"

#include <cmath>

#include "timegraphs/error.hpp"

namespace timegraphs {

void Adam::step(const std::vector<std::pair<Tensor*, const Tensor*>>& param_grads,
                double lr_scale) {
    ++t_;
    double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    double lr = cfg_.lr * lr_scale;
    for (const auto& [param, grad] : param_grads) {
        if (!param->same_shape(*grad))
            throw shape_error("adam: grad shape " + grad->shape_str() +
                              " vs param " + param->shape_str());
        Moments& mom = moments_[param];
        if (mom.m.size() == 0) {
            mom.m = Tensor(param->rows, param->cols);
            mom.v = Tensor(param->rows, param->cols);
        }
        for (int i = 0; i < param->size(); ++i) {
            double g = grad->data[i];
            mom.m.data[i] = cfg_.beta1 * mom.m.data[i] + (1.0 - cfg_.beta1) * g;
            mom.v.data[i] = cfg_.beta2 * mom.v.data[i] + (1.0 - cfg_.beta2) * g * g;
            double mhat = mom.m.data[i] / bc1;
            double vhat = mom.v.data[i] / bc2;
            param->data[i] -= lr * mhat / (std::sqrt(vhat) + cfg_.eps);
        }
    }
}

double multi_step_lr_scale(int epoch, int total_epochs,
                           const std::vector<double>& milestones, double decay) {
    double scale = 1.0;
    for (double frac : milestones) {
        int milestone = static_cast<int>(frac * total_epochs);
        if (epoch >= milestone && milestone > 0) scale *= decay;
    }
    return scale;
}

}  // namespace timegraphs
