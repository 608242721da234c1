#include "timegraphs/gradcheck.hpp"

#include <cmath>

#include "timegraphs/error.hpp"

namespace timegraphs {

namespace {

double eval_loss(const std::function<Tape::Id(Tape&)>& build_loss) {
    Tape tape;
    Tape::Id root = build_loss(tape);
    double v = tape.value(root).item();
    if (!std::isfinite(v)) throw numeric_error("grad_check: non-finite loss");
    return v;
}

}  // namespace

GradCheckReport grad_check(const std::function<Tape::Id(Tape&)>& build_loss,
                           const std::vector<std::pair<std::string, Tensor*>>& params,
                           double eps) {
    // Analytic gradients from one backward pass.
    Tape tape;
    Tape::Id root = build_loss(tape);
    if (!std::isfinite(tape.value(root).item()))
        throw numeric_error("grad_check: non-finite loss");
    tape.backward(root);
    auto pg = tape.param_grads();

    GradCheckReport report;
    for (const auto& [name, param] : params) {
        const Tensor* analytic = nullptr;
        for (const auto& [storage, grad] : pg) {
            if (storage == param) {
                analytic = grad;
                break;
            }
        }
        if (analytic == nullptr)
            throw numeric_error("grad_check: parameter not registered by loss builder: " + name);
        for (int i = 0; i < param->size(); ++i) {
            double saved = param->data[i];
            param->data[i] = saved + eps;
            double up = eval_loss(build_loss);
            param->data[i] = saved - eps;
            double down = eval_loss(build_loss);
            param->data[i] = saved;
            double fd = (up - down) / (2.0 * eps);
            double a = analytic->data[i];
            double denom = std::max({std::fabs(a), std::fabs(fd), 1e-8});
            double rel = std::fabs(a - fd) / denom;
            ++report.checked;
            if (rel > report.max_rel_error) {
                report.max_rel_error = rel;
                report.worst_param = name + "[" + std::to_string(i) + "]";
            }
        }
    }
    return report;
}

}  // namespace timegraphs
