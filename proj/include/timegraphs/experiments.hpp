#pragma once

#include <string>
#include <utility>
#include <vector>

#include "timegraphs/metrics.hpp"
#include "timegraphs/training.hpp"

namespace timegraphs {

MetricsReport evaluate_bundle(ModelBundle& bundle, const std::vector<PreparedWindow>& windows);

struct ArmResult {
    std::string name;
    MetricsReport report;
};

// One row per model arm on a shared test set.
std::vector<ArmResult> run_main_eval(const std::vector<std::pair<std::string, ModelBundle*>>& arms,
                                     const std::vector<PreparedWindow>& test);

struct CurvePoint {
    int prefix_len = 0;
    double accuracy = 0.0;  // exact match at this prefix length
    double macro_f1 = 0.0;
    int samples = 0;
};

// Accuracy as the observed prefix of each sequence grows; every sequence
// contributes one outcome-labeled window per prefix length it covers.
std::vector<CurvePoint> run_growing_window(ModelBundle& bundle, const Dataset& sequences,
                                           const RunConfig& cfg);

struct SweepRow {
    int offset = 0;
    MetricsReport report;
};

// Metrics when the label is read `offset` frames past the window end, with
// the model fixed; duplicate offsets are evaluated once.
std::vector<SweepRow> run_future_sweep(ModelBundle& bundle, const Dataset& test,
                                       const RunConfig& cfg, std::vector<int> offsets);

nlohmann::json arms_to_json(const std::vector<ArmResult>& arms);
std::string arms_to_table(const std::vector<ArmResult>& arms);
nlohmann::json curve_to_json(const std::vector<CurvePoint>& curve);
nlohmann::json sweep_to_json(const std::vector<SweepRow>& sweep);

// Minimal SVG polyline plot for curve-style results.
std::string curve_to_svg(const std::vector<std::pair<double, double>>& points,
                         const std::string& x_label, const std::string& y_label);

}  // namespace timegraphs
