#include "timegraphs/experiments.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

#include "timegraphs/builder.hpp"
#include "timegraphs/error.hpp"

namespace timegraphs {

MetricsReport evaluate_bundle(ModelBundle& bundle, const std::vector<PreparedWindow>& windows) {
    BinaryMatrix preds, truth;
    ScoreMatrix scores;
    for (const auto& w : windows) {
        Prediction p = bundle_predict(bundle, w);
        preds.push_back(p.labels);
        scores.push_back(p.probabilities);
        truth.push_back(w.label);
    }
    return compute_metrics(preds, scores, truth, bundle.labels.categories);
}

std::vector<ArmResult> run_main_eval(const std::vector<std::pair<std::string, ModelBundle*>>& arms,
                                     const std::vector<PreparedWindow>& test) {
    std::vector<ArmResult> out;
    for (const auto& [name, bundle] : arms) {
        if (bundle == nullptr) throw domain_error("run_main_eval: missing checkpoint for " + name);
        out.push_back(ArmResult{name, evaluate_bundle(*bundle, test)});
    }
    return out;
}

std::vector<CurvePoint> run_growing_window(ModelBundle& bundle, const Dataset& sequences,
                                           const RunConfig& cfg) {
    // Group outcome-labeled prefixes by length.
    std::map<int, std::pair<BinaryMatrix, BinaryMatrix>> by_len;  // preds, truth
    BuilderConfig builder_cfg = cfg.builder();
    for (const auto& seq : sequences.sequences) {
        auto windows = slice_windows(seq, sequences.categories, 1, 1, 0, /*growing=*/true);
        for (size_t len = 1; len <= windows.size(); ++len) {
            PreparedWindow pw;
            pw.level0 = build_level0(windows[len - 1].snapshots, builder_cfg);
            pw.base = level_view(pw.level0, 0);
            pw.label = windows[len - 1].label;
            Prediction p = bundle_predict(bundle, pw);
            auto& [preds, truth] = by_len[static_cast<int>(len)];
            preds.push_back(p.labels);
            truth.push_back(pw.label);
        }
    }
    std::vector<CurvePoint> curve;
    for (auto& [len, mats] : by_len) {
        CurvePoint pt;
        pt.prefix_len = len;
        pt.accuracy = exact_match(mats.first, mats.second);
        pt.macro_f1 = macro_prf(mats.first, mats.second).f1;
        pt.samples = static_cast<int>(mats.first.size());
        curve.push_back(pt);
    }
    return curve;
}

std::vector<SweepRow> run_future_sweep(ModelBundle& bundle, const Dataset& test,
                                       const RunConfig& cfg, std::vector<int> offsets) {
    std::sort(offsets.begin(), offsets.end());
    offsets.erase(std::unique(offsets.begin(), offsets.end()), offsets.end());
    std::vector<SweepRow> out;
    for (int offset : offsets) {
        RunConfig shifted = cfg;
        shifted.window_future_offset = offset;
        shifted.window_growing = false;
        auto windows = prepare_windows(test, shifted);
        SweepRow row;
        row.offset = offset;
        row.report = evaluate_bundle(bundle, windows);
        out.push_back(std::move(row));
    }
    return out;
}

nlohmann::json arms_to_json(const std::vector<ArmResult>& arms) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& arm : arms) {
        nlohmann::json row = arm.report.to_json();
        row["model"] = arm.name;
        j.push_back(std::move(row));
    }
    return j;
}

std::string arms_to_table(const std::vector<ArmResult>& arms) {
    std::ostringstream os;
    char line[200];
    std::snprintf(line, sizeof(line), "%-24s %-8s %-8s %-8s %-8s %-8s\n", "Model", "F1", "Prec.",
                  "Recall", "EM", "mAP");
    os << line;
    for (const auto& arm : arms) {
        std::snprintf(line, sizeof(line), "%-24s %-8.4f %-8.4f %-8.4f %-8.4f %-8.4f\n",
                      arm.name.c_str(), arm.report.macro_f1, arm.report.macro_precision,
                      arm.report.macro_recall, arm.report.exact_match, arm.report.map);
        os << line;
    }
    return os.str();
}

nlohmann::json curve_to_json(const std::vector<CurvePoint>& curve) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& pt : curve)
        j.push_back({{"prefix_len", pt.prefix_len},
                     {"accuracy", pt.accuracy},
                     {"macro_f1", pt.macro_f1},
                     {"samples", pt.samples}});
    return j;
}

nlohmann::json sweep_to_json(const std::vector<SweepRow>& sweep) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& row : sweep) {
        nlohmann::json r = row.report.to_json();
        r["offset"] = row.offset;
        j.push_back(std::move(r));
    }
    return j;
}

std::string curve_to_svg(const std::vector<std::pair<double, double>>& points,
                         const std::string& x_label, const std::string& y_label) {
    const int width = 480, height = 320, margin = 48;
    double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
    if (!points.empty()) {
        xmin = xmax = points[0].first;
        ymin = ymax = points[0].second;
        for (const auto& [x, y] : points) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
        if (xmax == xmin) xmax = xmin + 1.0;
        if (ymax == ymin) ymax = ymin + 1.0;
    }
    auto sx = [&](double x) {
        return margin + (x - xmin) / (xmax - xmin) * (width - 2 * margin);
    };
    auto sy = [&](double y) {
        return height - margin - (y - ymin) / (ymax - ymin) * (height - 2 * margin);
    };
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
       << height << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin
       << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\""
       << height - margin << "\" stroke=\"black\"/>\n";
    os << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
    for (const auto& [x, y] : points) os << sx(x) << "," << sy(y) << " ";
    os << "\"/>\n";
    for (const auto& [x, y] : points)
        os << "<circle cx=\"" << sx(x) << "\" cy=\"" << sy(y) << "\" r=\"3\" fill=\"steelblue\"/>\n";
    os << "<text x=\"" << width / 2 << "\" y=\"" << height - 12 << "\" text-anchor=\"middle\">"
       << x_label << "</text>\n";
    os << "<text x=\"14\" y=\"" << height / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
       << height / 2 << ")\">" << y_label << "</text>\n";
    os << "</svg>\n";
    return os.str();
}

}  // namespace timegraphs
