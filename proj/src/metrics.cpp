#include "timegraphs/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "timegraphs/error.hpp"

namespace timegraphs {

namespace {

void check_shapes(size_t a_rows, size_t b_rows, const char* what) {
    if (a_rows != b_rows) throw shape_error(std::string(what) + ": row count mismatch");
}

}  // namespace

double exact_match(const BinaryMatrix& preds, const BinaryMatrix& truth) {
    check_shapes(preds.size(), truth.size(), "exact_match");
    if (preds.empty()) return 0.0;
    int hits = 0;
    for (size_t i = 0; i < preds.size(); ++i) {
        if (preds[i].size() != truth[i].size())
            throw shape_error("exact_match: column count mismatch");
        if (preds[i] == truth[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(preds.size());
}

std::vector<Prf> per_category_prf(const BinaryMatrix& preds, const BinaryMatrix& truth) {
    check_shapes(preds.size(), truth.size(), "macro_prf");
    size_t c_count = preds.empty() ? 0 : preds[0].size();
    std::vector<double> tp(c_count, 0.0), fp(c_count, 0.0), fn(c_count, 0.0);
    for (size_t i = 0; i < preds.size(); ++i) {
        if (preds[i].size() != c_count || truth[i].size() != c_count)
            throw shape_error("macro_prf: column count mismatch");
        for (size_t c = 0; c < c_count; ++c) {
            if (preds[i][c] && truth[i][c]) tp[c] += 1.0;
            else if (preds[i][c] && !truth[i][c]) fp[c] += 1.0;
            else if (!preds[i][c] && truth[i][c]) fn[c] += 1.0;
        }
    }
    std::vector<Prf> out(c_count);
    for (size_t c = 0; c < c_count; ++c) {
        double p = tp[c] + fp[c] > 0.0 ? tp[c] / (tp[c] + fp[c]) : 0.0;
        double r = tp[c] + fn[c] > 0.0 ? tp[c] / (tp[c] + fn[c]) : 0.0;
        double f = p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
        out[c] = Prf{p, r, f};
    }
    return out;
}

Prf macro_prf(const BinaryMatrix& preds, const BinaryMatrix& truth) {
    auto per_cat = per_category_prf(preds, truth);
    Prf avg;
    if (per_cat.empty()) return avg;
    for (const auto& prf : per_cat) {
        avg.precision += prf.precision;
        avg.recall += prf.recall;
        avg.f1 += prf.f1;
    }
    double n = static_cast<double>(per_cat.size());
    avg.precision /= n;
    avg.recall /= n;
    avg.f1 /= n;
    return avg;
}

double mean_average_precision(const ScoreMatrix& scores, const BinaryMatrix& truth) {
    check_shapes(scores.size(), truth.size(), "mean_average_precision");
    size_t c_count = scores.empty() ? 0 : scores[0].size();
    double ap_sum = 0.0;
    int cats_with_pos = 0;
    for (size_t c = 0; c < c_count; ++c) {
        std::vector<int> order(scores.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return scores[a][c] > scores[b][c];  // ties keep index order
        });
        int positives_seen = 0;
        double precision_sum = 0.0;
        for (size_t rank = 0; rank < order.size(); ++rank) {
            if (scores[order[rank]].size() != c_count || truth[order[rank]].size() != c_count)
                throw shape_error("mean_average_precision: column count mismatch");
            if (truth[order[rank]][c]) {
                ++positives_seen;
                precision_sum += static_cast<double>(positives_seen) / static_cast<double>(rank + 1);
            }
        }
        if (positives_seen > 0) {
            ap_sum += precision_sum / positives_seen;
            ++cats_with_pos;
        }
    }
    if (cats_with_pos == 0)
        throw domain_error("mean_average_precision: no positives in any category");
    return ap_sum / cats_with_pos;
}

nlohmann::json MetricsReport::to_json() const {
    nlohmann::json per_cat = nlohmann::json::array();
    for (size_t c = 0; c < per_category.size(); ++c) {
        per_cat.push_back({{"category", c < categories.size() ? categories[c] : std::to_string(c)},
                           {"precision", per_category[c].precision},
                           {"recall", per_category[c].recall},
                           {"f1", per_category[c].f1}});
    }
    return {{"macro_f1", macro_f1},
            {"macro_precision", macro_precision},
            {"macro_recall", macro_recall},
            {"exact_match", exact_match},
            {"map", map},
            {"samples", samples},
            {"per_category", per_cat}};
}

std::string MetricsReport::to_table() const {
    std::ostringstream os;
    char line[160];
    std::snprintf(line, sizeof(line), "%-10s %-10s %-10s %-10s %-10s %-8s\n", "F1", "Prec.",
                  "Recall", "EM", "mAP", "N");
    os << line;
    std::snprintf(line, sizeof(line), "%-10.4f %-10.4f %-10.4f %-10.4f %-10.4f %-8d\n", macro_f1,
                  macro_precision, macro_recall, exact_match, map, samples);
    os << line;
    return os.str();
}

MetricsReport compute_metrics(const BinaryMatrix& preds, const ScoreMatrix& scores,
                              const BinaryMatrix& truth,
                              const std::vector<std::string>& categories) {
    MetricsReport report;
    report.samples = static_cast<int>(truth.size());
    report.categories = categories;
    report.exact_match = exact_match(preds, truth);
    report.per_category = per_category_prf(preds, truth);
    Prf avg = macro_prf(preds, truth);
    report.macro_f1 = avg.f1;
    report.macro_precision = avg.precision;
    report.macro_recall = avg.recall;
    report.map = mean_average_precision(scores, truth);
    return report;
}

}  // namespace timegraphs
