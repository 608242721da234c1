#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace timegraphs {

using BinaryMatrix = std::vector<std::vector<int>>;
using ScoreMatrix = std::vector<std::vector<double>>;

// Fraction of rows where every label matches.
double exact_match(const BinaryMatrix& preds, const BinaryMatrix& truth);

struct Prf {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Per-category precision/recall/F1 (zero when undefined) averaged over
// categories.
Prf macro_prf(const BinaryMatrix& preds, const BinaryMatrix& truth);
std::vector<Prf> per_category_prf(const BinaryMatrix& preds, const BinaryMatrix& truth);

// Mean over categories with >= 1 positive of average precision: precision at
// each positive's rank in the score-descending ordering, ties broken by
// sample index. Throws when no category has a positive.
double mean_average_precision(const ScoreMatrix& scores, const BinaryMatrix& truth);

struct MetricsReport {
    double macro_f1 = 0.0;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double exact_match = 0.0;
    double map = 0.0;
    int samples = 0;
    std::vector<std::string> categories;
    std::vector<Prf> per_category;

    nlohmann::json to_json() const;
    std::string to_table() const;
};

MetricsReport compute_metrics(const BinaryMatrix& preds, const ScoreMatrix& scores,
                              const BinaryMatrix& truth,
                              const std::vector<std::string>& categories);

}  // namespace timegraphs
