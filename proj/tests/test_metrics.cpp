#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "timegraphs/error.hpp"
#include "timegraphs/metrics.hpp"
#include "timegraphs/rng.hpp"

using namespace timegraphs;

TEST_CASE("exact match examples") {
    CHECK(exact_match({{1, 0}, {1, 1}}, {{1, 0}, {0, 1}}) == doctest::Approx(0.5));
    CHECK(exact_match({{1, 0}, {0, 1}}, {{1, 0}, {0, 1}}) == 1.0);
    CHECK(exact_match({{1, 1}, {1, 1}}, {{0, 0}, {0, 0}}) == 0.0);
    CHECK_THROWS_AS(exact_match({{1}}, {{1}, {0}}), Error);
}

TEST_CASE("macro precision/recall/F1 hand example") {
    // cat1: preds [1,1] truth [1,0]; cat2: preds [0,1] truth [0,1].
    BinaryMatrix preds{{1, 0}, {1, 1}};
    BinaryMatrix truth{{1, 0}, {0, 1}};
    Prf prf = macro_prf(preds, truth);
    CHECK(prf.f1 == doctest::Approx((2.0 / 3.0 + 1.0) / 2.0).epsilon(1e-9));

    Prf perfect = macro_prf(truth, truth);
    CHECK(perfect.precision == 1.0);
    CHECK(perfect.recall == 1.0);
    CHECK(perfect.f1 == 1.0);

    // All-negative predictions on positive truth hit the 0-division rule.
    Prf zero = macro_prf({{0}, {0}}, {{1}, {1}});
    CHECK(zero.precision == 0.0);
    CHECK(zero.recall == 0.0);
    CHECK(zero.f1 == 0.0);
}

TEST_CASE("average precision examples") {
    // One category, ranked (0.9,+),(0.8,-),(0.7,+): AP = (1 + 2/3)/2.
    ScoreMatrix scores{{0.9}, {0.8}, {0.7}};
    BinaryMatrix truth{{1}, {0}, {1}};
    CHECK(mean_average_precision(scores, truth) ==
          doctest::Approx((1.0 + 2.0 / 3.0) / 2.0).epsilon(1e-12));

    // All positives ranked first.
    ScoreMatrix top{{0.9}, {0.8}, {0.2}, {0.1}};
    BinaryMatrix tt{{1}, {1}, {0}, {0}};
    CHECK(mean_average_precision(top, tt) == 1.0);

    // Categories with no positives are skipped.
    ScoreMatrix two{{0.9, 0.4}, {0.8, 0.6}, {0.7, 0.5}};
    BinaryMatrix t2{{1, 0}, {0, 0}, {1, 0}};
    CHECK(mean_average_precision(two, t2) ==
          doctest::Approx((1.0 + 2.0 / 3.0) / 2.0).epsilon(1e-12));

    BinaryMatrix none{{0}, {0}};
    CHECK_THROWS_AS(mean_average_precision({{0.5}, {0.4}}, none), Error);
}

TEST_CASE("mAP tie-break is by sample index") {
    ScoreMatrix tied{{0.5}, {0.5}, {0.5}};
    BinaryMatrix truth{{0}, {1}, {1}};
    // Order stays 0,1,2: AP = (1/2 + 2/3) / 2.
    CHECK(mean_average_precision(tied, truth) ==
          doctest::Approx((0.5 + 2.0 / 3.0) / 2.0).epsilon(1e-12));
}

TEST_CASE("metrics are invariant to sample permutation; mAP to monotone transforms") {
    Rng rng(17);
    int n = 40;
    BinaryMatrix preds(n, std::vector<int>(3));
    BinaryMatrix truth(n, std::vector<int>(3));
    ScoreMatrix scores(n, std::vector<double>(3));
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < 3; ++c) {
            scores[i][c] = rng.uniform();
            preds[i][c] = scores[i][c] > 0.5 ? 1 : 0;
            truth[i][c] = rng.uniform() < 0.3 ? 1 : 0;
        }
    if (truth[0] == std::vector<int>{0, 0, 0}) truth[0] = {1, 0, 0};

    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    rng.shuffle(perm);
    BinaryMatrix preds_p(n), truth_p(n);
    ScoreMatrix scores_p(n);
    for (int i = 0; i < n; ++i) {
        preds_p[i] = preds[perm[i]];
        truth_p[i] = truth[perm[i]];
        scores_p[i] = scores[perm[i]];
    }

    CHECK(exact_match(preds, truth) == doctest::Approx(exact_match(preds_p, truth_p)));
    CHECK(macro_prf(preds, truth).f1 == doctest::Approx(macro_prf(preds_p, truth_p).f1));
    // Ties permuted along with samples keep AP well-defined here because the
    // random scores are almost surely distinct.
    CHECK(mean_average_precision(scores, truth) ==
          doctest::Approx(mean_average_precision(scores_p, truth_p)).epsilon(1e-12));

    ScoreMatrix transformed = scores;
    for (auto& row : transformed)
        for (double& v : row) v = std::exp(3.0 * v + 1.0);  // strictly monotone
    CHECK(mean_average_precision(transformed, truth) ==
          doctest::Approx(mean_average_precision(scores, truth)).epsilon(1e-12));
}

TEST_CASE("EM is 1 exactly when predictions equal truth") {
    BinaryMatrix a{{1, 0}, {0, 1}};
    CHECK(exact_match(a, a) == 1.0);
    BinaryMatrix b = a;
    b[1][0] = 1;
    CHECK(exact_match(b, a) < 1.0);
}

TEST_CASE("random scores on low-prevalence labels give mAP near prevalence") {
    Rng rng(2025);
    const int samples = 150;
    const double prevalence = 0.1;
    BinaryMatrix truth(samples, std::vector<int>(1, 0));
    int positives = static_cast<int>(samples * prevalence);
    for (int i = 0; i < positives; ++i) truth[i][0] = 1;

    const int trials = 2000;
    double sum = 0.0;
    for (int t = 0; t < trials; ++t) {
        ScoreMatrix scores(samples, std::vector<double>(1));
        for (auto& row : scores) row[0] = rng.uniform();
        sum += mean_average_precision(scores, truth);
    }
    CHECK(std::fabs(sum / trials - prevalence) < 0.02);
}

TEST_CASE("report assembly") {
    BinaryMatrix preds{{1, 0}, {1, 1}};
    BinaryMatrix truth{{1, 0}, {0, 1}};
    ScoreMatrix scores{{0.9, 0.2}, {0.8, 0.7}};
    MetricsReport report = compute_metrics(preds, scores, truth, {"x", "y"});
    CHECK(report.samples == 2);
    CHECK(report.exact_match == doctest::Approx(0.5));
    CHECK(report.per_category.size() == 2);
    nlohmann::json j = report.to_json();
    CHECK(j.at("per_category").size() == 2);
    CHECK(j.at("macro_f1").get<double>() == doctest::Approx(report.macro_f1));
    CHECK(report.to_table().find("F1") != std::string::npos);
}
