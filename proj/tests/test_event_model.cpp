#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "timegraphs/adam.hpp"
#include "timegraphs/error.hpp"
#include "timegraphs/event_model.hpp"
#include "timegraphs/gradcheck.hpp"
#include "timegraphs/rng.hpp"

using namespace timegraphs;

// Independent straight-line oracle for t_w and C(Omega): explicit loops and
// its own BFS, no Tape, no Mlp forward, no LevelGraph helpers beyond the
// adjacency lists themselves.
namespace oracle {

std::vector<double> mlp_eval(const Mlp& mlp, std::vector<double> x) {
    for (size_t l = 0; l < mlp.layers.size(); ++l) {
        const auto& layer = mlp.layers[l];
        std::vector<double> next(layer.weight.cols, 0.0);
        for (int j = 0; j < layer.weight.cols; ++j) {
            double acc = layer.bias.at(0, j);
            for (int i = 0; i < layer.weight.rows; ++i) acc += x[i] * layer.weight.at(i, j);
            next[j] = acc;
        }
        if (l + 1 < mlp.layers.size()) {
            for (double& v : next) {
                if (mlp.hidden == Activation::Relu) v = v > 0.0 ? v : 0.0;
                else v = std::tanh(v);
            }
        }
        x = std::move(next);
    }
    return x;
}

// Hand-rolled BFS ball with hop distances.
std::vector<std::pair<int, int>> ball(const LevelGraph& g, int center, int radius) {
    std::vector<int> hop(g.n(), -1);
    hop[center] = 0;
    std::vector<int> queue{center};
    std::vector<std::pair<int, int>> members{{center, 0}};
    size_t head = 0;
    while (head < queue.size()) {
        int v = queue[head++];
        if (hop[v] == radius) continue;
        for (int u : g.adj[v]) {
            if (hop[u] < 0) {
                hop[u] = hop[v] + 1;
                queue.push_back(u);
                members.emplace_back(u, hop[u]);
            }
        }
    }
    return members;
}

double t_w(const EventModelParams& p, const LevelGraph& g, int v, int u,
           const EventModelConfig& cfg) {
    std::vector<double> xv(g.features.cols);
    for (int c = 0; c < g.features.cols; ++c) xv[c] = g.features.at(v, c);
    std::vector<double> e = mlp_eval(p.node_encoder, xv);

    auto members = ball(g, u, cfg.radius);
    int denom = static_cast<int>(members.size()) - (cfg.exclude_center ? 1 : 0);
    std::vector<double> pooled(p.member_map.cols, 0.0);
    if (denom > 0) {
        for (auto [m, h] : members) {
            if (cfg.exclude_center && m == u) continue;
            double w = p.hop_mix.at(0, h) / denom;
            for (int c = 0; c < p.member_map.cols; ++c) {
                double mapped = 0.0;
                for (int i = 0; i < g.features.cols; ++i)
                    mapped += g.features.at(m, i) * p.member_map.at(i, c);
                pooled[c] += w * mapped;
            }
        }
    }
    std::vector<double> nbr = mlp_eval(p.nbr_encoder, pooled);

    std::vector<double> cat = e;
    cat.insert(cat.end(), nbr.begin(), nbr.end());
    return mlp_eval(p.similarity, cat)[0];
}

double criterion(const EventModelParams& p, const LevelGraph& g, const std::vector<int>& omega,
                 const EventModelConfig& cfg) {
    auto sigma = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
    double k = static_cast<double>(omega.size());
    double pos = 0.0;
    for (int v : omega) pos += std::log(sigma(t_w(p, g, v, v, cfg)));
    double neg = 0.0;
    for (int v : omega)
        for (int u : omega)
            if (v != u) neg += std::log(1.0 - sigma(t_w(p, g, v, u, cfg)));
    return pos / k + neg / (k * k);
}

}  // namespace oracle

namespace {

LevelGraph random_graph(int n, int feature_dim, Rng& rng) {
    Tensor features(n, feature_dim);
    for (double& v : features.data) v = rng.uniform(-1.5, 1.5);
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (rng.uniform() < 0.4) edges.emplace_back(i, j);
    for (int i = 0; i + 1 < n; ++i)
        if (rng.uniform() < 0.5) edges.emplace_back(i, i + 1);
    return make_level_graph(std::move(features), edges);
}

EventModelConfig small_cfg(int feature_dim, int embed = 8) {
    EventModelConfig cfg;
    cfg.feature_dim = feature_dim;
    cfg.embed_dim = embed;
    cfg.radius = 1;
    cfg.pool_ratio = 0.5;
    cfg.scales = 2;
    return cfg;
}

void zero_similarity(EventModelParams& params) {
    for (auto& layer : params.similarity.layers) {
        for (double& v : layer.weight.data) v = 0.0;
        for (double& v : layer.bias.data) v = 0.0;
    }
}

}  // namespace

TEST_CASE("neighborhood is the BFS ball") {
    Tensor f(4, 1);
    LevelGraph path = make_level_graph(f, {{0, 1}, {1, 2}, {2, 3}});

    Neighborhood n1 = neighborhood(path, 1, 1);
    std::vector<int> m1 = n1.members;
    std::sort(m1.begin(), m1.end());
    CHECK(m1 == std::vector<int>{0, 1, 2});

    Neighborhood n0 = neighborhood(path, 0, 2);
    std::vector<int> m0 = n0.members;
    std::sort(m0.begin(), m0.end());
    CHECK(m0 == std::vector<int>{0, 1, 2});

    LevelGraph isolated = make_level_graph(Tensor(3, 1), {{1, 2}});
    Neighborhood ni = neighborhood(isolated, 0, 1);
    CHECK(ni.members == std::vector<int>{0});
}

TEST_CASE("t_w matches the straight-line oracle on a fixed-seed star") {
    Rng rng(101);
    EventModelConfig cfg = small_cfg(3);
    EventModelParams params = init_event_model(cfg, rng);
    Tensor f(4, 3);
    for (double& v : f.data) v = rng.uniform(-1.0, 1.0);
    LevelGraph star = make_level_graph(f, {{0, 1}, {0, 2}, {0, 3}});

    for (int v = 0; v < 4; ++v)
        for (int u = 0; u < 4; ++u) {
            Tape tape;
            Tape::Id t = t_w(tape, params, star, v, u, cfg);
            CHECK(tape.value(t).item() ==
                  doctest::Approx(oracle::t_w(params, star, v, u, cfg)).epsilon(1e-12));
        }

    // The value-only pair grid agrees with the tape path.
    Tensor grid = pair_affinities(params, star, cfg);
    for (int v = 0; v < 4; ++v)
        for (int u = 0; u < 4; ++u)
            CHECK(grid.at(v, u) ==
                  doctest::Approx(oracle::t_w(params, star, v, u, cfg)).epsilon(1e-12));
}

TEST_CASE("singleton neighborhood reduces P to a transform of one member") {
    Rng rng(55);
    EventModelConfig cfg = small_cfg(3);
    EventModelParams params = init_event_model(cfg, rng);
    Tensor f(2, 3);
    for (double& v : f.data) v = rng.uniform(-1.0, 1.0);
    LevelGraph g = make_level_graph(f, {});  // both nodes isolated

    double via_graph = oracle::t_w(params, g, 0, 1, cfg);
    Tape tape;
    CHECK(tape.value(t_w(tape, params, g, 0, 1, cfg)).item() ==
          doctest::Approx(via_graph).epsilon(1e-12));
}

TEST_CASE("criterion anchors with t_w identically zero") {
    Rng rng(7);
    EventModelConfig cfg = small_cfg(2);
    EventModelParams params = init_event_model(cfg, rng);
    zero_similarity(params);
    LevelGraph g = random_graph(5, 2, rng);

    Tape tape;
    double c1 = tape.value(criterion(tape, params, g, {2}, cfg)).item();
    CHECK(c1 == doctest::Approx(-0.693147).epsilon(1e-5));

    Tape tape2;
    double c2 = tape2.value(criterion(tape2, params, g, {1, 3}, cfg)).item();
    CHECK(c2 == doctest::Approx(-1.039721).epsilon(1e-5));

    Tape tape3;
    CHECK_THROWS_AS(criterion(tape3, params, g, {}, cfg), Error);
}

TEST_CASE("criterion matches the exact double-sum oracle on 100 seeded instances") {
    for (uint64_t seed = 1; seed <= 100; ++seed) {
        Rng rng(seed);
        EventModelConfig cfg = small_cfg(3, 6);
        EventModelParams params = init_event_model(cfg, rng);
        int n = rng.uniform_int(2, 8);
        LevelGraph g = random_graph(n, 3, rng);
        int k = rng.uniform_int(1, n);
        std::vector<int> omega;
        for (int v = 0; v < n; ++v) omega.push_back(v);
        rng.shuffle(omega);
        omega.resize(k);

        Tape tape;
        double lib = tape.value(criterion(tape, params, g, omega, cfg)).item();
        double ref = oracle::criterion(params, g, omega, cfg);
        CHECK(std::fabs(lib - ref) < 1e-10);
    }
}

TEST_CASE("criterion is permutation-invariant and non-positive") {
    Rng rng(31);
    EventModelConfig cfg = small_cfg(3);
    EventModelParams params = init_event_model(cfg, rng);
    LevelGraph g = random_graph(7, 3, rng);
    std::vector<int> omega{0, 2, 4, 6};

    Tape t1, t2;
    double a = t1.value(criterion(t1, params, g, omega, cfg)).item();
    std::vector<int> shuffled{6, 0, 4, 2};
    double b = t2.value(criterion(t2, params, g, shuffled, cfg)).item();
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
    CHECK(a <= 0.0);
}

TEST_CASE("sampling with a full budget equals exact; small budgets are unbiased") {
    Rng rng(13);
    EventModelConfig cfg = small_cfg(2, 6);
    EventModelParams params = init_event_model(cfg, rng);
    LevelGraph g = random_graph(6, 2, rng);
    std::vector<int> omega{0, 1, 2};

    Tape exact_tape;
    double exact = exact_tape.value(criterion(exact_tape, params, g, omega, cfg)).item();

    Rng sampler(99);
    Tape full_tape;
    double full = full_tape.value(
        criterion(full_tape, params, g, omega, cfg, omega.size() * (omega.size() - 1), &sampler))
        .item();
    CHECK(std::fabs(full - exact) < 1e-12);

    const int draws = 100000;
    double sum = 0.0;
    for (int d = 0; d < draws; ++d) {
        Tape t;
        sum += t.value(criterion(t, params, g, omega, cfg, 2, &sampler)).item();
    }
    double mean = sum / draws;
    CHECK(std::fabs(mean - exact) < 0.01 * std::fabs(exact));
}

TEST_CASE("greedy selects everything when K equals the node count") {
    Rng rng(17);
    EventModelConfig cfg = small_cfg(2);
    EventModelParams params = init_event_model(cfg, rng);
    LevelGraph g = random_graph(5, 2, rng);
    PoolSelection sel = greedy_select(params, g, 5, cfg);
    std::vector<int> sorted = sel.selected;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == std::vector<int>{0, 1, 2, 3, 4});
    CHECK(sel.budget == 5);
    for (double s : sel.scores) {
        CHECK(s >= 0.0);
        CHECK(s <= 1.0);
    }
    CHECK_THROWS_AS(greedy_select(params, g, 6, cfg), Error);
}

TEST_CASE("first greedy pick is the argmax single-node criterion") {
    for (uint64_t seed = 200; seed < 230; ++seed) {
        Rng rng(seed);
        EventModelConfig cfg = small_cfg(3, 6);
        EventModelParams params = init_event_model(cfg, rng);
        int n = rng.uniform_int(3, 8);
        LevelGraph g = random_graph(n, 3, rng);
        PoolSelection sel = greedy_select(params, g, 1, cfg);

        int best = -1;
        double best_c = 0.0;
        for (int v = 0; v < n; ++v) {
            double c = oracle::criterion(params, g, {v}, cfg);
            if (best < 0 || c > best_c) {
                best = v;
                best_c = c;
            }
        }
        CHECK(sel.selected.front() == best);
        // Scores are sigma of the diagonal affinity.
        double t_vv = oracle::t_w(params, g, sel.selected[0], sel.selected[0], cfg);
        CHECK(sel.scores.front() == doctest::Approx(1.0 / (1.0 + std::exp(-t_vv))).epsilon(1e-12));
    }
}

TEST_CASE("greedy stays close to exhaustive subset enumeration") {
    double worst_gap = 0.0;
    for (uint64_t seed = 300; seed < 330; ++seed) {
        Rng rng(seed);
        EventModelConfig cfg = small_cfg(3, 6);
        EventModelParams params = init_event_model(cfg, rng);
        int n = rng.uniform_int(4, 8);
        int k = rng.uniform_int(2, 3);
        LevelGraph g = random_graph(n, 3, rng);

        PoolSelection sel = greedy_select(params, g, k, cfg);
        double greedy_c = oracle::criterion(params, g, sel.selected, cfg);

        // Exhaustive max over all K-subsets.
        double best = -1e18;
        std::vector<int> subset(k);
        std::function<void(int, int)> enumerate = [&](int start, int depth) {
            if (depth == k) {
                best = std::max(best, oracle::criterion(params, g, subset, cfg));
                return;
            }
            for (int v = start; v < n; ++v) {
                subset[depth] = v;
                enumerate(v + 1, depth + 1);
            }
        };
        enumerate(0, 0);

        CHECK(greedy_c <= best + 1e-12);
        // Within 10% of the optimum magnitude.
        CHECK(greedy_c >= best - 0.1 * std::fabs(best));
        worst_gap = std::max(worst_gap, (best - greedy_c) / std::fabs(best));
    }
    MESSAGE("worst greedy gap fraction: " << worst_gap);
}

TEST_CASE("greedy is deterministic, including the sampled large-graph path") {
    Rng rng(404);
    EventModelConfig cfg = small_cfg(2, 6);
    EventModelParams params = init_event_model(cfg, rng);
    LevelGraph g = random_graph(30, 2, rng);

    PoolSelection a = greedy_select(params, g, 7, cfg);
    PoolSelection b = greedy_select(params, g, 7, cfg);
    CHECK(a.selected == b.selected);

    EventModelConfig sampled_cfg = cfg;
    sampled_cfg.greedy_exact_threshold = 10;  // force the sampled path
    PoolSelection c = greedy_select(params, g, 7, sampled_cfg);
    PoolSelection d = greedy_select(params, g, 7, sampled_cfg);
    CHECK(c.selected == d.selected);

    // The sampled path's first pick (positive term only) matches exact.
    CHECK(c.selected.front() == a.selected.front());
}

TEST_CASE("hierarchy loss value, gradient, and one-epoch improvement") {
    Rng rng(909);
    EventModelConfig cfg = small_cfg(3, 6);
    EventModelParams params = init_event_model(cfg, rng);

    SUBCASE("zero t_w and a single selection give log 2") {
        zero_similarity(params);
        LevelGraph g = random_graph(4, 3, rng);
        Tape tape;
        Tape::Id loss = hierarchy_loss(tape, params, g, 1, cfg);
        CHECK(tape.value(loss).item() == doctest::Approx(0.693147).epsilon(1e-5));
    }

    SUBCASE("gradient vs finite differences on a 6-node graph") {
        LevelGraph g = random_graph(6, 3, rng);
        auto build = [&](Tape& tape) { return hierarchy_loss(tape, params, g, 3, cfg); };
        std::vector<std::pair<std::string, Tensor*>> entries;
        params.visit("event", [&entries](const std::string& name, Tensor& t) {
            entries.emplace_back(name, &t);
        });
        GradCheckReport report = grad_check(build, entries, 1e-5);
        CHECK(report.max_rel_error < 1e-4);
    }

    SUBCASE("adam steps strictly decrease the loss on a fixed toy graph") {
        LevelGraph g = random_graph(6, 3, rng);
        Adam adam(AdamConfig{0.01, 0.9, 0.999, 1e-8});
        double first = 0.0, after_one = 0.0, last = 0.0;
        for (int step = 0; step < 5; ++step) {
            Tape tape;
            Tape::Id loss = hierarchy_loss(tape, params, g, 3, cfg);
            double v = tape.value(loss).item();
            if (step == 0) first = v;
            if (step == 1) after_one = v;
            last = v;
            tape.backward(loss);
            adam.step(tape.param_grads());
        }
        CHECK(after_one < first);
        CHECK(last < first);
    }
}

TEST_CASE("pyramid shapes, selections, and readout") {
    Rng rng(606);
    EventModelConfig cfg = small_cfg(3, 6);
    EventModelParams params = init_event_model(cfg, rng);

    SUBCASE("single scale at ratio 1 reads out the feature mean") {
        cfg.scales = 1;
        EventModelParams p1 = init_event_model(cfg, rng);
        LevelGraph g = random_graph(6, 3, rng);
        Tape tape;
        PyramidResult pr = pyramid_forward(tape, p1, g, {1.0}, cfg);
        REQUIRE(pr.scales.size() == 1);
        std::vector<int> sel = pr.scales[0].selection.selected;
        std::sort(sel.begin(), sel.end());
        CHECK(sel == std::vector<int>{0, 1, 2, 3, 4, 5});
        const Tensor& readout = tape.value(pr.readout);
        REQUIRE(readout.cols == 3);
        for (int c = 0; c < 3; ++c) {
            double mean = 0.0;
            for (int r = 0; r < 6; ++r) mean += g.features.at(r, c) / 6.0;
            CHECK(readout.at(0, c) == doctest::Approx(mean).epsilon(1e-12));
        }
    }

    SUBCASE("two scales at ratio 0.5 halve the graph and double the readout") {
        LevelGraph g = random_graph(10, 3, rng);
        Tape tape;
        PyramidResult pr = pyramid_forward(tape, params, g, {0.5, 0.5}, cfg);
        REQUIRE(pr.scales.size() == 2);
        CHECK(pr.scales[1].graph.n() == 5);
        CHECK(tape.value(pr.readout).cols == 6);  // 2 x feature dim
    }

    SUBCASE("zeroed cross projections decouple the scales") {
        for (auto& t : params.cross_down)
            for (double& v : t.data) v = 0.0;
        for (auto& t : params.cross_up)
            for (double& v : t.data) v = 0.0;
        LevelGraph g = random_graph(8, 3, rng);
        Tape tape;
        PyramidResult pr = pyramid_forward(tape, params, g, {0.5, 0.5}, cfg);

        // Coarse features must equal the plain neighborhood aggregation.
        Contraction con = contract(g, pr.scales[0].selection.selected, cfg.radius);
        const Tensor& coarse = tape.value(pr.scales[1].features);
        for (size_t j = 0; j < con.neighborhoods.size(); ++j) {
            for (int c = 0; c < 3; ++c) {
                double mean = 0.0;
                for (int m : con.neighborhoods[j].members)
                    mean += g.features.at(m, c) / con.neighborhoods[j].members.size();
                CHECK(coarse.at(static_cast<int>(j), c) == doctest::Approx(mean).epsilon(1e-12));
            }
        }
        // Unpooled fine features reduce to the originals.
        const Tensor& fine_up = tape.value(pr.scales[0].features_up);
        for (int i = 0; i < fine_up.size(); ++i)
            CHECK(fine_up.data[i] == doctest::Approx(g.features.data[i]).epsilon(1e-12));
    }

    SUBCASE("pyramid loss equals the sum of per-scale hierarchy losses") {
        LevelGraph g = random_graph(9, 3, rng);
        Tape tape;
        PyramidResult pr = pyramid_forward(tape, params, g, {0.5, 0.5}, cfg);
        double total = tape.value(pr.loss).item();

        Tape t0;
        double l0 = t0.value(hierarchy_loss(t0, params, g, pr.scales[0].selection.budget, cfg)).item();
        Tape t1;
        double l1 = t1.value(hierarchy_loss(t1, params, pr.scales[1].graph,
                                            pr.scales[1].selection.budget, cfg))
                        .item();
        CHECK(total == doctest::Approx(l0 + l1).epsilon(1e-10));
    }

    SUBCASE("empty ratio list and bad ratios are rejected") {
        LevelGraph g = random_graph(4, 3, rng);
        Tape tape;
        CHECK_THROWS_AS(pyramid_forward(tape, params, g, {}, cfg), Error);
        Tape tape2;
        CHECK_THROWS_AS(pyramid_forward(tape2, params, g, {1.5}, cfg), Error);
    }
}
