#include "timegraphs/diagnostics.hpp"

#include <chrono>

#include "timegraphs/classifier.hpp"
#include "timegraphs/event_model.hpp"
#include "timegraphs/gradcheck.hpp"
#include "timegraphs/rng.hpp"

namespace timegraphs {

namespace {

LevelGraph toy_graph(int n, int feature_dim, Rng& rng) {
    Tensor features(n, feature_dim);
    for (double& v : features.data) v = rng.uniform(-1.0, 1.0);
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);  // path
    edges.emplace_back(0, n / 2);                                  // one chord
    return make_level_graph(std::move(features), edges);
}

std::vector<std::pair<std::string, Tensor*>> collect(EventModelParams& p) {
    std::vector<std::pair<std::string, Tensor*>> out;
    p.visit("event", [&out](const std::string& name, Tensor& t) { out.emplace_back(name, &t); });
    return out;
}

std::vector<std::pair<std::string, Tensor*>> collect(ClassifierParams& p) {
    std::vector<std::pair<std::string, Tensor*>> out;
    p.visit("cls", [&out](const std::string& name, Tensor& t) { out.emplace_back(name, &t); });
    return out;
}

}  // namespace

std::vector<GradCheckRow> run_gradcheck_suite(uint64_t seed) {
    std::vector<GradCheckRow> rows;
    auto timed = [&rows](const std::string& name, auto&& fn,
                         const std::vector<std::pair<std::string, Tensor*>>& params) {
        auto start = std::chrono::steady_clock::now();
        GradCheckReport report = grad_check(fn, params, 1e-5);
        auto end = std::chrono::steady_clock::now();
        rows.push_back(GradCheckRow{name, report.max_rel_error, report.checked,
                                    std::chrono::duration<double>(end - start).count()});
    };

    Rng rng(seed);

    // Hierarchy loss: 6-node graph, 2-scale pyramid.
    EventModelConfig mc;
    mc.feature_dim = 4;
    mc.embed_dim = 8;
    mc.radius = 1;
    mc.pool_ratio = 0.5;
    mc.scales = 2;
    EventModelParams event = init_event_model(mc, rng);
    LevelGraph graph6 = toy_graph(6, mc.feature_dim, rng);
    std::vector<double> ratios{0.5, 0.5};
    auto hierarchy_fn = [&](Tape& tape) {
        return pyramid_forward(tape, event, graph6, ratios, mc).loss;
    };
    timed("hierarchy", hierarchy_fn, collect(event));

    // Classification loss: 4 categories over a small flat graph.
    ClassifierConfig cc;
    cc.layers = 2;
    cc.hidden_dim = 6;
    cc.level_count = 1;
    cc.input_dim = mc.feature_dim + 1 + cc.level_count;
    cc.num_categories = 4;
    ClassifierParams cls = init_classifier(cc, rng);
    ClassifierInput input;
    input.features = Tensor(5, cc.input_dim);
    for (double& v : input.features.data) v = rng.uniform(-1.0, 1.0);
    for (auto& rel : input.rel_nbrs) rel.assign(5, {});
    for (int i = 0; i + 1 < 5; ++i) {
        input.rel_nbrs[0][i].push_back(i + 1);
        input.rel_nbrs[0][i + 1].push_back(i);
    }
    input.rel_nbrs[1][0].push_back(4);
    input.rel_nbrs[1][4].push_back(0);
    input.level_rows.assign(1, {0, 1, 2, 3, 4});
    std::vector<int> y{1, 0, 1, 0};
    LabelSpace ls;
    ls.categories = {"c0", "c1", "c2", "c3"};
    ls.pos_weight = {2.0, 1.0, 0.5, 1.5};
    auto cls_fn = [&](Tape& tape) {
        Tape::Id logits = classifier_logits(tape, cls, input, cc);
        return classification_loss(tape, logits, y, ls);
    };
    timed("classification", cls_fn, collect(cls));

    // Combined loss at epoch 3 of 10, gradients through both parameter sets.
    auto e2e_fn = [&](Tape& tape) {
        Tape::Id logits = classifier_logits(tape, cls, input, cc);
        Tape::Id cls_l = classification_loss(tape, logits, y, ls);
        Tape::Id hier_l = pyramid_forward(tape, event, graph6, ratios, mc).loss;
        return e2e_loss(tape, cls_l, hier_l, 3, 10);
    };
    auto both = collect(event);
    for (auto& entry : collect(cls)) both.push_back(entry);
    timed("e2e", e2e_fn, both);

    return rows;
}

}  // namespace timegraphs
