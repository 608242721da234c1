#include "timegraphs/event_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "timegraphs/error.hpp"

namespace timegraphs {

namespace {

double softplus(double x) {
    if (x > 0.0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

double log_sigma(double x) { return -softplus(-x); }
double log_one_minus_sigma(double x) { return -softplus(x); }
double sigma(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Tensor onehot_col(int size, int index) {
    Tensor t(size, 1);
    t.at(index, 0) = 1.0;
    return t;
}

// Per-hop member weight rows for the P-side aggregation. Entry (j, m) is
// 1/|N_j| when m sits at hop h of p_nodes[j]'s neighborhood.
std::vector<Tensor> hop_weight_mats(const std::vector<Neighborhood>& nbrs,
                                    const std::vector<int>& p_nodes, int n, int radius,
                                    bool exclude_center) {
    std::vector<Tensor> mats(radius + 1, Tensor(static_cast<int>(p_nodes.size()), n));
    for (size_t j = 0; j < p_nodes.size(); ++j) {
        const Neighborhood& nb = nbrs[p_nodes[j]];
        int denom = static_cast<int>(nb.members.size()) - (exclude_center ? 1 : 0);
        if (denom <= 0) continue;
        for (size_t m = 0; m < nb.members.size(); ++m) {
            if (exclude_center && nb.members[m] == nb.center) continue;
            mats[nb.hops[m]].at(static_cast<int>(j), nb.members[m]) += 1.0 / denom;
        }
    }
    return mats;
}

// t_w for an explicit pair list, on the tape. e_nodes/p_nodes are node
// indices; pairs index into those lists. Output is |pairs| x 1, pair order.
Tape::Id affinity_pairs(Tape& tape, EventModelParams& params, Tape::Id features,
                        const std::vector<Neighborhood>& nbrs, const std::vector<int>& e_nodes,
                        const std::vector<int>& p_nodes,
                        const std::vector<std::pair<int, int>>& pairs,
                        const EventModelConfig& cfg) {
    int n = tape.value(features).rows;
    Tape::Id embedded = mlp_forward(tape, params.node_encoder, tape.gather_rows(features, e_nodes));

    auto mats = hop_weight_mats(nbrs, p_nodes, n, cfg.radius, cfg.exclude_center);
    Tape::Id mix = -1;
    for (int h = 0; h <= cfg.radius; ++h) {
        Tape::Id gamma = tape.matmul(tape.param(params.hop_mix), tape.leaf(onehot_col(cfg.radius + 1, h)));
        Tape::Id term = tape.mul_scalar(tape.leaf(mats[h]), gamma);
        mix = (mix < 0) ? term : tape.add(mix, term);
    }
    Tape::Id mapped = tape.matmul(features, tape.param(params.member_map));
    Tape::Id pooled = mlp_forward(tape, params.nbr_encoder, tape.matmul(mix, mapped));

    std::vector<int> ei, pi;
    ei.reserve(pairs.size());
    pi.reserve(pairs.size());
    for (const auto& [a, b] : pairs) {
        ei.push_back(a);
        pi.push_back(b);
    }
    Tape::Id cat = tape.concat_cols(tape.gather_rows(embedded, ei), tape.gather_rows(pooled, pi));
    return mlp_forward(tape, params.similarity, cat);
}

// Value-only affinity cache: node embeddings and neighborhood embeddings are
// computed once; pair scores on demand.
struct AffinityEvaluator {
    Tensor node_emb;  // n x H
    Tensor nbr_emb;   // n x H
    const Mlp* sim = nullptr;

    double pair(int v, int u) const {
        int h = node_emb.cols;
        Tensor cat(1, 2 * h);
        for (int c = 0; c < h; ++c) {
            cat.at(0, c) = node_emb.at(v, c);
            cat.at(0, h + c) = nbr_emb.at(u, c);
        }
        return mlp_forward_value(*sim, cat).at(0, 0);
    }

    // All affinities against a fixed E-side node v, batched.
    std::vector<double> row(int v, const std::vector<int>& us) const {
        int h = node_emb.cols;
        Tensor cat(static_cast<int>(us.size()), 2 * h);
        for (size_t r = 0; r < us.size(); ++r)
            for (int c = 0; c < h; ++c) {
                cat.at(static_cast<int>(r), c) = node_emb.at(v, c);
                cat.at(static_cast<int>(r), h + c) = nbr_emb.at(us[r], c);
            }
        Tensor out = mlp_forward_value(*sim, cat);
        std::vector<double> vals(us.size());
        for (size_t r = 0; r < us.size(); ++r) vals[r] = out.at(static_cast<int>(r), 0);
        return vals;
    }
};

AffinityEvaluator make_evaluator(const EventModelParams& params, const LevelGraph& graph,
                                 const std::vector<Neighborhood>& nbrs,
                                 const EventModelConfig& cfg) {
    AffinityEvaluator ev;
    ev.node_emb = mlp_forward_value(params.node_encoder, graph.features);
    int n = graph.n();
    Tensor mapped = matmul(graph.features, params.member_map);
    Tensor pooled_in(n, mapped.cols);
    for (int v = 0; v < n; ++v) {
        const Neighborhood& nb = nbrs[v];
        int denom = static_cast<int>(nb.members.size()) - (cfg.exclude_center ? 1 : 0);
        if (denom <= 0) continue;
        for (size_t m = 0; m < nb.members.size(); ++m) {
            if (cfg.exclude_center && nb.members[m] == nb.center) continue;
            double w = params.hop_mix.at(0, nb.hops[m]) / denom;
            for (int c = 0; c < mapped.cols; ++c)
                pooled_in.at(v, c) += w * mapped.at(nb.members[m], c);
        }
    }
    ev.nbr_emb = mlp_forward_value(params.nbr_encoder, pooled_in);
    ev.sim = &params.similarity;
    return ev;
}

}  // namespace

void EventModelParams::visit(const std::string& prefix, const ParamVisitor& f) {
    node_encoder.visit(prefix + ".enc", f);
    f(prefix + ".member_map", member_map);
    f(prefix + ".hop_mix", hop_mix);
    nbr_encoder.visit(prefix + ".nbr", f);
    similarity.visit(prefix + ".sim", f);
    for (size_t i = 0; i < cross_down.size(); ++i)
        f(prefix + ".cross_down" + std::to_string(i), cross_down[i]);
    for (size_t i = 0; i < cross_up.size(); ++i)
        f(prefix + ".cross_up" + std::to_string(i), cross_up[i]);
}

EventModelParams init_event_model(const EventModelConfig& cfg, Rng& rng) {
    if (cfg.feature_dim <= 0) throw config_error("event model: feature_dim must be positive");
    if (cfg.embed_dim <= 0) throw config_error("event model: embed_dim must be positive");
    if (cfg.radius < 0) throw config_error("event model: radius must be >= 0");
    if (cfg.scales < 1) throw config_error("event model: need at least one scale");
    EventModelParams p;
    p.node_encoder = make_mlp({cfg.feature_dim, cfg.embed_dim, cfg.embed_dim}, Activation::Relu, rng);
    p.member_map = xavier_uniform(cfg.feature_dim, cfg.embed_dim, rng);
    p.hop_mix = Tensor(1, cfg.radius + 1);
    for (double& v : p.hop_mix.data) v = 1.0;
    p.nbr_encoder = make_mlp({cfg.embed_dim, cfg.embed_dim}, Activation::Relu, rng);
    p.similarity = make_mlp({2 * cfg.embed_dim, cfg.embed_dim, 1}, Activation::Relu, rng);
    for (int s = 0; s + 1 < cfg.scales; ++s) {
        p.cross_down.push_back(xavier_uniform(cfg.feature_dim, cfg.feature_dim, rng));
        p.cross_up.push_back(xavier_uniform(cfg.feature_dim, cfg.feature_dim, rng));
    }
    return p;
}

Tape::Id t_w(Tape& tape, EventModelParams& params, const LevelGraph& graph, int v, int u,
             const EventModelConfig& cfg) {
    if (v < 0 || v >= graph.n() || u < 0 || u >= graph.n())
        throw domain_error("t_w: node index out of range");
    auto nbrs = all_neighborhoods(graph, cfg.radius);
    return affinity_pairs(tape, params, tape.leaf(graph.features), nbrs, {v}, {u}, {{0, 0}}, cfg);
}

Tensor pair_affinities(const EventModelParams& params, const LevelGraph& graph,
                       const EventModelConfig& cfg) {
    int n = graph.n();
    auto nbrs = all_neighborhoods(graph, cfg.radius);
    AffinityEvaluator ev = make_evaluator(params, graph, nbrs, cfg);
    std::vector<int> all(n);
    std::iota(all.begin(), all.end(), 0);
    Tensor t(n, n);
    for (int v = 0; v < n; ++v) {
        auto vals = ev.row(v, all);
        for (int u = 0; u < n; ++u) t.at(v, u) = vals[u];
    }
    return t;
}

Tape::Id criterion_on(Tape& tape, EventModelParams& params,
                      const std::vector<Neighborhood>& neighborhoods, Tape::Id features,
                      const std::vector<int>& omega, const EventModelConfig& cfg,
                      std::optional<int> negative_samples, Rng* rng) {
    int k = static_cast<int>(omega.size());
    if (k == 0) throw domain_error("criterion: empty selection");
    bool sampled = negative_samples.has_value() && k > 1;
    if (sampled && *negative_samples <= 0) throw config_error("criterion: negative_samples must be positive");
    // A sample budget covering every ordered pair degenerates to the exact sum.
    if (sampled && *negative_samples >= k * (k - 1)) sampled = false;
    if (sampled && rng == nullptr) throw config_error("criterion: sampling requires an RNG");

    std::vector<std::pair<int, int>> pairs;
    std::vector<double> pos_w, neg_w;
    if (!sampled) {
        pairs.reserve(static_cast<size_t>(k) * k);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) {
                pairs.emplace_back(i, j);
                pos_w.push_back(i == j ? 1.0 / k : 0.0);
                neg_w.push_back(i == j ? 0.0 : 1.0 / (static_cast<double>(k) * k));
            }
    } else {
        int m = *negative_samples;
        for (int i = 0; i < k; ++i) {
            pairs.emplace_back(i, i);
            pos_w.push_back(1.0 / k);
            neg_w.push_back(0.0);
        }
        double scale = static_cast<double>(k) * (k - 1) /
                       (static_cast<double>(m) * static_cast<double>(k) * k);
        for (int s = 0; s < m; ++s) {
            int i = rng->uniform_int(0, k - 1);
            int j = rng->uniform_int(0, k - 2);
            if (j >= i) ++j;  // uniform over ordered pairs with i != j
            pairs.emplace_back(i, j);
            pos_w.push_back(0.0);
            neg_w.push_back(scale);
        }
    }

    Tape::Id t = affinity_pairs(tape, params, features, neighborhoods, omega, omega, pairs, cfg);
    Tape::Id pos = tape.matmul(tape.leaf(Tensor::row(pos_w)), tape.log_sigmoid(t));
    if (k == 1) return pos;
    Tape::Id neg = tape.matmul(tape.leaf(Tensor::row(neg_w)), tape.log_one_minus_sigmoid(t));
    return tape.add(pos, neg);
}

Tape::Id criterion(Tape& tape, EventModelParams& params, const LevelGraph& graph,
                   const std::vector<int>& omega, const EventModelConfig& cfg,
                   std::optional<int> negative_samples, Rng* rng) {
    for (int v : omega)
        if (v < 0 || v >= graph.n()) throw domain_error("criterion: selection out of range");
    auto nbrs = all_neighborhoods(graph, cfg.radius);
    return criterion_on(tape, params, nbrs, tape.leaf(graph.features), omega, cfg,
                        negative_samples, rng);
}

PoolSelection greedy_select(const EventModelParams& params, const LevelGraph& graph, int K,
                            const EventModelConfig& cfg) {
    int n = graph.n();
    if (K < 1) throw domain_error("greedy_select: K must be >= 1");
    if (K > n) throw domain_error("greedy_select: K exceeds node count");

    auto nbrs = all_neighborhoods(graph, cfg.radius);
    PoolSelection sel;
    sel.budget = K;
    std::vector<bool> chosen(n, false);

    if (n <= cfg.greedy_exact_threshold) {
        Tensor t = pair_affinities(params, graph, cfg);
        // Cached positive terms and exact negative marginals.
        std::vector<double> pos(n);
        for (int v = 0; v < n; ++v) pos[v] = log_sigma(t.at(v, v));
        double pos_sum = 0.0, neg_sum = 0.0;
        for (int round = 0; round < K; ++round) {
            int best = -1;
            double best_c = 0.0;
            int kk = round + 1;
            for (int u = 0; u < n; ++u) {
                if (chosen[u]) continue;
                double delta = 0.0;
                for (int w : sel.selected)
                    delta += log_one_minus_sigma(t.at(u, w)) + log_one_minus_sigma(t.at(w, u));
                double c = (pos_sum + pos[u]) / kk +
                           (kk > 1 ? (neg_sum + delta) / (static_cast<double>(kk) * kk) : 0.0);
                if (best < 0 || c > best_c) {
                    best = u;
                    best_c = c;
                }
            }
            double delta = 0.0;
            for (int w : sel.selected)
                delta += log_one_minus_sigma(t.at(best, w)) + log_one_minus_sigma(t.at(w, best));
            pos_sum += pos[best];
            neg_sum += delta;
            chosen[best] = true;
            sel.selected.push_back(best);
            sel.scores.push_back(sigma(t.at(best, best)));
        }
        return sel;
    }

    // Large graphs: positive terms exact, negative marginals estimated from
    // sampled pairs (4K by default). Deterministic via an internal seed so
    // the selection is a pure function of (params, graph, K).
    AffinityEvaluator ev = make_evaluator(params, graph, nbrs, cfg);
    Rng rng(0x9E3779B97F4A7C15ULL ^ (static_cast<uint64_t>(n) << 20) ^ static_cast<uint64_t>(K));
    std::vector<double> pos(n), diag(n);
    for (int v = 0; v < n; ++v) {
        diag[v] = ev.pair(v, v);
        pos[v] = log_sigma(diag[v]);
    }
    double pos_sum = 0.0, neg_sum = 0.0;
    int m_budget = 4 * K;
    for (int round = 0; round < K; ++round) {
        int kk = round + 1;
        int best = -1;
        double best_c = 0.0;
        for (int u = 0; u < n; ++u) {
            if (chosen[u]) continue;
            double delta = 0.0;
            if (!sel.selected.empty()) {
                int total_pairs = 2 * static_cast<int>(sel.selected.size());
                if (total_pairs <= m_budget) {
                    for (int w : sel.selected)
                        delta += log_one_minus_sigma(ev.pair(u, w)) + log_one_minus_sigma(ev.pair(w, u));
                } else {
                    double acc = 0.0;
                    for (int s = 0; s < m_budget; ++s) {
                        int w = sel.selected[rng.uniform_int(0, static_cast<int>(sel.selected.size()) - 1)];
                        bool forward = rng.uniform() < 0.5;
                        acc += forward ? log_one_minus_sigma(ev.pair(u, w))
                                       : log_one_minus_sigma(ev.pair(w, u));
                    }
                    delta = acc * total_pairs / m_budget;
                }
            }
            double c = (pos_sum + pos[u]) / kk +
                       (kk > 1 ? (neg_sum + delta) / (static_cast<double>(kk) * kk) : 0.0);
            if (best < 0 || c > best_c) {
                best = u;
                best_c = c;
            }
        }
        double delta = 0.0;
        for (int w : sel.selected)
            delta += log_one_minus_sigma(ev.pair(best, w)) + log_one_minus_sigma(ev.pair(w, best));
        pos_sum += pos[best];
        neg_sum += delta;
        chosen[best] = true;
        sel.selected.push_back(best);
        sel.scores.push_back(sigma(diag[best]));
    }
    return sel;
}

Tape::Id hierarchy_loss(Tape& tape, EventModelParams& params, const LevelGraph& graph, int K,
                        const EventModelConfig& cfg, std::optional<int> negative_samples,
                        Rng* rng) {
    PoolSelection sel = greedy_select(params, graph, K, cfg);
    Tape::Id c = criterion(tape, params, graph, sel.selected, cfg, negative_samples, rng);
    return tape.affine(c, -1.0, 0.0);
}

PyramidResult pyramid_forward(Tape& tape, EventModelParams& params, const LevelGraph& base,
                              const std::vector<double>& ratios, const EventModelConfig& cfg,
                              Rng* rng) {
    if (ratios.empty()) throw domain_error("pyramid_forward: empty scale list");
    for (double r : ratios)
        if (r <= 0.0 || r > 1.0) throw config_error("pyramid_forward: ratios must be in (0,1]");
    int n_scales = static_cast<int>(ratios.size());
    if (static_cast<int>(params.cross_down.size()) < n_scales - 1 ||
        static_cast<int>(params.cross_up.size()) < n_scales - 1)
        throw config_error("pyramid_forward: model built for fewer scales");

    PyramidResult result;
    result.scales.resize(n_scales);
    result.scales[0].graph = base;
    result.scales[0].features = tape.leaf(base.features);

    std::optional<int> neg = cfg.negative_samples > 0 ? std::optional<int>(cfg.negative_samples)
                                                      : std::nullopt;

    for (int s = 0; s < n_scales; ++s) {
        PyramidScale& scale = result.scales[s];
        int n = scale.graph.n();
        if (n == 0) throw domain_error("pyramid_forward: empty scale " + std::to_string(s));
        int k = std::max(1, static_cast<int>(std::ceil(ratios[s] * n)));
        scale.selection = greedy_select(params, scale.graph, k, cfg);

        auto nbrs = all_neighborhoods(scale.graph, cfg.radius);
        Tape::Id c = criterion_on(tape, params, nbrs, scale.features, scale.selection.selected,
                                  cfg, neg, rng);
        Tape::Id scale_loss = tape.affine(c, -1.0, 0.0);
        result.loss = (result.loss < 0) ? scale_loss : tape.add(result.loss, scale_loss);

        if (s + 1 == n_scales) break;

        Contraction con = contract(scale.graph, scale.selection.selected, cfg.radius);
        Tensor agg(k, n);
        for (int j = 0; j < k; ++j) {
            const auto& members = con.neighborhoods[j].members;
            for (int m : members) agg.at(j, m) += 1.0 / static_cast<double>(members.size());
        }
        Tape::Id coarse = tape.matmul(tape.leaf(agg), scale.features);
        Tape::Id crossed = tape.matmul(tape.gather_rows(scale.features, scale.selection.selected),
                                       tape.param(params.cross_down[s]));
        Tape::Id next_features = tape.add(coarse, crossed);

        PyramidScale& next = result.scales[s + 1];
        next.graph.features = tape.value(next_features);
        next.graph.adj = con.coarse_adj;
        next.graph.tkg_ids.assign(k, -1);
        next.graph.timestamps.resize(k);
        for (int j = 0; j < k; ++j)
            next.graph.timestamps[j] = scale.graph.timestamps[scale.selection.selected[j]];
        next.features = next_features;
    }

    // Unpooling: scatter coarse features to their seed positions and add a
    // projected correction to the finer scale.
    result.scales[n_scales - 1].features_up = result.scales[n_scales - 1].features;
    for (int s = n_scales - 2; s >= 0; --s) {
        PyramidScale& scale = result.scales[s];
        Tape::Id up = tape.scatter_rows(result.scales[s + 1].features_up,
                                        scale.selection.selected, scale.graph.n());
        scale.features_up = tape.add(scale.features, tape.matmul(up, tape.param(params.cross_up[s])));
    }

    for (int s = 0; s < n_scales; ++s) {
        Tape::Id pooled = tape.mean_rows(result.scales[s].features_up);
        result.readout = (result.readout < 0) ? pooled : tape.concat_cols(result.readout, pooled);
    }
    return result;
}

}  // namespace timegraphs
