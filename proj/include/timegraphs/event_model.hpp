#pragma once

#include <optional>
#include <vector>

#include "timegraphs/level_graph.hpp"
#include "timegraphs/mlp.hpp"
#include "timegraphs/rng.hpp"
#include "timegraphs/tape.hpp"
#include "timegraphs/tensor.hpp"

namespace timegraphs {

struct EventModelConfig {
    int feature_dim = 0;      // input feature width F, set from data
    int embed_dim = 32;       // shared output width of node and neighborhood encoders
    int radius = 1;           // neighborhood geodesic threshold R
    double pool_ratio = 0.5;  // selection budget fraction per scale
    int scales = 2;           // pyramid depth
    int negative_samples = 0;         // 0 = exact double sum
    int greedy_exact_threshold = 512; // larger graphs use sampled marginals
    bool exclude_center = false;      // drop the center from its own neighborhood
};

// Trainable pieces: node encoder E, neighborhood encoder (per-member linear
// map, per-hop mixing weights, MLP) P, similarity head S mapping the
// concatenated pair embedding to a scalar, and the pyramid cross-projections.
struct EventModelParams {
    Mlp node_encoder;               // F -> H -> H
    Tensor member_map;              // F x H
    Tensor hop_mix;                 // 1 x (R+1)
    Mlp nbr_encoder;                // H -> H
    Mlp similarity;                 // 2H -> H -> 1
    std::vector<Tensor> cross_down; // fine -> coarse feature projections, F x F
    std::vector<Tensor> cross_up;   // coarse -> fine feature projections, F x F

    void visit(const std::string& prefix, const ParamVisitor& f);
};

EventModelParams init_event_model(const EventModelConfig& cfg, Rng& rng);

// Selected subset with per-node scores sigma(t_w(x_v, N_v)).
struct PoolSelection {
    std::vector<int> selected;   // local node indices, selection order
    int budget = 0;
    std::vector<double> scores;  // parallel to selected, in [0,1]
};

// Scalar affinity t_w(x_v, N_u) = S(E(x_v), P(y_{N_u})) on the tape.
Tape::Id t_w(Tape& tape, EventModelParams& params, const LevelGraph& graph, int v, int u,
             const EventModelConfig& cfg);

// Affinities for all ordered pairs: entry (v, u) scores node v's embedding
// against node u's neighborhood. Value-only path used by greedy selection.
Tensor pair_affinities(const EventModelParams& params, const LevelGraph& graph,
                       const EventModelConfig& cfg);

// Contrastive criterion
//   C(Omega) = 1/|O| sum_{v} log sigma(t_w(x_v, N_v))
//            + 1/|O|^2 sum_{v != u} log(1 - sigma(t_w(x_v, N_u)))
// When negative_samples = m is given, the second sum is estimated from m
// uniformly sampled ordered pairs, rescaled by |O|(|O|-1) / (m |O|^2).
Tape::Id criterion(Tape& tape, EventModelParams& params, const LevelGraph& graph,
                   const std::vector<int>& omega, const EventModelConfig& cfg,
                   std::optional<int> negative_samples = std::nullopt, Rng* rng = nullptr);

// Same criterion over features already on the tape (pyramid scales).
Tape::Id criterion_on(Tape& tape, EventModelParams& params,
                      const std::vector<Neighborhood>& neighborhoods, Tape::Id features,
                      const std::vector<int>& omega, const EventModelConfig& cfg,
                      std::optional<int> negative_samples = std::nullopt, Rng* rng = nullptr);

// Greedy maximization of C: first the best single node, then repeated best
// marginal additions until |Omega| = K. Ties break to the smallest index;
// the result is a pure function of (params, graph, K).
PoolSelection greedy_select(const EventModelParams& params, const LevelGraph& graph, int K,
                            const EventModelConfig& cfg);

// L_hierarchy = -C(greedy selection). The selection is a hard choice;
// gradients flow only through the criterion at the chosen subset.
Tape::Id hierarchy_loss(Tape& tape, EventModelParams& params, const LevelGraph& graph, int K,
                        const EventModelConfig& cfg,
                        std::optional<int> negative_samples = std::nullopt, Rng* rng = nullptr);

// Multi-scale pyramid: pooling downward with fine->coarse crossing, unpooling
// upward with coarse->fine crossing, per-scale losses summed, and a readout
// concatenating mean-pooled features from every scale.
struct PyramidScale {
    LevelGraph graph;
    PoolSelection selection;
    Tape::Id features = -1;     // downward-pass features
    Tape::Id features_up = -1;  // after unpooling, feeds the readout
};

struct PyramidResult {
    std::vector<PyramidScale> scales;
    Tape::Id readout = -1;  // 1 x (scales * F)
    Tape::Id loss = -1;     // sum of per-scale hierarchy losses
};

PyramidResult pyramid_forward(Tape& tape, EventModelParams& params, const LevelGraph& base,
                              const std::vector<double>& ratios, const EventModelConfig& cfg,
                              Rng* rng = nullptr);

}  // namespace timegraphs
