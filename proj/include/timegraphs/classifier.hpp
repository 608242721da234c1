#pragma once

#include <array>
#include <string>
#include <vector>

#include "timegraphs/mlp.hpp"
#include "timegraphs/rng.hpp"
#include "timegraphs/tape.hpp"
#include "timegraphs/tkg.hpp"

namespace timegraphs {

inline constexpr int kRelationKinds = 4;  // Spatial, Temporal, Hierarchy, SuperAdjacency

struct ClassifierConfig {
    int layers = 2;
    int hidden_dim = 64;
    int input_dim = 0;    // node features + attention scalar + level one-hot
    int level_count = 1;  // readout concatenates this many per-level means
    int num_categories = 0;
    double threshold = 0.5;
    bool no_temporal = false;   // ablation: temporal messages zeroed
};

// Per-layer relational weights plus a classification head over the
// multi-scale readout.
struct ClassifierParams {
    struct Layer {
        std::array<Tensor, kRelationKinds> rel_weight;
        Tensor self_weight;
        Tensor bias;
    };
    std::vector<Layer> layers;
    Mlp head;

    void visit(const std::string& prefix, const ParamVisitor& f);
};

ClassifierParams init_classifier(const ClassifierConfig& cfg, Rng& rng);

// Label space with per-category positive weights p_c = (#neg / #pos)
// clipped to [0.1, 10], computed from training label frequency.
struct LabelSpace {
    std::vector<std::string> categories;
    std::vector<double> pos_weight;
};

LabelSpace make_label_space(const std::vector<std::string>& categories,
                            const std::vector<std::vector<int>>& train_labels);

// Per-window network input assembled from a TKG: node features with the
// attention scalar and level one-hot appended, per-relation neighbor lists
// (undirected), and per-level row indices for the readout.
struct ClassifierInput {
    Tensor features;  // n x input_dim
    std::array<std::vector<std::vector<int>>, kRelationKinds> rel_nbrs;
    std::vector<std::vector<int>> level_rows;
};

ClassifierInput assemble_input(const TemporalKnowledgeGraph& tkg, int level_count,
                               bool no_temporal);

// L layers of per-relation mean aggregation + self transform + ReLU.
// Zero layers returns the input features unchanged.
Tape::Id rgcn_forward(Tape& tape, ClassifierParams& params, const ClassifierInput& input,
                      Tape::Id features, const ClassifierConfig& cfg);

// Concatenation over levels of per-level mean-pooled embeddings. Levels with
// no nodes contribute zeros.
Tape::Id readout(Tape& tape, Tape::Id embeddings, const ClassifierInput& input, int level_count);

// Full forward to |C| logits (1 x C).
Tape::Id classifier_logits(Tape& tape, ClassifierParams& params, const ClassifierInput& input,
                           const ClassifierConfig& cfg);

// Weighted binary cross-entropy:
//   -(1/|C|) sum_c [ p_c y_c log(yhat_c) + (1 - y_c) log(1 - yhat_c) ]
Tape::Id classification_loss(Tape& tape, Tape::Id logits, const std::vector<int>& y,
                             const LabelSpace& label_space);

// L_e2e = L_classification + alpha * L_hierarchy, alpha = 2 - epoch/total.
Tape::Id e2e_loss(Tape& tape, Tape::Id cls_loss, Tape::Id hier_loss, int epoch, int total_epochs);

struct Prediction {
    std::vector<int> labels;
    std::vector<double> probabilities;
};

// Thresholded prediction; probability exactly at the threshold counts as
// positive.
Prediction predict(ClassifierParams& params, const ClassifierInput& input,
                   const ClassifierConfig& cfg, double threshold);

}  // namespace timegraphs
