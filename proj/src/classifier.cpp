#include "timegraphs/classifier.hpp"

#include <algorithm>
#include <cmath>

#include "timegraphs/error.hpp"

namespace timegraphs {

void ClassifierParams::visit(const std::string& prefix, const ParamVisitor& f) {
    for (size_t l = 0; l < layers.size(); ++l) {
        std::string lp = prefix + ".l" + std::to_string(l);
        for (int r = 0; r < kRelationKinds; ++r)
            f(lp + ".rel" + std::to_string(r), layers[l].rel_weight[r]);
        f(lp + ".self", layers[l].self_weight);
        f(lp + ".bias", layers[l].bias);
    }
    head.visit(prefix + ".head", f);
}

ClassifierParams init_classifier(const ClassifierConfig& cfg, Rng& rng) {
    if (cfg.input_dim <= 0) throw config_error("classifier: input_dim must be positive");
    if (cfg.num_categories <= 0) throw config_error("classifier: num_categories must be positive");
    if (cfg.level_count < 1) throw config_error("classifier: level_count must be >= 1");
    ClassifierParams p;
    int in = cfg.input_dim;
    for (int l = 0; l < cfg.layers; ++l) {
        ClassifierParams::Layer layer;
        for (int r = 0; r < kRelationKinds; ++r)
            layer.rel_weight[r] = xavier_uniform(in, cfg.hidden_dim, rng);
        layer.self_weight = xavier_uniform(in, cfg.hidden_dim, rng);
        layer.bias = Tensor(1, cfg.hidden_dim);
        p.layers.push_back(std::move(layer));
        in = cfg.hidden_dim;
    }
    int readout_dim = in * cfg.level_count;
    p.head = make_mlp({readout_dim, cfg.hidden_dim, cfg.num_categories}, Activation::Relu, rng);
    return p;
}

LabelSpace make_label_space(const std::vector<std::string>& categories,
                            const std::vector<std::vector<int>>& train_labels) {
    LabelSpace ls;
    ls.categories = categories;
    size_t c_count = categories.size();
    std::vector<double> pos(c_count, 0.0);
    for (const auto& y : train_labels) {
        if (y.size() != c_count) throw schema_error("label vector dimension mismatch");
        for (size_t c = 0; c < c_count; ++c) pos[c] += y[c] ? 1.0 : 0.0;
    }
    double total = static_cast<double>(train_labels.size());
    ls.pos_weight.resize(c_count);
    for (size_t c = 0; c < c_count; ++c) {
        double p = pos[c];
        double w = p > 0.0 ? (total - p) / p : 10.0;
        ls.pos_weight[c] = std::clamp(w, 0.1, 10.0);
    }
    return ls;
}

ClassifierInput assemble_input(const TemporalKnowledgeGraph& tkg, int level_count,
                               bool no_temporal) {
    ClassifierInput input;
    int n = static_cast<int>(tkg.nodes.size());
    int feat_dim = n > 0 ? static_cast<int>(tkg.nodes.front().features.size()) : 0;
    input.features = Tensor(n, feat_dim + 1 + level_count);
    for (int i = 0; i < n; ++i) {
        const TkgNode& node = tkg.nodes[i];
        for (int c = 0; c < feat_dim; ++c) input.features.at(i, c) = node.features[c];
        input.features.at(i, feat_dim) = node.attention_score.value_or(0.0);
        int level = std::min(node.level, level_count - 1);
        input.features.at(i, feat_dim + 1 + level) = 1.0;
    }
    for (auto& rel : input.rel_nbrs) rel.assign(n, {});
    for (const auto& e : tkg.edges) {
        int r = static_cast<int>(e.kind);
        if (no_temporal && e.kind == EdgeKind::Temporal) continue;
        input.rel_nbrs[r][e.src].push_back(e.dst);
        input.rel_nbrs[r][e.dst].push_back(e.src);
    }
    for (auto& rel : input.rel_nbrs)
        for (auto& row : rel) {
            std::sort(row.begin(), row.end());
            row.erase(std::unique(row.begin(), row.end()), row.end());
        }
    input.level_rows.assign(level_count, {});
    for (int i = 0; i < n; ++i) {
        int level = std::min(tkg.nodes[i].level, level_count - 1);
        input.level_rows[level].push_back(i);
    }
    return input;
}

Tape::Id rgcn_forward(Tape& tape, ClassifierParams& params, const ClassifierInput& input,
                      Tape::Id features, const ClassifierConfig& cfg) {
    Tape::Id h = features;
    for (auto& layer : params.layers) {
        Tape::Id acc = tape.add_rowvec(tape.matmul(h, tape.param(layer.self_weight)),
                                       tape.param(layer.bias));
        for (int r = 0; r < kRelationKinds; ++r) {
            // Register every relation weight so absent relations report zero
            // gradients rather than vanishing from the parameter list.
            Tape::Id w = tape.param(layer.rel_weight[r]);
            if (cfg.no_temporal && r == static_cast<int>(EdgeKind::Temporal)) continue;
            bool any = false;
            for (const auto& row : input.rel_nbrs[r])
                if (!row.empty()) {
                    any = true;
                    break;
                }
            if (!any) continue;  // relation absent from this graph
            Tape::Id msg = tape.neighbor_mean(h, input.rel_nbrs[r]);
            acc = tape.add(acc, tape.matmul(msg, w));
        }
        h = tape.relu(acc);
    }
    return h;
}

Tape::Id readout(Tape& tape, Tape::Id embeddings, const ClassifierInput& input, int level_count) {
    if (tape.value(embeddings).rows == 0) throw domain_error("readout: empty graph");
    Tape::Id out = -1;
    int dim = tape.value(embeddings).cols;
    for (int l = 0; l < level_count; ++l) {
        Tape::Id pooled;
        if (l < static_cast<int>(input.level_rows.size()) && !input.level_rows[l].empty()) {
            pooled = tape.mean_rows(tape.gather_rows(embeddings, input.level_rows[l]));
        } else {
            pooled = tape.leaf(Tensor(1, dim));
        }
        out = (out < 0) ? pooled : tape.concat_cols(out, pooled);
    }
    return out;
}

Tape::Id classifier_logits(Tape& tape, ClassifierParams& params, const ClassifierInput& input,
                           const ClassifierConfig& cfg) {
    Tape::Id features = tape.leaf(input.features);
    Tape::Id h = rgcn_forward(tape, params, input, features, cfg);
    Tape::Id pooled = readout(tape, h, input, cfg.level_count);
    return mlp_forward(tape, params.head, pooled);
}

Tape::Id classification_loss(Tape& tape, Tape::Id logits, const std::vector<int>& y,
                             const LabelSpace& label_space) {
    const Tensor& lv = tape.value(logits);
    if (!lv.all_finite()) throw numeric_error("classification_loss: non-finite logits");
    int c_count = static_cast<int>(label_space.categories.size());
    if (lv.rows != 1 || lv.cols != c_count)
        throw shape_error("classification_loss: logits shape " + lv.shape_str());
    if (static_cast<int>(y.size()) != c_count)
        throw shape_error("classification_loss: label dimension mismatch");

    Tensor wpos(1, c_count), wneg(1, c_count);
    for (int c = 0; c < c_count; ++c) {
        wpos.at(0, c) = y[c] ? label_space.pos_weight[c] : 0.0;
        wneg.at(0, c) = y[c] ? 0.0 : 1.0;
    }
    Tape::Id pos = tape.sum_all(tape.mul(tape.leaf(wpos), tape.log_sigmoid(logits)));
    Tape::Id neg = tape.sum_all(tape.mul(tape.leaf(wneg), tape.log_one_minus_sigmoid(logits)));
    return tape.affine(tape.add(pos, neg), -1.0 / c_count, 0.0);
}

Tape::Id e2e_loss(Tape& tape, Tape::Id cls_loss, Tape::Id hier_loss, int epoch, int total_epochs) {
    if (total_epochs < 1) throw config_error("e2e_loss: total_epochs must be >= 1");
    if (epoch < 0 || epoch > total_epochs)
        throw domain_error("e2e_loss: epoch outside [0, total_epochs]");
    double alpha = 2.0 - static_cast<double>(epoch) / static_cast<double>(total_epochs);
    return tape.add(cls_loss, tape.affine(hier_loss, alpha, 0.0));
}

Prediction predict(ClassifierParams& params, const ClassifierInput& input,
                   const ClassifierConfig& cfg, double threshold) {
    Tape tape;
    Tape::Id logits = classifier_logits(tape, params, input, cfg);
    const Tensor& lv = tape.value(logits);
    Prediction pred;
    pred.probabilities.resize(lv.cols);
    pred.labels.resize(lv.cols);
    for (int c = 0; c < lv.cols; ++c) {
        double p = 1.0 / (1.0 + std::exp(-lv.at(0, c)));
        pred.probabilities[c] = p;
        pred.labels[c] = p >= threshold ? 1 : 0;
    }
    return pred;
}

}  // namespace timegraphs
