#include "timegraphs/training.hpp"

#include <algorithm>
#include <cmath>

#include "timegraphs/adam.hpp"
#include "timegraphs/builder.hpp"
#include "timegraphs/checkpoint.hpp"
#include "timegraphs/error.hpp"
#include "timegraphs/metrics.hpp"
#include "timegraphs/rng.hpp"

namespace timegraphs {

namespace {

NamedParams named_event_params(EventModelParams& p) {
    NamedParams np;
    p.visit("event", [&np](const std::string& name, Tensor& t) { np.add(name, t); });
    return np;
}

NamedParams named_classifier_params(ClassifierParams& p) {
    NamedParams np;
    p.visit("cls", [&np](const std::string& name, Tensor& t) { np.add(name, t); });
    return np;
}

nlohmann::json model_cfg_to_json(const EventModelConfig& c) {
    return {{"feature_dim", c.feature_dim},       {"embed_dim", c.embed_dim},
            {"radius", c.radius},                 {"pool_ratio", c.pool_ratio},
            {"scales", c.scales},                 {"negative_samples", c.negative_samples},
            {"exclude_center", c.exclude_center}};
}

EventModelConfig model_cfg_from_json(const nlohmann::json& j) {
    EventModelConfig c;
    c.feature_dim = j.at("feature_dim").get<int>();
    c.embed_dim = j.at("embed_dim").get<int>();
    c.radius = j.at("radius").get<int>();
    c.pool_ratio = j.at("pool_ratio").get<double>();
    c.scales = j.at("scales").get<int>();
    c.negative_samples = j.at("negative_samples").get<int>();
    c.exclude_center = j.at("exclude_center").get<bool>();
    return c;
}

double macro_f1_on(ModelBundle& bundle, const std::vector<ClassifierInput>& inputs,
                   const std::vector<const std::vector<int>*>& labels) {
    BinaryMatrix preds, truth;
    for (size_t i = 0; i < inputs.size(); ++i) {
        Prediction p = predict(bundle.classifier, inputs[i], bundle.cls_cfg,
                               bundle.cls_cfg.threshold);
        preds.push_back(p.labels);
        truth.push_back(*labels[i]);
    }
    return macro_prf(preds, truth).f1;
}

std::vector<std::vector<int>> batches_of(std::vector<int>& order, int batch_size, Rng& rng) {
    rng.shuffle(order);
    std::vector<std::vector<int>> batches;
    for (size_t at = 0; at < order.size(); at += batch_size) {
        size_t end = std::min(order.size(), at + batch_size);
        batches.emplace_back(order.begin() + at, order.begin() + end);
    }
    return batches;
}

}  // namespace

std::vector<PreparedWindow> prepare_windows(const Dataset& dataset, const RunConfig& cfg) {
    std::vector<PreparedWindow> out;
    BuilderConfig builder_cfg = cfg.builder();
    for (const auto& seq : dataset.sequences) {
        auto windows = slice_windows(seq, dataset.categories, cfg.window_frames,
                                     cfg.window_stride, cfg.window_future_offset,
                                     cfg.window_growing);
        for (auto& w : windows) {
            PreparedWindow pw;
            pw.level0 = build_level0(w.snapshots, builder_cfg);
            pw.base = level_view(pw.level0, 0);
            pw.label = std::move(w.label);
            out.push_back(std::move(pw));
        }
    }
    return out;
}

nlohmann::json ModelBundle::to_json() const {
    ModelBundle& self = const_cast<ModelBundle&>(*this);
    nlohmann::json j;
    j["format_version"] = 1;
    j["kind"] = "model_bundle";
    j["has_event"] = has_event;
    j["model_config"] = model_cfg_to_json(model_cfg);
    j["hierarchy_config"] = {{"levels", hier_cfg.levels},
                             {"pool_ratio", hier_cfg.pool_ratio},
                             {"aggregation", to_string(hier_cfg.aggregation)},
                             {"radius", hier_cfg.radius}};
    j["classifier_config"] = {{"layers", cls_cfg.layers},
                              {"hidden_dim", cls_cfg.hidden_dim},
                              {"input_dim", cls_cfg.input_dim},
                              {"level_count", cls_cfg.level_count},
                              {"num_categories", cls_cfg.num_categories},
                              {"threshold", cls_cfg.threshold},
                              {"no_temporal", cls_cfg.no_temporal}};
    j["label_space"] = {{"categories", labels.categories}, {"pos_weight", labels.pos_weight}};
    j["ablation"] = ablation;
    j["config_hash"] = config_hash;
    if (has_event) j["event_params"] = params_to_json(named_event_params(self.event));
    j["classifier_params"] = params_to_json(named_classifier_params(self.classifier));
    return j;
}

ModelBundle ModelBundle::from_json(const nlohmann::json& j) {
    if (!j.contains("format_version") || j.at("format_version").get<int>() != 1)
        throw schema_error("model bundle: unsupported or missing format_version");
    if (j.at("kind").get<std::string>() != "model_bundle")
        throw schema_error("model bundle: wrong checkpoint kind");
    ModelBundle b;
    b.has_event = j.at("has_event").get<bool>();
    b.model_cfg = model_cfg_from_json(j.at("model_config"));
    const auto& hj = j.at("hierarchy_config");
    b.hier_cfg.levels = hj.at("levels").get<int>();
    b.hier_cfg.pool_ratio = hj.at("pool_ratio").get<std::vector<double>>();
    b.hier_cfg.aggregation = aggregation_from_string(hj.at("aggregation").get<std::string>());
    b.hier_cfg.radius = hj.at("radius").get<int>();
    const auto& cj = j.at("classifier_config");
    b.cls_cfg.layers = cj.at("layers").get<int>();
    b.cls_cfg.hidden_dim = cj.at("hidden_dim").get<int>();
    b.cls_cfg.input_dim = cj.at("input_dim").get<int>();
    b.cls_cfg.level_count = cj.at("level_count").get<int>();
    b.cls_cfg.num_categories = cj.at("num_categories").get<int>();
    b.cls_cfg.threshold = cj.at("threshold").get<double>();
    b.cls_cfg.no_temporal = cj.at("no_temporal").get<bool>();
    b.labels.categories = j.at("label_space").at("categories").get<std::vector<std::string>>();
    b.labels.pos_weight = j.at("label_space").at("pos_weight").get<std::vector<double>>();
    b.ablation = j.at("ablation").get<std::string>();
    b.config_hash = j.at("config_hash").get<std::string>();

    Rng rng(0);  // shapes only; values overwritten below
    if (b.has_event) {
        b.event = init_event_model(b.model_cfg, rng);
        params_from_json(j.at("event_params"), named_event_params(b.event));
    }
    b.classifier = init_classifier(b.cls_cfg, rng);
    params_from_json(j.at("classifier_params"), named_classifier_params(b.classifier));
    return b;
}

nlohmann::json EventCheckpoint::to_json() const {
    EventCheckpoint& self = const_cast<EventCheckpoint&>(*this);
    return {{"format_version", 1},
            {"kind", "event_model"},
            {"model_config", model_cfg_to_json(cfg)},
            {"params", params_to_json(named_event_params(self.params))},
            {"config_hash", config_hash}};
}

EventCheckpoint EventCheckpoint::from_json(const nlohmann::json& j) {
    if (!j.contains("format_version") || j.at("format_version").get<int>() != 1)
        throw schema_error("event checkpoint: unsupported or missing format_version");
    if (j.at("kind").get<std::string>() != "event_model")
        throw schema_error("event checkpoint: wrong checkpoint kind");
    EventCheckpoint ck;
    ck.cfg = model_cfg_from_json(j.at("model_config"));
    Rng rng(0);
    ck.params = init_event_model(ck.cfg, rng);
    params_from_json(j.at("params"), named_event_params(ck.params));
    ck.config_hash = j.at("config_hash").get<std::string>();
    return ck;
}

EventCheckpoint pretrain_event_model(const std::vector<PreparedWindow>& train,
                                     const RunConfig& cfg, const LogSink& log) {
    if (train.empty()) throw domain_error("pretrain: no training windows");
    int feature_dim = train.front().base.features.cols;
    EventModelConfig mc = cfg.event_model(feature_dim);
    Rng rng(cfg.seed ^ 0xE7E7E7ULL);
    EventModelParams params = init_event_model(mc, rng);
    std::vector<double> ratios(mc.scales, mc.pool_ratio);

    OptimConfig opt = cfg.pretrain_optimizer();
    Adam adam(AdamConfig{opt.lr, 0.9, 0.999, 1e-8});
    std::vector<int> order(train.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

    for (int epoch = 0; epoch < opt.epochs; ++epoch) {
        double lr_scale = multi_step_lr_scale(epoch, opt.epochs, opt.milestones, opt.decay);
        double epoch_loss = 0.0;
        int batches = 0;
        for (const auto& batch : batches_of(order, opt.batch_size, rng)) {
            Tape tape;
            Tape::Id loss = -1;
            for (int idx : batch) {
                PyramidResult pr = pyramid_forward(tape, params, train[idx].base, ratios, mc, &rng);
                loss = (loss < 0) ? pr.loss : tape.add(loss, pr.loss);
            }
            loss = tape.affine(loss, 1.0 / static_cast<double>(batch.size()), 0.0);
            tape.backward(loss);
            adam.step(tape.param_grads(), lr_scale);
            epoch_loss += tape.value(loss).item();
            ++batches;
        }
        log({{"event", "pretrain_epoch"},
             {"epoch", epoch},
             {"loss", epoch_loss / std::max(1, batches)},
             {"lr_scale", lr_scale}});
    }

    EventCheckpoint ck;
    ck.params = std::move(params);
    ck.cfg = mc;
    ck.config_hash = cfg.hash();
    return ck;
}

ClassifierInput input_for(const ModelBundle& bundle, const PreparedWindow& window) {
    if (bundle.has_event && bundle.hier_cfg.levels > 0) {
        TemporalKnowledgeGraph full =
            build_hierarchy(window.level0, bundle.event, bundle.model_cfg, bundle.hier_cfg);
        return assemble_input(full, bundle.cls_cfg.level_count, bundle.cls_cfg.no_temporal);
    }
    return assemble_input(window.level0, bundle.cls_cfg.level_count, bundle.cls_cfg.no_temporal);
}

Prediction bundle_predict(ModelBundle& bundle, const PreparedWindow& window) {
    ClassifierInput input = input_for(bundle, window);
    return predict(bundle.classifier, input, bundle.cls_cfg, bundle.cls_cfg.threshold);
}

ModelBundle train_two_phase(const std::vector<PreparedWindow>& train,
                            const std::vector<PreparedWindow>& val,
                            const std::optional<EventCheckpoint>& event,
                            const std::vector<std::string>& categories, const RunConfig& cfg,
                            const LogSink& log) {
    if (train.empty()) throw domain_error("train: no training windows");
    if (!event.has_value() && cfg.ablation != "no-supernodes")
        throw config_error("train: an event checkpoint is required unless ablation=no-supernodes");

    int feature_dim = train.front().base.features.cols;
    ModelBundle bundle;
    bundle.ablation = cfg.ablation;
    bundle.config_hash = cfg.hash();
    bundle.model_cfg = event.has_value() ? event->cfg : cfg.event_model(feature_dim);
    bundle.hier_cfg = cfg.hierarchy();
    bundle.cls_cfg = cfg.classifier(feature_dim, static_cast<int>(categories.size()));
    if (event.has_value()) {
        bundle.has_event = true;
        bundle.event = event->params;
        if (bundle.model_cfg.feature_dim != feature_dim)
            throw schema_error("train: event checkpoint feature_dim mismatch");
    }

    std::vector<std::vector<int>> train_labels;
    for (const auto& w : train) train_labels.push_back(w.label);
    bundle.labels = make_label_space(categories, train_labels);

    Rng rng(cfg.seed ^ 0xC1A551F1ULL);
    bundle.classifier = init_classifier(bundle.cls_cfg, rng);

    // The event model is frozen here, so hierarchy construction and input
    // assembly happen once per window.
    std::vector<ClassifierInput> train_inputs, val_inputs;
    std::vector<const std::vector<int>*> val_labels;
    for (const auto& w : train) train_inputs.push_back(input_for(bundle, w));
    for (const auto& w : val) {
        val_inputs.push_back(input_for(bundle, w));
        val_labels.push_back(&w.label);
    }

    OptimConfig opt = cfg.optimizer();
    Adam adam(AdamConfig{opt.lr, 0.9, 0.999, 1e-8});
    std::vector<int> order(train.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

    ClassifierParams best = bundle.classifier;
    double best_f1 = -1.0;
    int stale = 0;
    for (int epoch = 0; epoch < opt.epochs; ++epoch) {
        double lr_scale = multi_step_lr_scale(epoch, opt.epochs, opt.milestones, opt.decay);
        double epoch_loss = 0.0;
        int batches = 0;
        for (const auto& batch : batches_of(order, opt.batch_size, rng)) {
            Tape tape;
            Tape::Id loss = -1;
            for (int idx : batch) {
                Tape::Id logits =
                    classifier_logits(tape, bundle.classifier, train_inputs[idx], bundle.cls_cfg);
                Tape::Id l = classification_loss(tape, logits, train[idx].label, bundle.labels);
                loss = (loss < 0) ? l : tape.add(loss, l);
            }
            loss = tape.affine(loss, 1.0 / static_cast<double>(batch.size()), 0.0);
            tape.backward(loss);
            adam.step(tape.param_grads(), lr_scale);
            epoch_loss += tape.value(loss).item();
            ++batches;
        }
        double val_f1 = val_inputs.empty() ? -1.0 : macro_f1_on(bundle, val_inputs, val_labels);
        if (val_f1 > best_f1) {
            best_f1 = val_f1;
            best = bundle.classifier;
            stale = 0;
        } else {
            ++stale;
        }
        log({{"event", "train_epoch"},
             {"epoch", epoch},
             {"loss", epoch_loss / std::max(1, batches)},
             {"val_f1", val_f1},
             {"lr_scale", lr_scale}});
        if (stale >= opt.patience) break;
    }
    if (best_f1 >= 0.0) bundle.classifier = best;
    return bundle;
}

ModelBundle train_e2e(const std::vector<PreparedWindow>& train,
                      const std::vector<PreparedWindow>& val,
                      const std::vector<std::string>& categories, const RunConfig& cfg,
                      const LogSink& log) {
    if (train.empty()) throw domain_error("e2e: no training windows");
    int feature_dim = train.front().base.features.cols;

    ModelBundle bundle;
    bundle.has_event = true;
    bundle.ablation = cfg.ablation;
    bundle.config_hash = cfg.hash();
    bundle.model_cfg = cfg.event_model(feature_dim);
    bundle.hier_cfg = cfg.hierarchy();
    bundle.cls_cfg = cfg.classifier(feature_dim, static_cast<int>(categories.size()));

    std::vector<std::vector<int>> train_labels;
    for (const auto& w : train) train_labels.push_back(w.label);
    bundle.labels = make_label_space(categories, train_labels);

    Rng rng(cfg.seed ^ 0xE2E0001ULL);
    bundle.event = init_event_model(bundle.model_cfg, rng);
    bundle.classifier = init_classifier(bundle.cls_cfg, rng);
    std::vector<double> ratios(bundle.model_cfg.scales, bundle.model_cfg.pool_ratio);

    OptimConfig opt = cfg.optimizer();
    Adam adam(AdamConfig{opt.lr, 0.9, 0.999, 1e-8});
    std::vector<int> order(train.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

    EventModelParams best_event = bundle.event;
    ClassifierParams best_cls = bundle.classifier;
    double best_f1 = -1.0;
    int stale = 0;
    for (int epoch = 0; epoch < opt.epochs; ++epoch) {
        double lr_scale = multi_step_lr_scale(epoch, opt.epochs, opt.milestones, opt.decay);
        double epoch_loss = 0.0;
        int batches = 0;
        for (const auto& batch : batches_of(order, opt.batch_size, rng)) {
            Tape tape;
            Tape::Id loss = -1;
            for (int idx : batch) {
                // Hierarchy construction is a hard selection; the classifier
                // sees it as fixed structure while pyramid losses carry the
                // event-model gradient.
                ClassifierInput input = input_for(bundle, train[idx]);
                Tape::Id logits = classifier_logits(tape, bundle.classifier, input, bundle.cls_cfg);
                Tape::Id cls_l = classification_loss(tape, logits, train[idx].label, bundle.labels);
                PyramidResult pr =
                    pyramid_forward(tape, bundle.event, train[idx].base, ratios, bundle.model_cfg, &rng);
                Tape::Id l = e2e_loss(tape, cls_l, pr.loss, epoch, opt.epochs);
                loss = (loss < 0) ? l : tape.add(loss, l);
            }
            loss = tape.affine(loss, 1.0 / static_cast<double>(batch.size()), 0.0);
            tape.backward(loss);
            adam.step(tape.param_grads(), lr_scale);
            epoch_loss += tape.value(loss).item();
            ++batches;
        }
        double val_f1 = -1.0;
        if (!val.empty()) {
            std::vector<ClassifierInput> val_inputs;
            std::vector<const std::vector<int>*> val_labels;
            for (const auto& w : val) {
                val_inputs.push_back(input_for(bundle, w));
                val_labels.push_back(&w.label);
            }
            val_f1 = macro_f1_on(bundle, val_inputs, val_labels);
        }
        if (val_f1 > best_f1) {
            best_f1 = val_f1;
            best_event = bundle.event;
            best_cls = bundle.classifier;
            stale = 0;
        } else {
            ++stale;
        }
        log({{"event", "e2e_epoch"},
             {"epoch", epoch},
             {"loss", epoch_loss / std::max(1, batches)},
             {"val_f1", val_f1},
             {"alpha", 2.0 - static_cast<double>(epoch) / opt.epochs},
             {"lr_scale", lr_scale}});
        if (stale >= opt.patience) break;
    }
    if (best_f1 >= 0.0) {
        bundle.event = best_event;
        bundle.classifier = best_cls;
    }
    return bundle;
}

}  // namespace timegraphs
