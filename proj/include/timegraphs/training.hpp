#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "timegraphs/classifier.hpp"
#include "timegraphs/config.hpp"
#include "timegraphs/dataset.hpp"
#include "timegraphs/event_model.hpp"
#include "timegraphs/hierarchy.hpp"
#include "timegraphs/level_graph.hpp"
#include "timegraphs/tkg.hpp"

namespace timegraphs {

// Structured log lines (one JSON object per event).
using LogSink = std::function<void(const nlohmann::json&)>;
inline LogSink null_sink() {
    return [](const nlohmann::json&) {};
}

// A window with its level-0 graph prebuilt.
struct PreparedWindow {
    TemporalKnowledgeGraph level0;
    LevelGraph base;
    std::vector<int> label;
};

std::vector<PreparedWindow> prepare_windows(const Dataset& dataset, const RunConfig& cfg);

// Everything needed to run inference: the event model (absent for the flat
// ablation), classifier, label space, and the configs they were built with.
struct ModelBundle {
    bool has_event = false;
    EventModelParams event;
    ClassifierParams classifier;
    LabelSpace labels;
    EventModelConfig model_cfg;
    HierarchyConfig hier_cfg;
    ClassifierConfig cls_cfg;
    std::string ablation = "none";
    std::string config_hash;

    nlohmann::json to_json() const;
    static ModelBundle from_json(const nlohmann::json& j);
};

// Event-model checkpoint, the output of the pretraining phase.
struct EventCheckpoint {
    EventModelParams params;
    EventModelConfig cfg;
    std::string config_hash;

    nlohmann::json to_json() const;
    static EventCheckpoint from_json(const nlohmann::json& j);
};

// Phase 1: self-supervised pyramid training on the level-0 graphs.
EventCheckpoint pretrain_event_model(const std::vector<PreparedWindow>& train,
                                     const RunConfig& cfg, const LogSink& log);

// Phase 2: hierarchy construction with the frozen event model, then
// classifier training. Passing no event checkpoint requires the
// no-supernodes ablation (the flat RGCN arm). Checkpoint selection follows
// the best validation F1 with early stopping on `patience` stale epochs.
ModelBundle train_two_phase(const std::vector<PreparedWindow>& train,
                            const std::vector<PreparedWindow>& val,
                            const std::optional<EventCheckpoint>& event,
                            const std::vector<std::string>& categories, const RunConfig& cfg,
                            const LogSink& log);

// Joint training with the decaying alpha weight; never reads a pretrained
// checkpoint.
ModelBundle train_e2e(const std::vector<PreparedWindow>& train,
                      const std::vector<PreparedWindow>& val,
                      const std::vector<std::string>& categories, const RunConfig& cfg,
                      const LogSink& log);

// Hierarchy construction + input assembly as the bundle prescribes.
ClassifierInput input_for(const ModelBundle& bundle, const PreparedWindow& window);
Prediction bundle_predict(ModelBundle& bundle, const PreparedWindow& window);

}  // namespace timegraphs
