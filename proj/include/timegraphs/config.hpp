#pragma once

#include <array>
#include <string>
#include <vector>

#include <json.hpp>

#include "timegraphs/builder.hpp"
#include "timegraphs/classifier.hpp"
#include "timegraphs/event_model.hpp"
#include "timegraphs/hierarchy.hpp"
#include "timegraphs/simulator.hpp"

namespace timegraphs {

struct OptimConfig {
    double lr = 0.001;
    int batch_size = 32;
    int epochs = 10;
    std::vector<double> milestones{0.5, 0.75};
    double decay = 0.5;
    int patience = 10;
};

// One flat document drives every command. Keys are snake_case and validated
// strictly: unknown keys are rejected, values are type-checked.
struct RunConfig {
    uint64_t seed = 1;

    // builder
    bool builder_bridge_gaps = false;

    // event model
    int model_embed_dim = 32;
    int model_radius = 1;
    double model_pool_ratio = 0.5;
    int model_scales = 2;
    int model_negative_samples = 0;

    // hierarchy
    int hierarchy_levels = 2;
    std::string hierarchy_aggregation = "mean";

    // classifier
    int classifier_layers = 2;
    int classifier_hidden_dim = 64;
    double classifier_threshold = 0.5;

    // optimizer
    double optimizer_lr = 0.001;
    int optimizer_batch_size = 32;
    int optimizer_epochs = 12;
    int optimizer_pretrain_epochs = 4;
    std::vector<double> optimizer_milestones{0.5, 0.75};
    double optimizer_decay = 0.5;
    int optimizer_patience = 10;

    // windowing
    int window_frames = 16;
    int window_stride = 16;
    int window_future_offset = 0;
    bool window_growing = false;

    // split
    std::array<double, 3> split_ratios{0.7, 0.2, 0.1};

    // labels; empty = derive from the label file
    std::vector<std::string> label_categories;

    // ablation: none | no-supernodes | no-temporal
    std::string ablation = "none";

    // simulator
    int sim_sequences = 100;
    int sim_frames = 16;
    int sim_agents = 5;
    double sim_arena = 10.0;
    double sim_proximity = 3.0;
    double sim_frame_rate = 2.0;
    int sim_event_duration = 5;
    double sim_composite_fraction = 0.5;
    int sim_composite_horizon = 12;
    double sim_min_prevalence = 0.005;
    double sim_max_prevalence = 0.6;

    nlohmann::json to_json() const;
    static RunConfig from_json(const nlohmann::json& j);

    // Environment overrides: TIMEGRAPHS_<KEY>=<json value>.
    void apply_env_overrides();

    std::string hash() const;

    // Structured views per module.
    BuilderConfig builder() const;
    EventModelConfig event_model(int feature_dim) const;
    HierarchyConfig hierarchy() const;
    ClassifierConfig classifier(int feature_dim, int num_categories) const;
    OptimConfig optimizer() const;
    OptimConfig pretrain_optimizer() const;
    SimConfig simulator() const;

    void validate() const;
};

}  // namespace timegraphs
