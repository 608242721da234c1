#include "timegraphs/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>

#include "timegraphs/checkpoint.hpp"
#include "timegraphs/error.hpp"

extern char** environ;

namespace timegraphs {

namespace {

// Field table keeps to/from JSON, env overrides, and strict validation in
// one place.
template <typename Fn>
void for_each_field(RunConfig& c, Fn&& fn) {
    fn("seed", c.seed);
    fn("builder_bridge_gaps", c.builder_bridge_gaps);
    fn("model_embed_dim", c.model_embed_dim);
    fn("model_radius", c.model_radius);
    fn("model_pool_ratio", c.model_pool_ratio);
    fn("model_scales", c.model_scales);
    fn("model_negative_samples", c.model_negative_samples);
    fn("hierarchy_levels", c.hierarchy_levels);
    fn("hierarchy_aggregation", c.hierarchy_aggregation);
    fn("classifier_layers", c.classifier_layers);
    fn("classifier_hidden_dim", c.classifier_hidden_dim);
    fn("classifier_threshold", c.classifier_threshold);
    fn("optimizer_lr", c.optimizer_lr);
    fn("optimizer_batch_size", c.optimizer_batch_size);
    fn("optimizer_epochs", c.optimizer_epochs);
    fn("optimizer_pretrain_epochs", c.optimizer_pretrain_epochs);
    fn("optimizer_milestones", c.optimizer_milestones);
    fn("optimizer_decay", c.optimizer_decay);
    fn("optimizer_patience", c.optimizer_patience);
    fn("window_frames", c.window_frames);
    fn("window_stride", c.window_stride);
    fn("window_future_offset", c.window_future_offset);
    fn("window_growing", c.window_growing);
    fn("split_ratios", c.split_ratios);
    fn("label_categories", c.label_categories);
    fn("ablation", c.ablation);
    fn("sim_sequences", c.sim_sequences);
    fn("sim_frames", c.sim_frames);
    fn("sim_agents", c.sim_agents);
    fn("sim_arena", c.sim_arena);
    fn("sim_proximity", c.sim_proximity);
    fn("sim_frame_rate", c.sim_frame_rate);
    fn("sim_event_duration", c.sim_event_duration);
    fn("sim_composite_fraction", c.sim_composite_fraction);
    fn("sim_composite_horizon", c.sim_composite_horizon);
    fn("sim_min_prevalence", c.sim_min_prevalence);
    fn("sim_max_prevalence", c.sim_max_prevalence);
}

}  // namespace

nlohmann::json RunConfig::to_json() const {
    nlohmann::json j;
    RunConfig& self = const_cast<RunConfig&>(*this);
    for_each_field(self, [&j](const char* key, auto& field) { j[key] = field; });
    return j;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw config_error("config must be a JSON object");
    RunConfig c;
    std::vector<std::string> known;
    for_each_field(c, [&](const char* key, auto& field) {
        known.push_back(key);
        if (j.contains(key)) {
            try {
                field = j.at(key).get<std::decay_t<decltype(field)>>();
            } catch (const nlohmann::json::exception& e) {
                throw config_error(std::string("config key \"") + key + "\": " + e.what());
            }
        }
    });
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
            throw config_error("unknown config key: " + it.key());
    }
    c.validate();
    return c;
}

void RunConfig::apply_env_overrides() {
    const std::string prefix = "TIMEGRAPHS_";
    for (char** env = environ; *env != nullptr; ++env) {
        std::string entry(*env);
        auto eq = entry.find('=');
        if (eq == std::string::npos) continue;
        std::string key = entry.substr(0, eq);
        if (key.rfind(prefix, 0) != 0) continue;
        std::string name = key.substr(prefix.size());
        for (auto& ch : name) ch = static_cast<char>(std::tolower(ch));
        std::string value = entry.substr(eq + 1);
        bool found = false;
        for_each_field(*this, [&](const char* fkey, auto& field) {
            if (name != fkey) return;
            found = true;
            nlohmann::json parsed;
            try {
                parsed = nlohmann::json::parse(value);
            } catch (const nlohmann::json::exception&) {
                parsed = value;  // bare strings are taken literally
            }
            try {
                field = parsed.get<std::decay_t<decltype(field)>>();
            } catch (const nlohmann::json::exception& e) {
                throw config_error("env override " + key + ": " + e.what());
            }
        });
        if (!found) throw config_error("env override for unknown config key: " + key);
    }
    validate();
}

std::string RunConfig::hash() const { return json_fingerprint(to_json()); }

BuilderConfig RunConfig::builder() const { return BuilderConfig{builder_bridge_gaps}; }

EventModelConfig RunConfig::event_model(int feature_dim) const {
    EventModelConfig cfg;
    cfg.feature_dim = feature_dim;
    cfg.embed_dim = model_embed_dim;
    cfg.radius = model_radius;
    cfg.pool_ratio = model_pool_ratio;
    cfg.scales = model_scales;
    cfg.negative_samples = model_negative_samples;
    return cfg;
}

HierarchyConfig RunConfig::hierarchy() const {
    HierarchyConfig cfg;
    cfg.levels = ablation == "no-supernodes" ? 0 : hierarchy_levels;
    cfg.pool_ratio = {model_pool_ratio};
    cfg.aggregation = aggregation_from_string(hierarchy_aggregation);
    cfg.radius = model_radius;
    return cfg;
}

ClassifierConfig RunConfig::classifier(int feature_dim, int num_categories) const {
    ClassifierConfig cfg;
    cfg.layers = classifier_layers;
    cfg.hidden_dim = classifier_hidden_dim;
    cfg.level_count = (ablation == "no-supernodes" ? 0 : hierarchy_levels) + 1;
    cfg.input_dim = feature_dim + 1 + cfg.level_count;
    cfg.num_categories = num_categories;
    cfg.threshold = classifier_threshold;
    cfg.no_temporal = ablation == "no-temporal";
    return cfg;
}

OptimConfig RunConfig::optimizer() const {
    return OptimConfig{optimizer_lr,        optimizer_batch_size, optimizer_epochs,
                       optimizer_milestones, optimizer_decay,      optimizer_patience};
}

OptimConfig RunConfig::pretrain_optimizer() const {
    OptimConfig cfg = optimizer();
    cfg.epochs = optimizer_pretrain_epochs;
    return cfg;
}

SimConfig RunConfig::simulator() const {
    SimConfig cfg;
    cfg.sequences = sim_sequences;
    cfg.frames = sim_frames;
    cfg.agents = sim_agents;
    cfg.arena = sim_arena;
    cfg.proximity = sim_proximity;
    cfg.frame_rate = sim_frame_rate;
    cfg.seed = seed;
    cfg.event_duration = sim_event_duration;
    cfg.composite_fraction = sim_composite_fraction;
    cfg.composite_horizon = sim_composite_horizon;
    cfg.min_prevalence = sim_min_prevalence;
    cfg.max_prevalence = sim_max_prevalence;
    return cfg;
}

void RunConfig::validate() const {
    if (model_embed_dim < 1) throw config_error("model_embed_dim must be >= 1");
    if (model_radius < 0) throw config_error("model_radius must be >= 0");
    if (model_pool_ratio <= 0.0 || model_pool_ratio >= 1.0)
        throw config_error("model_pool_ratio must be in (0,1)");
    if (model_scales < 1) throw config_error("model_scales must be >= 1");
    if (hierarchy_levels < 0) throw config_error("hierarchy_levels must be >= 0");
    aggregation_from_string(hierarchy_aggregation);
    if (classifier_layers < 0) throw config_error("classifier_layers must be >= 0");
    if (classifier_hidden_dim < 1) throw config_error("classifier_hidden_dim must be >= 1");
    if (classifier_threshold < 0.0 || classifier_threshold > 1.0)
        throw config_error("classifier_threshold must be in [0,1]");
    if (optimizer_lr <= 0.0) throw config_error("optimizer_lr must be positive");
    if (optimizer_batch_size < 1) throw config_error("optimizer_batch_size must be >= 1");
    if (optimizer_epochs < 1) throw config_error("optimizer_epochs must be >= 1");
    if (optimizer_pretrain_epochs < 1) throw config_error("optimizer_pretrain_epochs must be >= 1");
    if (optimizer_decay <= 0.0 || optimizer_decay > 1.0)
        throw config_error("optimizer_decay must be in (0,1]");
    if (window_frames < 1) throw config_error("window_frames must be >= 1");
    if (window_stride < 1) throw config_error("window_stride must be >= 1");
    if (window_future_offset < 0) throw config_error("window_future_offset must be >= 0");
    double ratio_sum = split_ratios[0] + split_ratios[1] + split_ratios[2];
    if (std::abs(ratio_sum - 1.0) > 1e-9) throw config_error("split_ratios must sum to 1");
    if (ablation != "none" && ablation != "no-supernodes" && ablation != "no-temporal")
        throw config_error("ablation must be none, no-supernodes, or no-temporal");
    if (sim_composite_horizon > window_frames && !window_growing)
        throw config_error("sim_composite_horizon must be <= window_frames");
    if (sim_min_prevalence < 0.0 || sim_max_prevalence > 1.0 ||
        sim_min_prevalence >= sim_max_prevalence)
        throw config_error("simulator prevalence bounds invalid");
}

}  // namespace timegraphs
