#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "timegraphs/dataset.hpp"

namespace timegraphs {

// Multi-agent simulator with planted events. Agents (plus one ball entity)
// move in a square arena; spatial edges connect entities within the
// proximity threshold. Each sequence carries either one scripted primitive
// near its end, or an ordered pair of primitives separated by a wander gap;
// composite labels fire on the second event's frames only when the first
// completed within the horizon, so recognizing them requires ordered
// long-range evidence.
struct SimConfig {
    int sequences = 100;
    int frames = 16;
    int agents = 5;  // ball entity added on top
    double arena = 10.0;
    double proximity = 3.0;
    double frame_rate = 2.0;  // frames per second
    uint64_t seed = 1;
    int event_duration = 5;         // frames per primitive episode
    double composite_fraction = 0.5;
    int composite_horizon = 12;     // max frames between first event end and second event
    std::vector<std::string> primitives{"converge", "disperse", "pass", "chase"};
    std::vector<std::pair<std::string, std::string>> composites{
        {"converge", "disperse"}, {"disperse", "converge"}, {"pass", "chase"}, {"chase", "pass"}};
    double min_prevalence = 0.005;  // per-category fraction of labeled frames
    double max_prevalence = 0.60;
    int max_resample = 20;

    std::vector<std::string> categories() const;  // primitives + "a+b" composites
};

// Fixed episode layout, exposed so trajectory-level checks can locate the
// planted events: the closing episode spans the last event_duration frames;
// a composite's first episode starts at frame 1.
struct EpisodePlan {
    std::string first;   // empty for single-primitive sequences
    std::string second;  // the closing episode
    int first_start = 0, first_end = 0;    // [start, end)
    int second_start = 0, second_end = 0;
};

EpisodePlan plan_for_sequence(const SimConfig& cfg, int seq_index);

Dataset simulate(const SimConfig& cfg);

nlohmann::json sim_manifest(const SimConfig& cfg);

}  // namespace timegraphs
