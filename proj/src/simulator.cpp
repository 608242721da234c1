#include "timegraphs/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "timegraphs/checkpoint.hpp"
#include "timegraphs/error.hpp"
#include "timegraphs/rng.hpp"

namespace timegraphs {

namespace {

struct Vec2 {
    double x = 0.0, y = 0.0;
};

Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
Vec2 operator*(Vec2 a, double s) { return {a.x * s, a.y * s}; }
double norm(Vec2 a) { return std::sqrt(a.x * a.x + a.y * a.y); }
Vec2 unit(Vec2 a) {
    double n = norm(a);
    return n > 1e-9 ? Vec2{a.x / n, a.y / n} : Vec2{0.0, 0.0};
}

struct SimState {
    std::vector<Vec2> pos, vel;  // agents
    std::vector<Vec2> waypoint;
    Vec2 ball_pos, ball_vel;
    int carrier = 0;
};

struct Episode {
    std::string kind;
    int start = 0, end = 0;
    Vec2 target;        // converge point
    int actor_a = 0;    // passer / chaser
    int actor_b = 1;    // receiver / chased
};

double mean_pairwise_distance(const std::vector<Vec2>& pos) {
    double sum = 0.0;
    int count = 0;
    for (size_t i = 0; i < pos.size(); ++i)
        for (size_t j = i + 1; j < pos.size(); ++j) {
            sum += norm(pos[i] - pos[j]);
            ++count;
        }
    return count > 0 ? sum / count : 0.0;
}

struct Trace {
    std::vector<std::vector<Vec2>> agent_pos;  // per frame
    std::vector<Vec2> ball_pos;
    std::vector<std::vector<Vec2>> agent_vel;
};

}  // namespace

std::vector<std::string> SimConfig::categories() const {
    std::vector<std::string> cats = primitives;
    for (const auto& [a, b] : composites) cats.push_back(a + "+" + b);
    return cats;
}

EpisodePlan plan_for_sequence(const SimConfig& cfg, int seq_index) {
    EpisodePlan plan;
    int d = cfg.event_duration;
    plan.second_start = cfg.frames - d;
    plan.second_end = cfg.frames;
    int n_composite = static_cast<int>(std::lround(cfg.composite_fraction * cfg.sequences));
    if (seq_index < n_composite && !cfg.composites.empty()) {
        const auto& pair = cfg.composites[seq_index % cfg.composites.size()];
        plan.first = pair.first;
        plan.second = pair.second;
        plan.first_start = 1;
        plan.first_end = 1 + d;
    } else {
        plan.second = cfg.primitives[(seq_index - n_composite) % cfg.primitives.size()];
    }
    return plan;
}

namespace {

Sequence generate_sequence(const SimConfig& cfg, const EpisodePlan& plan, Rng& rng,
                           Trace* trace) {
    double dt = 1.0 / cfg.frame_rate;
    double s0 = cfg.arena / 8.0;   // cruise speed, units per second
    double vmax = 3.0 * s0;
    double wall = 0.3;

    SimState st;
    st.pos.resize(cfg.agents);
    st.vel.assign(cfg.agents, {});
    st.waypoint.resize(cfg.agents);
    for (int a = 0; a < cfg.agents; ++a) {
        st.pos[a] = {rng.uniform(1.0, cfg.arena - 1.0), rng.uniform(1.0, cfg.arena - 1.0)};
        st.waypoint[a] = {rng.uniform(1.0, cfg.arena - 1.0), rng.uniform(1.0, cfg.arena - 1.0)};
    }
    st.carrier = rng.uniform_int(0, cfg.agents - 1);
    st.ball_pos = st.pos[st.carrier] + Vec2{0.2, 0.2};

    std::vector<Episode> episodes;
    auto make_episode = [&](const std::string& kind, int start, int end) {
        Episode ep;
        ep.kind = kind;
        ep.start = start;
        ep.end = end;
        ep.target = {rng.uniform(0.35 * cfg.arena, 0.65 * cfg.arena),
                     rng.uniform(0.35 * cfg.arena, 0.65 * cfg.arena)};
        ep.actor_a = rng.uniform_int(0, cfg.agents - 1);
        ep.actor_b = rng.uniform_int(0, cfg.agents - 2);
        if (ep.actor_b >= ep.actor_a) ++ep.actor_b;
        if (kind == "pass") ep.actor_a = st.carrier;  // ball leaves its carrier
        return ep;
    };
    if (!plan.first.empty())
        episodes.push_back(make_episode(plan.first, plan.first_start, plan.first_end));
    episodes.push_back(make_episode(plan.second, plan.second_start, plan.second_end));

    Sequence seq;
    seq.frame_labels.resize(cfg.frames);

    bool pass_done = false;
    for (int f = 0; f < cfg.frames; ++f) {
        const Episode* active = nullptr;
        for (auto& ep : episodes)
            if (f >= ep.start && f < ep.end) active = &ep;

        Vec2 centroid{};
        for (const auto& p : st.pos) centroid = centroid + p * (1.0 / cfg.agents);

        for (int a = 0; a < cfg.agents; ++a) {
            Vec2 steer{};
            double speed = s0;
            if (active == nullptr) {
                if (norm(st.waypoint[a] - st.pos[a]) < 0.6)
                    st.waypoint[a] = {rng.uniform(1.0, cfg.arena - 1.0),
                                      rng.uniform(1.0, cfg.arena - 1.0)};
                steer = unit(st.waypoint[a] - st.pos[a]);
            } else if (active->kind == "converge") {
                double dist = norm(active->target - st.pos[a]);
                steer = unit(active->target - st.pos[a]) * std::min(1.0, dist / 1.0);
                speed = 1.6 * s0;
            } else if (active->kind == "disperse") {
                Vec2 away = unit(st.pos[a] - centroid);
                if (norm(away) < 1e-6) away = {a % 2 ? 1.0 : -1.0, a % 3 ? 1.0 : -1.0};
                steer = away;
                speed = 1.6 * s0;
            } else if (active->kind == "chase") {
                if (a == active->actor_a) {
                    steer = unit(st.pos[active->actor_b] - st.pos[a]);
                    speed = 1.5 * s0;
                } else if (a == active->actor_b) {
                    Vec2 flee = unit(st.pos[a] - st.pos[active->actor_a]);
                    // Deflect along walls instead of cornering.
                    Vec2 next = st.pos[a] + flee * (1.3 * s0 * dt);
                    if (next.x < 1.0 || next.x > cfg.arena - 1.0) flee.x = -flee.x * 0.2;
                    if (next.y < 1.0 || next.y > cfg.arena - 1.0) flee.y = -flee.y * 0.2;
                    steer = unit(flee);
                    speed = 1.3 * s0;
                } else {
                    steer = unit(st.waypoint[a] - st.pos[a]) * 0.5;
                }
            } else {  // pass: agents drift while the ball moves
                steer = unit(st.waypoint[a] - st.pos[a]) * 0.4;
            }
            Vec2 noise{rng.normal() * 0.05 * s0, rng.normal() * 0.05 * s0};
            st.vel[a] = steer * speed + noise;
            st.pos[a] = st.pos[a] + st.vel[a] * dt;
            if (st.pos[a].x < wall) { st.pos[a].x = wall; st.vel[a].x = std::max(0.0, st.vel[a].x); }
            if (st.pos[a].y < wall) { st.pos[a].y = wall; st.vel[a].y = std::max(0.0, st.vel[a].y); }
            if (st.pos[a].x > cfg.arena - wall) { st.pos[a].x = cfg.arena - wall; st.vel[a].x = std::min(0.0, st.vel[a].x); }
            if (st.pos[a].y > cfg.arena - wall) { st.pos[a].y = cfg.arena - wall; st.vel[a].y = std::min(0.0, st.vel[a].y); }
        }

        if (active != nullptr && active->kind == "pass" && !pass_done) {
            Vec2 to_receiver = st.pos[active->actor_b] - st.ball_pos;
            if (norm(to_receiver) < 0.4) {
                st.carrier = active->actor_b;
                pass_done = true;
            } else {
                st.ball_vel = unit(to_receiver) * (2.2 * s0);
                st.ball_pos = st.ball_pos + st.ball_vel * dt;
            }
        }
        if (active == nullptr || active->kind != "pass" || pass_done) {
            Vec2 target = st.pos[st.carrier] + Vec2{0.2, 0.2};
            st.ball_vel = (target - st.ball_pos) * (1.0 / dt);
            st.ball_pos = target;
        }

        SnapshotGraph snap;
        snap.timestamp = f / cfg.frame_rate;
        for (int a = 0; a < cfg.agents; ++a) {
            SnapshotNode node;
            node.entity_id = "a" + std::to_string(a);
            node.node_type = "agent";
            node.features = {st.pos[a].x / cfg.arena, st.pos[a].y / cfg.arena,
                             st.vel[a].x / vmax, st.vel[a].y / vmax, 0.0};
            snap.nodes.push_back(std::move(node));
        }
        SnapshotNode ball;
        ball.entity_id = "ball";
        ball.node_type = "ball";
        ball.features = {st.ball_pos.x / cfg.arena, st.ball_pos.y / cfg.arena,
                         st.ball_vel.x / vmax, st.ball_vel.y / vmax, 1.0};
        snap.nodes.push_back(std::move(ball));

        int n = cfg.agents + 1;
        auto pos_of = [&](int i) { return i < cfg.agents ? st.pos[i] : st.ball_pos; };
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (norm(pos_of(i) - pos_of(j)) < cfg.proximity)
                    snap.edges.push_back(SnapshotEdge{i, j, "near", std::nullopt});
        seq.snapshots.push_back(std::move(snap));

        if (active != nullptr) seq.frame_labels[f].push_back(active->kind);
        if (!plan.first.empty() && f >= plan.second_start && f < plan.second_end &&
            plan.second_start - plan.first_end <= cfg.composite_horizon)
            seq.frame_labels[f].push_back(plan.first + "+" + plan.second);

        if (trace != nullptr) {
            trace->agent_pos.push_back(st.pos);
            trace->ball_pos.push_back(st.ball_pos);
            trace->agent_vel.push_back(st.vel);
        }
    }
    return seq;
}

// Kinematic signature checks; generation is retried when the arena dynamics
// defeated the script (e.g. a cornered chase target).
bool episode_signature_ok(const SimConfig& cfg, const EpisodePlan& plan, const Trace& trace) {
    double s0 = cfg.arena / 8.0;
    double dt = 1.0 / cfg.frame_rate;
    struct Span {
        std::string kind;
        int start, end;
    };
    std::vector<Span> spans;
    if (!plan.first.empty()) spans.push_back({plan.first, plan.first_start, plan.first_end});
    spans.push_back({plan.second, plan.second_start, plan.second_end});

    for (const auto& span : spans) {
        int a = span.start, b = span.end - 1;
        if (span.kind == "converge") {
            if (mean_pairwise_distance(trace.agent_pos[b]) >=
                0.75 * mean_pairwise_distance(trace.agent_pos[a]))
                return false;
        } else if (span.kind == "disperse") {
            if (mean_pairwise_distance(trace.agent_pos[b]) <=
                1.25 * mean_pairwise_distance(trace.agent_pos[a]))
                return false;
        } else if (span.kind == "pass") {
            // The ball must have moved meaningfully and ended next to an agent.
            double flight = norm(trace.ball_pos[b] - trace.ball_pos[a]);
            if (flight < 1.0) return false;
            double closest = 1e18;
            for (const auto& p : trace.agent_pos[b]) closest = std::min(closest, norm(p - trace.ball_pos[b]));
            if (closest > 0.8) return false;
        } else if (span.kind == "chase") {
            // Some agent displaces far and fast in a consistent direction.
            double best = 0.0;
            for (size_t agent = 0; agent < trace.agent_pos[a].size(); ++agent)
                best = std::max(best, norm(trace.agent_pos[b][agent] - trace.agent_pos[a][agent]));
            if (best < 0.8 * s0 * dt * (b - a)) return false;
        }
    }
    return true;
}

}  // namespace

Dataset simulate(const SimConfig& cfg) {
    if (cfg.sequences < 1 || cfg.frames < 2 || cfg.agents < 2)
        throw config_error("simulate: need >= 1 sequence, >= 2 frames, >= 2 agents");
    if (cfg.event_duration < 2 || cfg.event_duration > cfg.frames)
        throw config_error("simulate: event_duration out of range");
    if (!cfg.composites.empty() && cfg.composite_fraction > 0.0) {
        if (cfg.frames < 2 * cfg.event_duration + 2)
            throw config_error("simulate: frames too short for composite episodes");
        for (const auto& [a, b] : cfg.composites) {
            auto known = [&](const std::string& p) {
                return std::find(cfg.primitives.begin(), cfg.primitives.end(), p) !=
                       cfg.primitives.end();
            };
            if (!known(a) || !known(b))
                throw config_error("simulate: composite uses unknown primitive " + a + "+" + b);
        }
    }

    Dataset ds;
    ds.categories = cfg.categories();
    for (int i = 0; i < cfg.sequences; ++i) {
        EpisodePlan plan = plan_for_sequence(cfg, i);
        Sequence seq;
        for (int attempt = 0; attempt <= cfg.max_resample; ++attempt) {
            Rng rng(cfg.seed * 0x9E3779B97F4A7C15ULL + static_cast<uint64_t>(i) * 1000003ULL +
                    static_cast<uint64_t>(attempt));
            Trace trace;
            seq = generate_sequence(cfg, plan, rng, &trace);
            if (episode_signature_ok(cfg, plan, trace)) break;
        }
        seq.seq_id = i;
        ds.sequences.push_back(std::move(seq));
    }

    // Label placement is scripted, so prevalence is determined by the
    // configuration; out-of-bounds prevalence means the grammar and bounds
    // are inconsistent rather than an unlucky draw.
    int total_frames = cfg.sequences * cfg.frames;
    for (const auto& cat : ds.categories) {
        int count = 0;
        for (const auto& seq : ds.sequences)
            for (const auto& fl : seq.frame_labels)
                if (std::find(fl.begin(), fl.end(), cat) != fl.end()) ++count;
        double prevalence = static_cast<double>(count) / total_frames;
        if (prevalence < cfg.min_prevalence || prevalence > cfg.max_prevalence)
            throw config_error("simulate: category \"" + cat + "\" prevalence " +
                               std::to_string(prevalence) + " outside configured bounds");
    }
    return ds;
}

nlohmann::json sim_manifest(const SimConfig& cfg) {
    nlohmann::json composites = nlohmann::json::array();
    for (const auto& [a, b] : cfg.composites) composites.push_back({a, b});
    nlohmann::json j = {{"sequences", cfg.sequences},
                        {"frames", cfg.frames},
                        {"agents", cfg.agents},
                        {"arena", cfg.arena},
                        {"proximity", cfg.proximity},
                        {"frame_rate", cfg.frame_rate},
                        {"seed", cfg.seed},
                        {"event_duration", cfg.event_duration},
                        {"composite_fraction", cfg.composite_fraction},
                        {"composite_horizon", cfg.composite_horizon},
                        {"primitives", cfg.primitives},
                        {"composites", composites},
                        {"min_prevalence", cfg.min_prevalence},
                        {"max_prevalence", cfg.max_prevalence},
                        {"categories", cfg.categories()}};
    j["config_hash"] = json_fingerprint(j);
    return j;
}

}  // namespace timegraphs
