#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "timid/ltl.hpp"

namespace timid::sim {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

double distance(Vec2 a, Vec2 b);
double segment_point_distance(Vec2 a, Vec2 b, Vec2 p);

enum class Task { Mutex, Ordering };
enum class MistakeKind { None, MutexOverlap, LionFirst };

const char* task_name(Task t);
Task parse_task(const std::string& name);
const char* mistake_name(MistakeKind m);
MistakeKind parse_mistake(const std::string& name);
bool mistake_compatible(Task t, MistakeKind m);

// Task formula over {Lion, Ball} and the paper-prompt pair describing it.
ltl::FormulaPtr task_formula(Task t);
std::string task_prompt(Task t);
std::string mistake_prompt(Task t);

inline constexpr const char* kLionProp = "Lion";
inline constexpr const char* kBallProp = "Ball";

// Unit-square workspace with the two proposition sites and the robots' depot.
// Sites are kept more than two vicinity radii apart so a single robot can
// never fire both propositions at once.
struct Arena {
    Vec2 lion_pos;
    Vec2 ball_pos;
    Vec2 depot_pos;
    double vicinity_radius = 0.12;

    static constexpr int kNumLayouts = 3;
    static Arena layout(int index, double vicinity_radius = 0.12);
    void validate() const;
};

// Per-robot waypoint rows; row r has legs()+1 entries, entry 0 is the start.
// Leg s moves from waypoints[r][s] to waypoints[r][s+1].
struct WaypointPlan {
    std::vector<std::vector<Vec2>> waypoints;
    std::vector<bool> is_decoy;

    std::size_t num_robots() const { return waypoints.size(); }
    std::size_t legs() const { return waypoints.empty() ? 0 : waypoints.front().size() - 1; }
};

struct PlanOptions {
    std::size_t min_slots = 6;
    std::size_t max_slots = 10;
};

struct InfeasiblePlanError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Compliant plans route the acting robots through the sites so the task
// formula holds; mistake plans force the named violation. Remaining robots
// get decoy waypoints kept clear of both sites. Role assignment is
// randomized per episode.
WaypointPlan plan_episode(Task task, const Arena& arena, int num_robots,
                          MistakeKind mistake, std::uint64_t rng_seed,
                          const PlanOptions& options = {});

struct SimResult {
    std::vector<std::vector<Vec2>> positions;  // [step][robot]
    std::vector<ltl::PropositionState> prop_trace;
};

// Straight-line legs, steps_per_leg steps each, additive Gaussian jitter,
// positions clamped to the unit square. Proposition extraction applies the
// vicinity rule per step over all robots.
SimResult simulate(const WaypointPlan& plan, const Arena& arena,
                   std::size_t steps_per_leg, double noise_sigma,
                   std::uint64_t rng_seed);

std::vector<ltl::PropositionState> extract_props(
    const std::vector<std::vector<Vec2>>& positions, const Arena& arena);

// Mutex: label_t = Lion_t & Ball_t. Ordering: label_t = Lion_t & (Ball not
// yet seen at any i <= t); if neither proposition ever fires the final step
// is labeled (unfulfilled strong Until). OR(labels) == !eval_finite(task).
std::vector<bool> label_steps(Task task, const std::vector<ltl::PropositionState>& trace);

// Deterministic stand-in for the pretrained video backbone: per step the raw
// state vector [coords; displacements; per-site distances] goes through a
// fixed seeded affine map and tanh, plus Gaussian noise keyed off the state
// bytes. Proposition booleans are never included; vicinity must be inferred
// from geometry.
std::vector<std::vector<double>> encode_features(
    const std::vector<std::vector<Vec2>>& positions, const Arena& arena,
    std::size_t feature_dim, std::uint64_t encoder_seed, double feature_noise_sigma);

struct Episode {
    std::string id;
    Task task = Task::Mutex;
    int layout = 0;
    int num_robots = 0;
    std::vector<std::vector<Vec2>> positions;
    std::vector<ltl::PropositionState> prop_trace;
    std::vector<bool> step_labels;
    bool video_label = false;
    std::vector<std::vector<double>> features;  // T rows x D
    std::size_t raw_frame_count = 0;            // T * segment_len
};

struct GenConfig {
    Task task = Task::Mutex;
    int n_normal = 100;
    int n_anomalous = 100;
    std::vector<int> layouts = {0, 1, 2};
    int num_robots = 3;
    double train_fraction = 0.8;
    std::uint64_t seed = 1;
    std::uint64_t encoder_seed = 9001;
    std::size_t feature_dim = 64;
    std::size_t segment_len = 16;
    std::size_t steps_per_leg = 8;
    double noise_sigma = 0.01;
    double feature_noise_sigma = 0.05;
    double vicinity_radius = 0.12;
    PlanOptions plan;
};

// Fully deterministic given (config, id): the episode RNG stream is derived
// from (config.seed, id). Throws if the episode disagrees with its intended
// label under the LTL monitor.
Episode generate_episode(const GenConfig& cfg, const std::string& id, int layout,
                         MistakeKind mistake);

}  // namespace timid::sim
