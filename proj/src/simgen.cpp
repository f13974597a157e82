#include "timid/simgen.hpp"

#include <algorithm>
#include <cmath>

#include "timid/rng.hpp"

namespace timid::sim {

double distance(Vec2 a, Vec2 b) {
    const double dx = a.x - b.x, dy = a.y - b.y;
    return std::sqrt(dx * dx + dy * dy);
}

double segment_point_distance(Vec2 a, Vec2 b, Vec2 p) {
    const double vx = b.x - a.x, vy = b.y - a.y;
    const double len_sq = vx * vx + vy * vy;
    if (len_sq == 0.0) return distance(a, p);
    double t = ((p.x - a.x) * vx + (p.y - a.y) * vy) / len_sq;
    t = std::clamp(t, 0.0, 1.0);
    return distance({a.x + t * vx, a.y + t * vy}, p);
}

const char* task_name(Task t) { return t == Task::Mutex ? "mutex" : "ordering"; }

Task parse_task(const std::string& name) {
    if (name == "mutex") return Task::Mutex;
    if (name == "ordering") return Task::Ordering;
    throw std::invalid_argument("unknown task: " + name);
}

const char* mistake_name(MistakeKind m) {
    switch (m) {
    case MistakeKind::None: return "none";
    case MistakeKind::MutexOverlap: return "mutex_overlap";
    case MistakeKind::LionFirst: return "lion_first";
    }
    return "none";
}

MistakeKind parse_mistake(const std::string& name) {
    if (name == "none") return MistakeKind::None;
    if (name == "mutex_overlap") return MistakeKind::MutexOverlap;
    if (name == "lion_first") return MistakeKind::LionFirst;
    throw std::invalid_argument("unknown mistake kind: " + name);
}

bool mistake_compatible(Task t, MistakeKind m) {
    if (m == MistakeKind::None) return true;
    return (t == Task::Mutex && m == MistakeKind::MutexOverlap) ||
           (t == Task::Ordering && m == MistakeKind::LionFirst);
}

ltl::FormulaPtr task_formula(Task t) {
    if (t == Task::Mutex) return ltl::parse("G !(Lion & Ball)");
    return ltl::parse("!Lion U Ball");
}

std::string task_prompt(Task t) {
    return t == Task::Mutex ? "robot NOT IN lion AND green ball"
                            : "robot NOT IN lion UNTIL in green ball";
}

std::string mistake_prompt(Task t) {
    return t == Task::Mutex ? "robot IN lion AND green ball"
                            : "robot IN lion BEFORE green ball";
}

Arena Arena::layout(int index, double vicinity_radius) {
    Arena a;
    a.vicinity_radius = vicinity_radius;
    switch (index) {
    case 0:
        a.lion_pos = {0.20, 0.80};
        a.ball_pos = {0.80, 0.80};
        a.depot_pos = {0.50, 0.10};
        break;
    case 1:
        a.lion_pos = {0.15, 0.50};
        a.ball_pos = {0.85, 0.50};
        a.depot_pos = {0.50, 0.90};
        break;
    case 2:
        a.lion_pos = {0.75, 0.20};
        a.ball_pos = {0.25, 0.75};
        a.depot_pos = {0.85, 0.85};
        break;
    default:
        throw std::invalid_argument("arena layout index must be in [0, " +
                                    std::to_string(kNumLayouts) + ")");
    }
    a.validate();
    return a;
}

void Arena::validate() const {
    if (vicinity_radius <= 0.0) {
        throw std::invalid_argument("vicinity_radius must be positive");
    }
    for (Vec2 p : {lion_pos, ball_pos, depot_pos}) {
        if (p.x < 0.0 || p.x > 1.0 || p.y < 0.0 || p.y > 1.0) {
            throw std::invalid_argument("arena sites must lie inside the unit square");
        }
    }
    const double min_sep = 2.0 * vicinity_radius;
    if (distance(lion_pos, ball_pos) <= min_sep || distance(lion_pos, depot_pos) <= min_sep ||
        distance(ball_pos, depot_pos) <= min_sep) {
        throw std::invalid_argument("arena sites closer than twice the vicinity radius");
    }
}

// ---------------------------------------------------------------------------
// Planning
// ---------------------------------------------------------------------------

namespace {

Vec2 jitter_around(Vec2 center, double radius, Rng& rng) {
    // rejection-sampled disk
    for (;;) {
        const double dx = rng.uniform(-radius, radius);
        const double dy = rng.uniform(-radius, radius);
        if (dx * dx + dy * dy <= radius * radius) return {center.x + dx, center.y + dy};
    }
}

// A leg may approach a site only when one of its endpoints is the intentional
// visit point (within one radius); otherwise a 2r corridor must stay clear.
// Visit points sit within 0.25r of a site and sampled free waypoints at least
// 2r away, so the two cases never blur.
bool leg_clear(Vec2 from, Vec2 to, const Arena& arena) {
    const double margin = 2.0 * arena.vicinity_radius;
    for (Vec2 site : {arena.lion_pos, arena.ball_pos}) {
        const bool endpoint_touches = distance(from, site) < arena.vicinity_radius ||
                                      distance(to, site) < arena.vicinity_radius;
        if (endpoint_touches) continue;
        if (segment_point_distance(from, to, site) < margin) return false;
    }
    return true;
}

// `next_site`, when set, is the visit point the following leg heads to; the
// candidate must leave a clear corridor for that approach as well.
Vec2 sample_free_waypoint(Vec2 from, const Arena& arena, Rng& rng, const Vec2* next_site) {
    const double margin = 2.0 * arena.vicinity_radius;
    for (int tries = 0; tries < 200; ++tries) {
        Vec2 cand{rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95)};
        if (distance(cand, arena.lion_pos) < margin) continue;
        if (distance(cand, arena.ball_pos) < margin) continue;
        if (!leg_clear(from, cand, arena)) continue;
        if (next_site && !leg_clear(cand, *next_site, arena)) continue;
        return cand;
    }
    throw InfeasiblePlanError("could not sample a decoy waypoint clear of both sites");
}

// Uniform draw from [lo, hi]; throws when the window is empty.
std::size_t pick_slot(Rng& rng, std::size_t lo, std::size_t hi, const char* what) {
    if (lo > hi) {
        throw InfeasiblePlanError(std::string("schedule window too short for ") + what);
    }
    return lo + rng.uniform_index(hi - lo + 1);
}

}  // namespace

WaypointPlan plan_episode(Task task, const Arena& arena, int num_robots,
                          MistakeKind mistake, std::uint64_t rng_seed,
                          const PlanOptions& options) {
    if (num_robots < 2) {
        throw std::invalid_argument("plan_episode: need at least 2 robots");
    }
    if (!mistake_compatible(task, mistake)) {
        throw std::invalid_argument(std::string("mistake '") + mistake_name(mistake) +
                                    "' is incompatible with task '" + task_name(task) + "'");
    }
    if (options.min_slots < 1 || options.max_slots < options.min_slots) {
        throw std::invalid_argument("plan_episode: bad slot bounds");
    }

    Rng rng(rng_seed);
    const std::size_t R = static_cast<std::size_t>(num_robots);
    const std::size_t slots =
        options.min_slots + rng.uniform_index(options.max_slots - options.min_slots + 1);

    // site visit = dwell pair (s, s+1): arrive at the site at the end of leg
    // s, stay put during leg s+1. Valid dwell starts are 1..slots-1.
    struct Visit {
        std::size_t robot;
        std::size_t slot;
        Vec2 site;
    };
    std::vector<Visit> visits;

    const std::size_t actor_a = rng.uniform_index(R);
    std::size_t actor_b = rng.uniform_index(R - 1);
    if (actor_b >= actor_a) ++actor_b;  // distinct second actor

    std::vector<bool> is_decoy(R, true);

    if (task == Task::Ordering) {
        is_decoy[actor_a] = false;
        if (mistake == MistakeKind::None) {
            // ball first, lion strictly after the dwell plus a travel leg
            const std::size_t b = pick_slot(rng, 1, slots >= 4 ? slots - 3 : 0, "ordering plan");
            const std::size_t l = pick_slot(rng, b + 2, slots - 1, "ordering plan");
            visits.push_back({actor_a, b, arena.ball_pos});
            visits.push_back({actor_a, l, arena.lion_pos});
        } else {
            // lion before any ball visit; half the time the ball follows later
            const bool ball_later = rng.uniform() < 0.5;
            if (ball_later) {
                const std::size_t a = pick_slot(rng, 1, slots >= 4 ? slots - 3 : 0, "lion_first plan");
                const std::size_t c = pick_slot(rng, a + 2, slots - 1, "lion_first plan");
                visits.push_back({actor_a, a, arena.lion_pos});
                visits.push_back({actor_a, c, arena.ball_pos});
            } else {
                const std::size_t a = pick_slot(rng, 1, slots - 1, "lion_first plan");
                visits.push_back({actor_a, a, arena.lion_pos});
            }
        }
    } else {  // Mutex
        is_decoy[actor_a] = false;
        is_decoy[actor_b] = false;
        const bool lion_first = rng.uniform() < 0.5;
        const Vec2 first_site = lion_first ? arena.lion_pos : arena.ball_pos;
        const Vec2 second_site = lion_first ? arena.ball_pos : arena.lion_pos;
        if (mistake == MistakeKind::None) {
            // windows separated by a full clear slot so approach/departure
            // proximity cannot overlap
            const std::size_t x = pick_slot(rng, 1, slots >= 5 ? slots - 4 : 0, "mutex plan");
            const std::size_t y = pick_slot(rng, x + 3, slots - 1, "mutex plan");
            visits.push_back({actor_a, x, first_site});
            visits.push_back({actor_b, y, second_site});
        } else {
            const std::size_t a = pick_slot(rng, 1, slots - 1, "mutex_overlap plan");
            visits.push_back({actor_a, a, first_site});
            visits.push_back({actor_b, a, second_site});
        }
    }

    // slot targets per robot: visit points are fixed first so every free
    // waypoint can be sampled with full knowledge of the adjacent legs
    enum class SlotKind { Free, Arrive, Dwell };
    struct SlotTarget {
        SlotKind kind = SlotKind::Free;
        Vec2 pos;
    };
    std::vector<std::vector<SlotTarget>> targets(R, std::vector<SlotTarget>(slots + 1));
    for (const Visit& v : visits) {
        const Vec2 point = jitter_around(v.site, 0.25 * arena.vicinity_radius, rng);
        targets[v.robot][v.slot] = {SlotKind::Arrive, point};
        targets[v.robot][v.slot + 1] = {SlotKind::Dwell, point};
    }

    WaypointPlan plan;
    plan.is_decoy = is_decoy;
    plan.waypoints.assign(R, {});
    for (std::size_t r = 0; r < R; ++r) {
        auto& w = plan.waypoints[r];
        w.resize(slots + 1);
        for (int tries = 0;; ++tries) {
            w[0] = jitter_around(arena.depot_pos, 0.03, rng);
            if (targets[r][1].kind != SlotKind::Arrive ||
                leg_clear(w[0], targets[r][1].pos, arena)) {
                break;
            }
            if (tries > 200) throw InfeasiblePlanError("depot start blocks the first approach");
        }
        for (std::size_t s = 1; s <= slots; ++s) {
            switch (targets[r][s].kind) {
            case SlotKind::Arrive:
            case SlotKind::Dwell:
                w[s] = targets[r][s].pos;
                break;
            case SlotKind::Free: {
                const Vec2* next_site =
                    s < slots && targets[r][s + 1].kind == SlotKind::Arrive
                        ? &targets[r][s + 1].pos
                        : nullptr;
                w[s] = sample_free_waypoint(w[s - 1], arena, rng, next_site);
                break;
            }
            }
        }
    }
    return plan;
}

// ---------------------------------------------------------------------------
// Simulation + labeling
// ---------------------------------------------------------------------------

SimResult simulate(const WaypointPlan& plan, const Arena& arena,
                   std::size_t steps_per_leg, double noise_sigma,
                   std::uint64_t rng_seed) {
    if (plan.num_robots() == 0 || plan.legs() == 0 || steps_per_leg == 0) {
        throw std::invalid_argument("simulate: empty plan");
    }
    Rng rng(rng_seed);
    const std::size_t R = plan.num_robots();
    const std::size_t T = plan.legs() * steps_per_leg;
    SimResult out;
    out.positions.assign(T, std::vector<Vec2>(R));
    for (std::size_t t = 0; t < T; ++t) {
        const std::size_t leg = t / steps_per_leg;
        const double frac =
            static_cast<double>(t % steps_per_leg + 1) / static_cast<double>(steps_per_leg);
        for (std::size_t r = 0; r < R; ++r) {
            const Vec2 a = plan.waypoints[r][leg];
            const Vec2 b = plan.waypoints[r][leg + 1];
            Vec2 p{a.x + frac * (b.x - a.x), a.y + frac * (b.y - a.y)};
            if (noise_sigma > 0.0) {
                p.x += rng.normal(0.0, noise_sigma);
                p.y += rng.normal(0.0, noise_sigma);
            }
            p.x = std::clamp(p.x, 0.0, 1.0);
            p.y = std::clamp(p.y, 0.0, 1.0);
            out.positions[t][r] = p;
        }
    }
    out.prop_trace = extract_props(out.positions, arena);
    return out;
}

std::vector<ltl::PropositionState> extract_props(
    const std::vector<std::vector<Vec2>>& positions, const Arena& arena) {
    std::vector<ltl::PropositionState> trace;
    trace.reserve(positions.size());
    for (const auto& robots : positions) {
        bool lion = false, ball = false;
        for (Vec2 p : robots) {
            lion = lion || distance(p, arena.lion_pos) < arena.vicinity_radius;
            ball = ball || distance(p, arena.ball_pos) < arena.vicinity_radius;
        }
        ltl::PropositionState s;
        s.set(kLionProp, lion);
        s.set(kBallProp, ball);
        trace.push_back(std::move(s));
    }
    return trace;
}

std::vector<bool> label_steps(Task task, const std::vector<ltl::PropositionState>& trace) {
    std::vector<bool> labels(trace.size(), false);
    if (trace.empty()) return labels;
    if (task == Task::Mutex) {
        for (std::size_t t = 0; t < trace.size(); ++t) {
            labels[t] = trace[t].get(kLionProp) && trace[t].get(kBallProp);
        }
        return labels;
    }
    bool ball_seen = false;
    bool lion_seen = false;
    for (std::size_t t = 0; t < trace.size(); ++t) {
        ball_seen = ball_seen || trace[t].get(kBallProp);
        const bool lion = trace[t].get(kLionProp);
        labels[t] = lion && !ball_seen;
        lion_seen = lion_seen || lion;
    }
    if (!ball_seen && !lion_seen) {
        labels.back() = true;  // strong Until expired with no witness
    }
    return labels;
}

// ---------------------------------------------------------------------------
// Feature encoding
// ---------------------------------------------------------------------------

std::vector<std::vector<double>> encode_features(
    const std::vector<std::vector<Vec2>>& positions, const Arena& arena,
    std::size_t feature_dim, std::uint64_t encoder_seed, double feature_noise_sigma) {
    if (positions.empty() || feature_dim == 0) {
        throw std::invalid_argument("encode_features: empty input");
    }
    const std::size_t R = positions.front().size();
    const std::size_t raw_dim = 7 * R;  // coords(2R) + displacement(2R) + site dists(3R)

    // shared backbone stand-in: one affine map per encoder seed
    Rng map_rng(splitmix64(encoder_seed));
    std::vector<double> W(feature_dim * raw_dim);
    std::vector<double> b(feature_dim);
    const double w_sigma = 1.0 / std::sqrt(static_cast<double>(raw_dim));
    for (double& w : W) w = map_rng.normal(0.0, w_sigma);
    for (double& v : b) v = map_rng.normal(0.0, 0.25);

    std::vector<std::vector<double>> features(positions.size(),
                                              std::vector<double>(feature_dim));
    std::vector<double> raw(raw_dim);
    for (std::size_t t = 0; t < positions.size(); ++t) {
        if (positions[t].size() != R) {
            throw std::invalid_argument("encode_features: ragged position rows");
        }
        std::size_t k = 0;
        for (Vec2 p : positions[t]) {
            raw[k++] = p.x;
            raw[k++] = p.y;
        }
        for (std::size_t r = 0; r < R; ++r) {
            const Vec2 prev = t == 0 ? positions[t][r] : positions[t - 1][r];
            raw[k++] = positions[t][r].x - prev.x;
            raw[k++] = positions[t][r].y - prev.y;
        }
        for (Vec2 p : positions[t]) {
            raw[k++] = distance(p, arena.lion_pos);
            raw[k++] = distance(p, arena.ball_pos);
            raw[k++] = distance(p, arena.depot_pos);
        }
        // noise stream keyed off the state bytes keeps the row a pure
        // function of (state, seeds)
        Rng noise_rng(splitmix64(encoder_seed ^ fnv1a64_bytes(raw.data(), raw.size() * sizeof(double))));
        for (std::size_t i = 0; i < feature_dim; ++i) {
            double acc = b[i];
            const double* wrow = &W[i * raw_dim];
            for (std::size_t j = 0; j < raw_dim; ++j) acc += wrow[j] * raw[j];
            features[t][i] = std::tanh(acc);
            if (feature_noise_sigma > 0.0) {
                features[t][i] += noise_rng.normal(0.0, feature_noise_sigma);
            }
        }
    }
    return features;
}

// ---------------------------------------------------------------------------
// Episode assembly
// ---------------------------------------------------------------------------

Episode generate_episode(const GenConfig& cfg, const std::string& id, int layout,
                         MistakeKind mistake) {
    const Arena arena = Arena::layout(layout, cfg.vicinity_radius);
    const std::uint64_t ep_seed = splitmix64(cfg.seed ^ fnv1a64(id));
    const std::uint64_t plan_seed = splitmix64(ep_seed ^ 0x504c414eull);
    const std::uint64_t sim_seed = splitmix64(ep_seed ^ 0x53494d55ull);

    Episode ep;
    ep.id = id;
    ep.task = cfg.task;
    ep.layout = layout;
    ep.num_robots = cfg.num_robots;

    const WaypointPlan plan =
        plan_episode(cfg.task, arena, cfg.num_robots, mistake, plan_seed, cfg.plan);
    SimResult sim = simulate(plan, arena, cfg.steps_per_leg, cfg.noise_sigma, sim_seed);
    ep.positions = std::move(sim.positions);
    ep.prop_trace = std::move(sim.prop_trace);
    ep.step_labels = label_steps(cfg.task, ep.prop_trace);
    ep.video_label = false;
    for (bool l : ep.step_labels) ep.video_label = ep.video_label || l;
    ep.features = encode_features(ep.positions, arena, cfg.feature_dim, cfg.encoder_seed,
                                  cfg.feature_noise_sigma);
    ep.raw_frame_count = ep.prop_trace.size() * cfg.segment_len;

    const bool intended = mistake != MistakeKind::None;
    const auto verdict = ltl::monitor(task_formula(cfg.task), ep.prop_trace);
    const bool violated = verdict.status == ltl::MonitorStatus::Violated;
    if (violated != intended || ep.video_label != intended) {
        throw std::logic_error("generated episode '" + id +
                               "' does not match its intended label");
    }
    return ep;
}

}  // namespace timid::sim
