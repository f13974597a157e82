#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "test_support.hpp"
#include "timid/dataset.hpp"
#include "timid/ltl.hpp"
#include "timid/rng.hpp"
#include "timid/simgen.hpp"

using namespace timid;
using namespace timid::sim;
using timid::test::random_trace;
using timid::test::read_file;
using timid::test::TempDir;

namespace {

ltl::PropositionState state(bool lion, bool ball) {
    ltl::PropositionState s;
    s.set(kLionProp, lion);
    s.set(kBallProp, ball);
    return s;
}

GenConfig small_config(Task task) {
    GenConfig cfg;
    cfg.task = task;
    cfg.n_normal = 10;
    cfg.n_anomalous = 10;
    cfg.feature_dim = 16;
    cfg.seed = 5;
    return cfg;
}

}  // namespace

TEST_CASE("arena layouts satisfy the geometric invariants") {
    for (int i = 0; i < Arena::kNumLayouts; ++i) {
        const Arena a = Arena::layout(i);
        for (Vec2 p : {a.lion_pos, a.ball_pos, a.depot_pos}) {
            CHECK(p.x >= 0.0);
            CHECK(p.x <= 1.0);
            CHECK(p.y >= 0.0);
            CHECK(p.y <= 1.0);
        }
        CHECK(distance(a.lion_pos, a.ball_pos) > 2.0 * a.vicinity_radius);
        CHECK(distance(a.lion_pos, a.depot_pos) > 2.0 * a.vicinity_radius);
        CHECK(distance(a.ball_pos, a.depot_pos) > 2.0 * a.vicinity_radius);
    }
    CHECK_THROWS_AS(Arena::layout(3), std::invalid_argument);
    CHECK_THROWS_AS(Arena::layout(0, -0.1), std::invalid_argument);
}

TEST_CASE("planner contracts") {
    const Arena arena = Arena::layout(0);

    SUBCASE("compliant ordering plan satisfies the formula") {
        const auto plan = plan_episode(Task::Ordering, arena, 3, MistakeKind::None, 7);
        const auto sim = simulate(plan, arena, 8, 0.01, 7);
        const auto v = ltl::monitor(task_formula(Task::Ordering), sim.prop_trace);
        CHECK(v.status == ltl::MonitorStatus::Satisfied);
    }
    SUBCASE("mutex overlap plan violates the formula") {
        const auto plan = plan_episode(Task::Mutex, arena, 3, MistakeKind::MutexOverlap, 7);
        const auto sim = simulate(plan, arena, 8, 0.01, 7);
        const auto v = ltl::monitor(task_formula(Task::Mutex), sim.prop_trace);
        CHECK(v.status == ltl::MonitorStatus::Violated);
    }
    SUBCASE("incompatible task/mistake pairs are rejected") {
        CHECK_THROWS_AS(plan_episode(Task::Ordering, arena, 3, MistakeKind::MutexOverlap, 1),
                        std::invalid_argument);
        CHECK_THROWS_AS(plan_episode(Task::Mutex, arena, 3, MistakeKind::LionFirst, 1),
                        std::invalid_argument);
        CHECK_THROWS_AS(plan_episode(Task::Mutex, arena, 1, MistakeKind::None, 1),
                        std::invalid_argument);
    }
    SUBCASE("too-short schedules are reported as infeasible") {
        PlanOptions tight;
        tight.min_slots = 2;
        tight.max_slots = 2;
        CHECK_THROWS_AS(plan_episode(Task::Mutex, arena, 3, MistakeKind::None, 1, tight),
                        InfeasiblePlanError);
        CHECK_THROWS_AS(plan_episode(Task::Ordering, arena, 3, MistakeKind::None, 1, tight),
                        InfeasiblePlanError);
    }
}

TEST_CASE("generated episodes match their intended label on 100 seeds per configuration") {
    const struct {
        Task task;
        MistakeKind mistake;
    } configs[] = {
        {Task::Mutex, MistakeKind::None},
        {Task::Mutex, MistakeKind::MutexOverlap},
        {Task::Ordering, MistakeKind::None},
        {Task::Ordering, MistakeKind::LionFirst},
    };
    for (const auto& c : configs) {
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            const Arena arena = Arena::layout(static_cast<int>(seed % 3));
            const auto plan = plan_episode(c.task, arena, 3, c.mistake, splitmix64(seed));
            const auto sim = simulate(plan, arena, 8, 0.01, splitmix64(seed ^ 0xff));
            const auto v = ltl::monitor(task_formula(c.task), sim.prop_trace);
            const bool violated = v.status == ltl::MonitorStatus::Violated;
            REQUIRE_MESSAGE(violated == (c.mistake != MistakeKind::None),
                            "task ", task_name(c.task), " mistake ", mistake_name(c.mistake),
                            " seed ", seed);
        }
    }
}

TEST_CASE("simulation: arrival fires the proposition, depot keeps both false") {
    const Arena arena = Arena::layout(0);
    WaypointPlan plan;
    plan.waypoints = {{arena.depot_pos, arena.lion_pos},
                      {arena.depot_pos, arena.depot_pos}};
    plan.is_decoy = {false, true};
    const auto sim = simulate(plan, arena, 4, 0.0, 1);
    REQUIRE(sim.prop_trace.size() == 4);
    CHECK(sim.prop_trace[3].get(kLionProp));  // arrival step, distance 0 < radius
    for (const auto& s : sim.prop_trace) CHECK_FALSE(s.get(kBallProp));

    WaypointPlan parked;
    parked.waypoints = {{arena.depot_pos, arena.depot_pos, arena.depot_pos},
                        {arena.depot_pos, arena.depot_pos, arena.depot_pos}};
    parked.is_decoy = {true, true};
    for (const auto& s : simulate(parked, arena, 5, 0.0, 1).prop_trace) {
        CHECK_FALSE(s.get(kLionProp));
        CHECK_FALSE(s.get(kBallProp));
    }
}

TEST_CASE("simulation replay is bit-identical for a fixed seed") {
    const Arena arena = Arena::layout(1);
    const auto plan = plan_episode(Task::Mutex, arena, 3, MistakeKind::None, 99);
    const auto a = simulate(plan, arena, 8, 0.02, 1234);
    const auto b = simulate(plan, arena, 8, 0.02, 1234);
    REQUIRE(a.positions.size() == b.positions.size());
    for (std::size_t t = 0; t < a.positions.size(); ++t) {
        for (std::size_t r = 0; r < a.positions[t].size(); ++r) {
            CHECK(a.positions[t][r].x == b.positions[t][r].x);
            CHECK(a.positions[t][r].y == b.positions[t][r].y);
        }
    }
    for (std::size_t t = 0; t < a.prop_trace.size(); ++t) {
        CHECK(a.prop_trace[t].values() == b.prop_trace[t].values());
    }
}

TEST_CASE("step labels follow the task rules") {
    SUBCASE("mutex labels exactly the co-occurrence steps") {
        std::vector<ltl::PropositionState> trace = {
            state(false, false), state(true, false), state(false, true),
            state(true, true),   state(true, true),  state(false, false)};
        CHECK(label_steps(Task::Mutex, trace) ==
              std::vector<bool>{false, false, false, true, true, false});
    }
    SUBCASE("ordering labels lion steps before the first ball step") {
        std::vector<ltl::PropositionState> trace = {
            state(false, false), state(false, false), state(true, false),
            state(true, false),  state(false, false), state(false, true),
            state(true, false)};
        CHECK(label_steps(Task::Ordering, trace) ==
              std::vector<bool>{false, false, true, true, false, false, false});
    }
    SUBCASE("empty ordering episode is labeled at the final step") {
        std::vector<ltl::PropositionState> trace = {state(false, false), state(false, false)};
        CHECK(label_steps(Task::Ordering, trace) == std::vector<bool>{false, true});
    }
    SUBCASE("video label equals the negated finite-trace evaluation on 1000 random traces") {
        Rng rng(31);
        for (int trial = 0; trial < 1000; ++trial) {
            const Task task = trial % 2 == 0 ? Task::Mutex : Task::Ordering;
            const auto trace = random_trace(rng, 1 + rng.uniform_index(12));
            const auto labels = label_steps(task, trace);
            bool any = false;
            for (bool l : labels) any = any || l;
            CHECK(any == !ltl::eval_finite(*task_formula(task), trace));
        }
    }
}

TEST_CASE("decoy robots never influence labels of compliant episodes") {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        const Task task = seed % 2 == 0 ? Task::Mutex : Task::Ordering;
        const Arena arena = Arena::layout(static_cast<int>(seed % 3));
        const auto plan = plan_episode(task, arena, 4, MistakeKind::None, splitmix64(seed));
        const auto sim = simulate(plan, arena, 8, 0.01, splitmix64(seed ^ 0xbeef));

        std::vector<std::vector<Vec2>> actors_only(sim.positions.size());
        for (std::size_t t = 0; t < sim.positions.size(); ++t) {
            for (std::size_t r = 0; r < plan.num_robots(); ++r) {
                if (!plan.is_decoy[r]) actors_only[t].push_back(sim.positions[t][r]);
            }
        }
        const auto full_labels = label_steps(task, sim.prop_trace);
        const auto actor_labels = label_steps(task, extract_props(actors_only, arena));
        CHECK(full_labels == actor_labels);
    }
}

TEST_CASE("feature encoding is a pure function of state and seeds") {
    const Arena arena = Arena::layout(0);
    const std::vector<std::vector<Vec2>> pos_a = {
        {{0.5, 0.1}, {0.4, 0.2}}, {{0.55, 0.15}, {0.35, 0.25}}};
    const std::vector<std::vector<Vec2>> pos_b = {
        {{0.5, 0.1}, {0.4, 0.2}}, {{0.6, 0.3}, {0.2, 0.2}}, {{0.7, 0.4}, {0.1, 0.1}}};

    const auto fa = encode_features(pos_a, arena, 24, 42, 0.05);
    const auto fa2 = encode_features(pos_a, arena, 24, 42, 0.05);
    CHECK(fa == fa2);

    // same state row (same coordinates, zero displacement) in another episode
    const auto fb = encode_features(pos_b, arena, 24, 42, 0.05);
    CHECK(fa[0] == fb[0]);

    const auto other_seed = encode_features(pos_a, arena, 24, 43, 0.05);
    CHECK(fa[0] != other_seed[0]);
}

TEST_CASE("feature values stay in the tanh band plus noise") {
    const Arena arena = Arena::layout(2);
    const auto plan = plan_episode(Task::Ordering, arena, 3, MistakeKind::LionFirst, 3);
    const auto sim = simulate(plan, arena, 8, 0.01, 3);
    const double sigma = 0.05;
    const auto feats = encode_features(sim.positions, arena, 32, 7, sigma);
    for (const auto& row : feats) {
        for (double v : row) {
            CHECK(std::fabs(v) < 1.0 + 6.0 * sigma);
        }
    }
}

TEST_CASE("clearly distinct states produce distinct feature rows") {
    const Arena arena = Arena::layout(0);
    Rng rng(17);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<std::vector<Vec2>> pos(1, std::vector<Vec2>(2));
        for (auto& p : pos[0]) p = {rng.uniform(), rng.uniform()};
        auto shifted = pos;
        const std::size_t robot = rng.uniform_index(2);
        shifted[0][robot].x = std::fmod(shifted[0][robot].x + 0.1 + 0.8 * rng.uniform(), 1.0);
        const auto fa = encode_features(pos, arena, 16, 5, 0.0);
        const auto fb = encode_features(shifted, arena, 16, 5, 0.0);
        double dist_sq = 0.0;
        for (std::size_t i = 0; i < fa[0].size(); ++i) {
            dist_sq += (fa[0][i] - fb[0][i]) * (fa[0][i] - fb[0][i]);
        }
        CHECK(dist_sq > 0.0);
    }
}

TEST_CASE("generate_dataset writes a consistent, deterministic corpus") {
    TempDir dir_a("gen_a");
    TempDir dir_b("gen_b");
    const GenConfig cfg = small_config(Task::Mutex);
    const auto manifest = generate_dataset(cfg, dir_a.path());

    SUBCASE("counts, balance, and split integrity") {
        CHECK(manifest.episodes.size() == 20);
        std::size_t positives = 0, train = 0;
        for (const auto& e : manifest.episodes) positives += e.video_label ? 1 : 0;
        for (const auto& e : manifest.episodes) train += e.split == "train" ? 1 : 0;
        CHECK(positives == 10);
        CHECK(train == 16);
        CHECK(manifest.count("train", true) == 8);
        CHECK(manifest.count("test", true) == 2);
    }
    SUBCASE("anomalous episodes have positive step labels, normal ones none") {
        for (const auto& rec : manifest.episodes) {
            const auto ep = load_episode(dir_a.path(), manifest, rec);
            bool any = false;
            for (bool l : ep.step_labels) any = any || l;
            CHECK(any == rec.video_label);
        }
    }
    SUBCASE("oracle consistency against the stored proposition trace") {
        const auto formula = task_formula(Task::Mutex);
        for (const auto& rec : manifest.episodes) {
            const auto labels = read_labels(
                (std::filesystem::path(dir_a.path()) / "labels" / (rec.id + ".json")).string());
            CHECK(rec.video_label == !ltl::eval_finite(*formula, labels.prop_trace));
        }
    }
    SUBCASE("same config and seed reproduce byte-identical files") {
        generate_dataset(cfg, dir_b.path());
        CHECK(read_file(dir_a.path() + "/manifest.json") ==
              read_file(dir_b.path() + "/manifest.json"));
        for (const auto& rec : manifest.episodes) {
            CHECK(read_file(dir_a.path() + "/" + rec.feature_file) ==
                  read_file(dir_b.path() + "/" + rec.feature_file));
            CHECK(read_file(dir_a.path() + "/labels/" + rec.id + ".json") ==
                  read_file(dir_b.path() + "/labels/" + rec.id + ".json"));
        }
    }
    SUBCASE("feature files round-trip through the f32 reader") {
        const auto& rec = manifest.episodes.front();
        const auto feats = read_features_f32(dir_a.path() + "/" + rec.feature_file,
                                             manifest.feature_dim);
        CHECK(feats.size() == rec.num_steps);
        CHECK(feats.front().size() == manifest.feature_dim);
    }
}

TEST_CASE("generate_dataset rejects invalid configs") {
    GenConfig cfg = small_config(Task::Mutex);
    cfg.n_normal = 0;
    cfg.n_anomalous = 0;
    TempDir dir("gen_bad");
    CHECK_THROWS_AS(generate_dataset(cfg, dir.path()), std::invalid_argument);
    cfg = small_config(Task::Mutex);
    cfg.train_fraction = 1.5;
    CHECK_THROWS_AS(generate_dataset(cfg, dir.path()), std::invalid_argument);
    cfg = small_config(Task::Mutex);
    cfg.layouts = {};
    CHECK_THROWS_AS(generate_dataset(cfg, dir.path()), std::invalid_argument);
}
