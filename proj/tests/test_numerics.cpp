#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "test_support.hpp"
#include "timid/adam.hpp"
#include "timid/rng.hpp"
#include "timid/tensor.hpp"

using namespace timid;
using timid::test::gradcheck;

namespace {

std::vector<double> random_values(Rng& rng, std::size_t n, double lo = -2.0, double hi = 2.0) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(lo, hi);
    return v;
}

// fixed pseudo-random cotangent so the scalar loss exercises every output
// entry; must be deterministic across the finite-difference re-evaluations
int weighted_sum(Tape& tape, int y, std::uint64_t key) {
    const Shape s = tape.node(y).shape;
    Rng rng(key);
    std::vector<double> w(s.numel());
    for (double& x : w) x = rng.uniform(0.3, 1.7);
    return tape.sum_all(tape.mul(y, tape.input(s, std::move(w))));
}

}  // namespace

TEST_CASE("forward primitive values") {
    Tape tape;

    SUBCASE("row_softmax of zeros is uniform") {
        const int x = tape.input({1, 3}, {0.0, 0.0, 0.0});
        const auto& y = tape.value(tape.row_softmax(x));
        for (double v : y) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    }
    SUBCASE("topk_mean takes the k largest") {
        const int x = tape.input({3, 1}, {5.0, 1.0, 3.0});
        CHECK(tape.scalar_value(tape.topk_mean(x, 2)) == doctest::Approx(4.0));
        CHECK_THROWS_AS(tape.topk_mean(x, 4), std::invalid_argument);
        CHECK_THROWS_AS(tape.topk_mean(x, 0), std::invalid_argument);
    }
    SUBCASE("layer_norm rows have zero mean and unit variance pre gain/bias") {
        Rng rng(3);
        const int x = tape.input({4, 6}, random_values(rng, 24));
        const int gain = tape.input({1, 6}, std::vector<double>(6, 1.0));
        const int bias = tape.input({1, 6}, std::vector<double>(6, 0.0));
        const auto& y = tape.value(tape.layer_norm(x, gain, bias));
        for (std::size_t r = 0; r < 4; ++r) {
            double mean = 0.0, var = 0.0;
            for (std::size_t c = 0; c < 6; ++c) mean += y[r * 6 + c];
            mean /= 6.0;
            for (std::size_t c = 0; c < 6; ++c) {
                var += (y[r * 6 + c] - mean) * (y[r * 6 + c] - mean);
            }
            var /= 6.0;
            CHECK(std::fabs(mean) < 1e-9);
            CHECK(std::fabs(var - 1.0) < 1e-9);
        }
        CHECK_THROWS_AS(tape.layer_norm(tape.input({2, 0}, {}), gain, bias),
                        std::invalid_argument);
    }
    SUBCASE("masked softmax entries are exactly zero and rows sum to one") {
        const int x = tape.input({2, 3}, {1.0, 2.0, 3.0, -1.0, 0.5, 2.5});
        const Mask valid = {1, 0, 1, 1, 1, 0};
        const auto& y = tape.value(tape.row_softmax(x, &valid));
        CHECK(y[1] == 0.0);
        CHECK(y[5] == 0.0);
        CHECK(y[0] + y[2] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(y[3] + y[4] == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("shape mismatches are rejected") {
        Rng rng(1);
        const int a = tape.input({2, 3}, random_values(rng, 6));
        const int b = tape.input({2, 2}, {1, 2, 3, 4});
        CHECK_THROWS_AS(tape.matmul(a, a), std::invalid_argument);
        CHECK_THROWS_AS(tape.add(a, b), std::invalid_argument);
        CHECK_THROWS_AS(tape.mul(a, b), std::invalid_argument);
    }
}

TEST_CASE("softmax is invariant to constant row shifts") {
    Rng rng(5);
    Tape tape;
    const auto base = random_values(rng, 4 * 5);
    auto shifted = base;
    for (double& v : shifted) v += 7.25;
    const auto& y0 = tape.value(tape.row_softmax(tape.input({4, 5}, base)));
    const auto& y1 = tape.value(tape.row_softmax(tape.input({4, 5}, shifted)));
    for (std::size_t i = 0; i < y0.size(); ++i) CHECK(std::fabs(y0[i] - y1[i]) < 1e-12);
}

TEST_CASE("analytic gradients match central finite differences on every primitive") {
    Rng rng(42);
    const Shape s{4, 5};
    const double tol = 1e-6;
    const auto values = [&] { return random_values(rng, s.numel()); };

    const auto check1 = [&](const char* name,
                            const std::function<int(Tape&, int)>& op,
                            std::vector<double> input) {
        const std::uint64_t key = fnv1a64(name);
        const auto r = gradcheck(
            [&](Tape& t, const std::vector<int>& ids) {
                return weighted_sum(t, op(t, ids[0]), key);
            },
            {s}, {std::move(input)});
        CHECK_MESSAGE(r.max_rel_err < tol, name, ": max rel err ", r.max_rel_err);
    };

    check1("sigmoid", [](Tape& t, int x) { return t.sigmoid(x); }, values());
    check1("tanh", [](Tape& t, int x) { return t.tanh(x); }, values());
    check1("exp", [](Tape& t, int x) { return t.exp(x); }, values());
    check1("abs", [](Tape& t, int x) { return t.abs(x); }, values());
    check1("neg", [](Tape& t, int x) { return t.neg(x); }, values());
    check1("scale", [](Tape& t, int x) { return t.scale(x, -1.7); }, values());
    check1("add_const", [](Tape& t, int x) { return t.add_const(x, 0.4); }, values());
    check1("transpose", [](Tape& t, int x) { return t.transpose(x); }, values());
    check1("slice_rows", [](Tape& t, int x) { return t.slice_rows(x, 1, 3); }, values());
    check1("row_softmax", [](Tape& t, int x) { return t.row_softmax(x); }, values());
    check1("row_logsumexp", [](Tape& t, int x) { return t.row_logsumexp(x); }, values());
    check1("l2_normalize_rows", [](Tape& t, int x) { return t.l2_normalize_rows(x); },
           values());
    check1("pick", [](Tape& t, int x) { return t.pick(x, 2, 3); }, values());
    check1("sum_all", [](Tape& t, int x) { return t.sum_all(x); }, values());

    const Mask row_mask = {1, 0, 1, 1};
    check1("mean_over_valid",
           [&](Tape& t, int x) { return t.mean_over_valid(x, row_mask); }, values());
    const Mask entry_mask = [&] {
        Mask m(s.numel(), 1);
        m[3] = m[7] = m[11] = 0;
        return m;
    }();
    check1("masked_row_softmax",
           [&](Tape& t, int x) { return t.row_softmax(x, &entry_mask); }, values());
    check1("masked_row_logsumexp",
           [&](Tape& t, int x) { return t.row_logsumexp(x, &entry_mask); }, values());
    check1("topk_mean", [&](Tape& t, int x) { return t.topk_mean(x, 5, &entry_mask); },
           values());
    check1("max_over_valid",
           [&](Tape& t, int x) { return t.max_over_valid(x, entry_mask); }, values());

    SUBCASE("binary ops") {
        auto r = gradcheck(
            [&](Tape& t, const std::vector<int>& ids) {
                return weighted_sum(t, t.matmul(ids[0], t.transpose(ids[1])), 90);
            },
            {s, s}, {values(), values()});
        CHECK_MESSAGE(r.max_rel_err < tol, "matmul: ", r.max_rel_err);

        r = gradcheck(
            [&](Tape& t, const std::vector<int>& ids) {
                return weighted_sum(t, t.mul(t.add(ids[0], ids[1]), ids[0]), 91);
            },
            {s, s}, {values(), values()});
        CHECK_MESSAGE(r.max_rel_err < tol, "add/mul: ", r.max_rel_err);

        r = gradcheck(
            [&](Tape& t, const std::vector<int>& ids) {
                return weighted_sum(t, t.add(ids[0], ids[1]), 92);  // row broadcast
            },
            {s, {1, 5}}, {values(), random_values(rng, 5)});
        CHECK_MESSAGE(r.max_rel_err < tol, "broadcast add: ", r.max_rel_err);

        r = gradcheck(
            [&](Tape& t, const std::vector<int>& ids) {
                return weighted_sum(t, t.badd(t.bmul(ids[1], ids[0]), ids[2]), 93);
            },
            {s, {1, 1}, {1, 1}}, {values(), {0.7}, {-0.3}});
        CHECK_MESSAGE(r.max_rel_err < tol, "bmul/badd: ", r.max_rel_err);

        r = gradcheck(
            [&](Tape& t, const std::vector<int>& ids) {
                return weighted_sum(t, t.concat_rows({ids[0], ids[1]}), 94);
            },
            {s, s}, {values(), values()});
        CHECK_MESSAGE(r.max_rel_err < tol, "concat_rows: ", r.max_rel_err);

        r = gradcheck(
            [&](Tape& t, const std::vector<int>& ids) {
                return weighted_sum(t, t.layer_norm(ids[0], ids[1], ids[2]), 95);
            },
            {s, {1, 5}, {1, 5}},
            {values(), random_values(rng, 5, 0.5, 1.5), random_values(rng, 5)});
        CHECK_MESSAGE(r.max_rel_err < tol, "layer_norm: ", r.max_rel_err);

        r = gradcheck(
            [&](Tape& t, const std::vector<int>& ids) {
                return t.bce_with_logits(t.pick(ids[0], 0, 0), 1.0);
            },
            {{1, 1}}, {{0.37}});
        CHECK_MESSAGE(r.max_rel_err < tol, "bce_with_logits: ", r.max_rel_err);
    }
}

TEST_CASE("gradient of sigmoid at zero is 0.25") {
    Tape tape;
    const int x = tape.scalar(0.0);
    tape.backward(tape.sigmoid(x));
    CHECK(tape.grad(x)[0] == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("masked softmax entries receive exactly zero gradient") {
    Tape tape;
    const int x = tape.input({2, 3}, {1.0, 2.0, 3.0, 0.0, -1.0, 0.5});
    const Mask valid = {1, 0, 1, 1, 1, 0};
    const int y = tape.row_softmax(x, &valid);
    tape.backward(tape.sum_all(tape.mul(y, y)));
    CHECK(tape.grad(x)[1] == 0.0);
    CHECK(tape.grad(x)[5] == 0.0);
    CHECK(tape.grad(x)[0] != 0.0);
}

TEST_CASE("mil-style pooling gradient lands only on the selected entries") {
    Tape tape;
    const int x = tape.input({5, 1}, {0.1, 0.9, 0.4, 0.9, -0.2});
    const Mask all(5, 1);
    tape.backward(tape.topk_mean(x, 2, &all));
    // ties broken by earliest index: entries 1 and 3 share the top value
    CHECK(tape.grad(x) == std::vector<double>{0.0, 0.5, 0.0, 0.5, 0.0});

    Tape tape2;
    const int x2 = tape2.input({5, 1}, {0.1, 0.9, 0.4, 0.6, -0.2});
    tape2.backward(tape2.max_over_valid(x2, all));
    CHECK(tape2.grad(x2) == std::vector<double>{0.0, 1.0, 0.0, 0.0, 0.0});
}

TEST_CASE("tape replay is deterministic") {
    const auto run = [] {
        Rng rng(123);
        Tape tape;
        const int x = tape.input({3, 4}, random_values(rng, 12));
        const int y = tape.row_softmax(tape.tanh(tape.scale(x, 1.3)));
        const int loss = tape.sum_all(tape.mul(y, y));
        tape.backward(loss);
        return std::make_pair(tape.value(loss), tape.grad(x));
    };
    const auto a = run();
    const auto b = run();
    CHECK(a.first == b.first);
    CHECK(a.second == b.second);
}

TEST_CASE("backward demands a scalar loss") {
    Tape tape;
    const int x = tape.input({2, 2}, {1, 2, 3, 4});
    CHECK_THROWS_AS(tape.backward(x), std::invalid_argument);
}

TEST_CASE("adam: zero gradient leaves fresh parameters unchanged") {
    std::vector<double> p = {1.0, -2.0, 0.5};
    const std::vector<double> g(3, 0.0);
    AdamState state;
    adam_step({&p}, {&g}, state, {});
    CHECK(p == std::vector<double>{1.0, -2.0, 0.5});
}

TEST_CASE("adam: first step moves by about -lr * sign(gradient)") {
    std::vector<double> p = {0.0, 0.0};
    const std::vector<double> g = {0.73, -1.9};
    AdamState state;
    AdamConfig cfg;
    cfg.lr = 0.05;
    adam_step({&p}, {&g}, state, cfg);
    CHECK(p[0] == doctest::Approx(-0.05).epsilon(1e-4));
    CHECK(p[1] == doctest::Approx(0.05).epsilon(1e-4));
}

TEST_CASE("adam drives a quadratic bowl below 1e-3 in 500 steps") {
    std::vector<double> w = {3.0, -1.5, 2.2, 0.7};
    AdamState state;
    AdamConfig cfg;
    cfg.lr = 0.05;
    for (int step = 0; step < 500; ++step) {
        std::vector<double> g(w.size());
        for (std::size_t i = 0; i < w.size(); ++i) g[i] = 2.0 * w[i];
        adam_step({&w}, {&g}, state, cfg);
    }
    double norm = 0.0;
    for (double v : w) norm += v * v;
    CHECK(std::sqrt(norm) < 1e-3);
}

TEST_CASE("adam rejects mismatched shapes") {
    std::vector<double> p = {1.0, 2.0};
    const std::vector<double> g = {1.0};
    AdamState state;
    CHECK_THROWS_AS(adam_step({&p}, {&g}, state, {}), std::invalid_argument);
}
