#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_support.hpp"
#include "timid/ltl.hpp"
#include "timid/rng.hpp"

using namespace timid;
using namespace timid::ltl;
using timid::test::nth_trace;
using timid::test::random_formula;
using timid::test::random_trace;

namespace {

PropositionState state(bool lion, bool ball) {
    PropositionState s;
    s.set("Lion", lion);
    s.set("Ball", ball);
    return s;
}

const FormulaPtr mutex_formula = parse("G !(Lion & Ball)");
const FormulaPtr order_formula = parse("!Lion U Ball");

}  // namespace

TEST_CASE("parser builds the expected trees") {
    const FormulaPtr f = parse("G !(Lion & Ball)");
    REQUIRE(f->kind == Kind::Globally);
    REQUIRE(f->left->kind == Kind::Not);
    REQUIRE(f->left->left->kind == Kind::And);
    CHECK(f->left->left->left->atom == "Lion");
    CHECK(f->left->left->right->atom == "Ball");

    const FormulaPtr g = parse("!Lion U Ball");
    REQUIRE(g->kind == Kind::Until);
    CHECK(g->left->kind == Kind::Not);
    CHECK(g->left->left->atom == "Lion");
    CHECK(g->right->atom == "Ball");

    const FormulaPtr atom = parse("Lion");
    CHECK(atom->kind == Kind::Atom);
    CHECK(atom->atom == "Lion");
}

TEST_CASE("parser precedence: NOT > AND > OR > UNTIL, U right-associative") {
    CHECK(equals(*parse("a & b | c U d"),
                 *Formula::make_until(
                     Formula::make_or(Formula::make_and(Formula::make_atom("a"),
                                                        Formula::make_atom("b")),
                                      Formula::make_atom("c")),
                     Formula::make_atom("d"))));
    CHECK(equals(*parse("a U b U c"),
                 *Formula::make_until(Formula::make_atom("a"),
                                      Formula::make_until(Formula::make_atom("b"),
                                                          Formula::make_atom("c")))));
    CHECK(equals(*parse("G a & b"), *parse("(G a) & b")));
    CHECK(equals(*parse("!a & b"), *parse("(!a) & b")));
    CHECK(equals(*parse("true | false"),
                 *Formula::make_or(Formula::make_true(), Formula::make_false())));
}

TEST_CASE("parser reports positions on malformed input") {
    CHECK_THROWS_AS(parse(""), ParseError);
    CHECK_THROWS_AS(parse("G (Lion"), ParseError);
    CHECK_THROWS_AS(parse("Lion Ball"), ParseError);
    CHECK_THROWS_AS(parse("Lion & "), ParseError);
    try {
        parse("Lion @ Ball");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.position == 5);
        CHECK(std::string(e.what()).find("unknown operator") != std::string::npos);
    }
}

TEST_CASE("print/parse round-trip over a 50-formula corpus") {
    Rng rng(2024);
    std::vector<FormulaPtr> corpus = {
        mutex_formula, order_formula, parse("true U (Lion & !Ball)"),
        parse("G (Lion | Ball) & !G Lion"), parse("(a U b) U (c U d)"),
    };
    while (corpus.size() < 50) corpus.push_back(random_formula(rng, 4));
    for (const auto& f : corpus) {
        const std::string printed = to_string(*f);
        const FormulaPtr reparsed = parse(printed);
        CHECK_MESSAGE(equals(*f, *reparsed), "round-trip failed for: ", printed);
    }
}

TEST_CASE("eval_finite on the task formulas") {
    const std::vector<PropositionState> mutex_bad = {state(false, false), state(true, true)};
    CHECK_FALSE(eval_finite(*mutex_formula, mutex_bad));

    const std::vector<PropositionState> order_good = {state(false, true), state(true, false)};
    CHECK(eval_finite(*order_formula, order_good));

    // strong until: Ball must occur within the trace
    const std::vector<PropositionState> never_ball = {state(false, false), state(false, false)};
    CHECK_FALSE(eval_finite(*order_formula, never_ball));

    // simultaneous Lion & first Ball does not violate the ordering
    const std::vector<PropositionState> simultaneous = {state(false, false), state(true, true)};
    CHECK(eval_finite(*order_formula, simultaneous));
}

TEST_CASE("eval_finite rejects unknown atoms and empty traces") {
    const std::vector<PropositionState> no_ball = {[] {
        PropositionState s;
        s.set("Lion", true);
        return s;
    }()};
    CHECK_THROWS_AS(eval_finite(*order_formula, no_ball), UnknownAtomError);
    CHECK_THROWS_AS(eval_finite(*order_formula, std::span<const PropositionState>{}),
                    std::invalid_argument);
}

TEST_CASE("progression rules and simplification") {
    // prog(G !(L & B)) under L = B = 1 collapses to False
    CHECK(progress(mutex_formula, state(true, true))->kind == Kind::False);
    // untouched obligation is returned unchanged
    CHECK(equals(*progress(order_formula, state(false, false)), *order_formula));
    // violated until collapses to False
    CHECK(progress(order_formula, state(true, false))->kind == Kind::False);
    // discharged until collapses to True
    CHECK(progress(order_formula, state(false, true))->kind == Kind::True);
    // compliant mutex step keeps the Globally obligation itself
    CHECK(equals(*progress(mutex_formula, state(true, false)), *mutex_formula));
}

TEST_CASE("monitor localizes the first violation") {
    std::vector<PropositionState> trace = {state(false, false), state(true, false),
                                           state(true, true), state(false, false)};
    const MonitorVerdict v = monitor(mutex_formula, trace);
    REQUIRE(v.status == MonitorStatus::Violated);
    REQUIRE(v.first_violation_step.has_value());
    CHECK(*v.first_violation_step == 2);
    CHECK(v.per_step_violation == std::vector<bool>{false, false, true, true});

    const std::vector<PropositionState> good = {state(false, false), state(false, true),
                                                state(true, false)};
    const MonitorVerdict ok = monitor(order_formula, good);
    CHECK(ok.status == MonitorStatus::Satisfied);
    CHECK_FALSE(ok.first_violation_step.has_value());
    CHECK(ok.per_step_violation == std::vector<bool>{false, false, false});
}

TEST_CASE("unfulfilled strong until is flagged at the final step") {
    const std::vector<PropositionState> never = {state(false, false), state(false, false),
                                                 state(false, false)};
    const MonitorVerdict v = monitor(order_formula, never);
    REQUIRE(v.status == MonitorStatus::Violated);
    CHECK(*v.first_violation_step == 2);
    CHECK(v.per_step_violation == std::vector<bool>{false, false, true});
}

TEST_CASE("progression monitor exposes undetermined in-flight status") {
    ProgressionMonitor m(order_formula);
    CHECK(m.step(state(false, false)) == MonitorStatus::Undetermined);
    CHECK(m.step(state(false, true)) == MonitorStatus::Satisfied);
    CHECK(m.finish().status == MonitorStatus::Satisfied);
}

TEST_CASE("monitor agrees with eval_finite on all 5460 short traces") {
    Rng rng(7);
    std::vector<FormulaPtr> formulas = {mutex_formula, order_formula};
    for (int i = 0; i < 10; ++i) formulas.push_back(random_formula(rng, 4));

    std::size_t traces_checked = 0;
    for (std::size_t len = 1; len <= 6; ++len) {
        const std::uint64_t count = 1ull << (2 * len);
        for (std::uint64_t idx = 0; idx < count; ++idx) {
            const auto trace = nth_trace(len, idx);
            ++traces_checked;
            for (const auto& f : formulas) {
                const bool truth = eval_finite(*f, trace);
                const MonitorVerdict v = monitor(f, trace);
                REQUIRE_MESSAGE((v.status == MonitorStatus::Violated) == !truth,
                                "disagreement on ", to_string(*f), " len ", len, " idx ", idx);
                if (v.status == MonitorStatus::Satisfied) {
                    for (bool b : v.per_step_violation) REQUIRE_FALSE(b);
                } else {
                    REQUIRE(v.per_step_violation[*v.first_violation_step]);
                }
            }
        }
    }
    CHECK(traces_checked == 5460);
}

TEST_CASE("conjunction law and negation duality") {
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const auto trace = random_trace(rng, 1 + rng.uniform_index(8));
        const FormulaPtr a = random_formula(rng, 3);
        const FormulaPtr b = random_formula(rng, 3);
        const FormulaPtr conj = Formula::make_and(a, b);
        CHECK(eval_finite(*conj, trace) == (eval_finite(*a, trace) && eval_finite(*b, trace)));
        CHECK(eval_finite(*Formula::make_not(a), trace) == !eval_finite(*a, trace));
    }
}
