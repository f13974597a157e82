#pragma once

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace timid::ltl {

enum class Kind { True, False, Atom, Not, And, Or, Globally, Until };

class Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

// Immutable AST node. Unary operators use `left`; `atom` is set for Kind::Atom.
class Formula {
public:
    Kind kind;
    std::string atom;
    FormulaPtr left;
    FormulaPtr right;

    static FormulaPtr make_true();
    static FormulaPtr make_false();
    static FormulaPtr make_atom(std::string name);
    static FormulaPtr make_not(FormulaPtr child);
    static FormulaPtr make_and(FormulaPtr l, FormulaPtr r);
    static FormulaPtr make_or(FormulaPtr l, FormulaPtr r);
    static FormulaPtr make_globally(FormulaPtr child);
    static FormulaPtr make_until(FormulaPtr l, FormulaPtr r);

private:
    Formula(Kind k, std::string a, FormulaPtr l, FormulaPtr r)
        : kind(k), atom(std::move(a)), left(std::move(l)), right(std::move(r)) {}
};

bool equals(const Formula& a, const Formula& b);

// Truth assignment for one time step; every declared proposition has an entry.
class PropositionState {
public:
    PropositionState() = default;
    PropositionState(std::initializer_list<std::pair<const std::string, bool>> init)
        : values_(init) {}

    void set(const std::string& name, bool value) { values_[name] = value; }
    bool get(const std::string& name) const;
    bool contains(const std::string& name) const { return values_.count(name) > 0; }
    const std::map<std::string, bool>& values() const { return values_; }

private:
    std::map<std::string, bool> values_;
};

struct ParseError : std::runtime_error {
    ParseError(const std::string& msg, std::size_t pos)
        : std::runtime_error(msg + " (at position " + std::to_string(pos) + ")"),
          position(pos) {}
    std::size_t position;
};

struct UnknownAtomError : std::runtime_error {
    explicit UnknownAtomError(const std::string& name)
        : std::runtime_error("unknown atomic proposition: " + name) {}
};

enum class MonitorStatus { Satisfied, Violated, Undetermined };

struct MonitorVerdict {
    MonitorStatus status = MonitorStatus::Undetermined;
    std::optional<std::size_t> first_violation_step;
    std::vector<bool> per_step_violation;
};

// Grammar: atoms are identifiers; `!` not, `&` and, `|` or, `G` globally
// (prefix), `U` until (binary, right-associative); parentheses; precedence
// NOT > AND > OR > UNTIL. `true`/`false` are constants.
FormulaPtr parse(std::string_view text);

// Minimal-parenthesis rendering; parse(to_string(f)) is structurally equal to f.
std::string to_string(const Formula& f);

// Finite-trace truth at position 0. Globally requires its child at every
// step; Until is strong (the right operand must occur within the trace).
bool eval_finite(const Formula& f, std::span<const PropositionState> trace);

// Residual obligation after consuming one state. The result is simplified so
// that fully discharged / violated residuals are syntactically True / False.
FormulaPtr progress(const FormulaPtr& f, const PropositionState& state);

// Whether the residual is satisfied by the empty remaining suffix (end of
// trace): Globally obligations resolve true, strong Until obligations false.
bool accepts_empty(const Formula& f);

// Step-by-step progression over a trace. Status stays Undetermined until the
// residual collapses to a constant; finish() applies end-of-trace resolution.
class ProgressionMonitor {
public:
    explicit ProgressionMonitor(FormulaPtr f);

    MonitorStatus step(const PropositionState& state);
    MonitorVerdict finish() const;

    const FormulaPtr& residual() const { return residual_; }
    std::size_t steps_consumed() const { return per_step_violation_.size(); }

private:
    FormulaPtr residual_;
    std::optional<std::size_t> first_violation_step_;
    std::vector<bool> per_step_violation_;
};

// monitor(f, t).status == Violated  <=>  eval_finite(f, t) == false.
MonitorVerdict monitor(const FormulaPtr& f, std::span<const PropositionState> trace);

}  // namespace timid::ltl
