#include "timid/ltl.hpp"

#include <cctype>

namespace timid::ltl {

// ---------------------------------------------------------------------------
// AST construction
// ---------------------------------------------------------------------------

FormulaPtr Formula::make_true() {
    static const FormulaPtr t(new Formula(Kind::True, "", nullptr, nullptr));
    return t;
}

FormulaPtr Formula::make_false() {
    static const FormulaPtr f(new Formula(Kind::False, "", nullptr, nullptr));
    return f;
}

FormulaPtr Formula::make_atom(std::string name) {
    if (name.empty()) {
        throw std::invalid_argument("atom name must be nonempty");
    }
    return FormulaPtr(new Formula(Kind::Atom, std::move(name), nullptr, nullptr));
}

FormulaPtr Formula::make_not(FormulaPtr child) {
    return FormulaPtr(new Formula(Kind::Not, "", std::move(child), nullptr));
}

FormulaPtr Formula::make_and(FormulaPtr l, FormulaPtr r) {
    return FormulaPtr(new Formula(Kind::And, "", std::move(l), std::move(r)));
}

FormulaPtr Formula::make_or(FormulaPtr l, FormulaPtr r) {
    return FormulaPtr(new Formula(Kind::Or, "", std::move(l), std::move(r)));
}

FormulaPtr Formula::make_globally(FormulaPtr child) {
    return FormulaPtr(new Formula(Kind::Globally, "", std::move(child), nullptr));
}

FormulaPtr Formula::make_until(FormulaPtr l, FormulaPtr r) {
    return FormulaPtr(new Formula(Kind::Until, "", std::move(l), std::move(r)));
}

bool equals(const Formula& a, const Formula& b) {
    if (&a == &b) return true;
    if (a.kind != b.kind) return false;
    switch (a.kind) {
    case Kind::True:
    case Kind::False:
        return true;
    case Kind::Atom:
        return a.atom == b.atom;
    case Kind::Not:
    case Kind::Globally:
        return equals(*a.left, *b.left);
    case Kind::And:
    case Kind::Or:
    case Kind::Until:
        return equals(*a.left, *b.left) && equals(*a.right, *b.right);
    }
    return false;
}

bool PropositionState::get(const std::string& name) const {
    auto it = values_.find(name);
    if (it == values_.end()) {
        throw UnknownAtomError(name);
    }
    return it->second;
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace {

struct Token {
    enum Type { LParen, RParen, Not, And, Or, Globally, Until, True, False, Ident, End };
    Type type;
    std::string text;
    std::size_t pos;
};

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < text.size()) {
        const char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        switch (c) {
        case '(': out.push_back({Token::LParen, "(", i++}); continue;
        case ')': out.push_back({Token::RParen, ")", i++}); continue;
        case '!': out.push_back({Token::Not, "!", i++}); continue;
        case '&': out.push_back({Token::And, "&", i++}); continue;
        case '|': out.push_back({Token::Or, "|", i++}); continue;
        default: break;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = i;
            while (i < text.size() &&
                   (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_')) {
                ++i;
            }
            std::string word(text.substr(start, i - start));
            if (word == "G") {
                out.push_back({Token::Globally, word, start});
            } else if (word == "U") {
                out.push_back({Token::Until, word, start});
            } else if (word == "true") {
                out.push_back({Token::True, word, start});
            } else if (word == "false") {
                out.push_back({Token::False, word, start});
            } else {
                out.push_back({Token::Ident, word, start});
            }
            continue;
        }
        throw ParseError(std::string("unknown operator '") + c + "'", i);
    }
    out.push_back({Token::End, "", text.size()});
    return out;
}

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

    FormulaPtr run() {
        FormulaPtr f = parse_until();
        if (peek().type != Token::End) {
            throw ParseError("unexpected token '" + peek().text + "'", peek().pos);
        }
        return f;
    }

private:
    const Token& peek() const { return tokens_[cursor_]; }
    Token take() { return tokens_[cursor_++]; }

    // until := or ('U' until)?     right-associative
    FormulaPtr parse_until() {
        FormulaPtr left = parse_or();
        if (peek().type == Token::Until) {
            take();
            return Formula::make_until(std::move(left), parse_until());
        }
        return left;
    }

    FormulaPtr parse_or() {
        FormulaPtr f = parse_and();
        while (peek().type == Token::Or) {
            take();
            f = Formula::make_or(std::move(f), parse_and());
        }
        return f;
    }

    FormulaPtr parse_and() {
        FormulaPtr f = parse_unary();
        while (peek().type == Token::And) {
            take();
            f = Formula::make_and(std::move(f), parse_unary());
        }
        return f;
    }

    FormulaPtr parse_unary() {
        if (peek().type == Token::Not) {
            take();
            return Formula::make_not(parse_unary());
        }
        if (peek().type == Token::Globally) {
            take();
            return Formula::make_globally(parse_unary());
        }
        return parse_primary();
    }

    FormulaPtr parse_primary() {
        Token t = take();
        switch (t.type) {
        case Token::LParen: {
            FormulaPtr f = parse_until();
            if (peek().type != Token::RParen) {
                throw ParseError("expected ')'", peek().pos);
            }
            take();
            return f;
        }
        case Token::True:
            return Formula::make_true();
        case Token::False:
            return Formula::make_false();
        case Token::Ident:
            return Formula::make_atom(t.text);
        case Token::End:
            throw ParseError("unexpected end of input", t.pos);
        default:
            throw ParseError("unexpected token '" + t.text + "'", t.pos);
        }
    }

    std::vector<Token> tokens_;
    std::size_t cursor_ = 0;
};

}  // namespace

FormulaPtr parse(std::string_view text) {
    return Parser(tokenize(text)).run();
}

// ---------------------------------------------------------------------------
// Printer
// ---------------------------------------------------------------------------

namespace {

// 0: atoms/constants, 1: unary, 2: and, 3: or, 4: until
int precedence(Kind k) {
    switch (k) {
    case Kind::Not:
    case Kind::Globally: return 1;
    case Kind::And: return 2;
    case Kind::Or: return 3;
    case Kind::Until: return 4;
    default: return 0;
    }
}

void print_rec(const Formula& f, std::string& out, int max_prec) {
    const int prec = precedence(f.kind);
    const bool parens = prec > max_prec;
    if (parens) out += '(';
    switch (f.kind) {
    case Kind::True: out += "true"; break;
    case Kind::False: out += "false"; break;
    case Kind::Atom: out += f.atom; break;
    case Kind::Not:
        out += '!';
        print_rec(*f.left, out, 1);
        break;
    case Kind::Globally:
        out += "G ";
        print_rec(*f.left, out, 1);
        break;
    case Kind::And:
        print_rec(*f.left, out, 2);
        out += " & ";
        print_rec(*f.right, out, 1);  // right-nesting needs parens
        break;
    case Kind::Or:
        print_rec(*f.left, out, 3);
        out += " | ";
        print_rec(*f.right, out, 2);
        break;
    case Kind::Until:
        print_rec(*f.left, out, 3);  // left-nesting needs parens
        out += " U ";
        print_rec(*f.right, out, 4);
        break;
    }
    if (parens) out += ')';
}

}  // namespace

std::string to_string(const Formula& f) {
    std::string out;
    print_rec(f, out, 4);
    return out;
}

// ---------------------------------------------------------------------------
// Finite-trace evaluation
// ---------------------------------------------------------------------------

namespace {

bool eval_at(const Formula& f, std::span<const PropositionState> trace, std::size_t i) {
    switch (f.kind) {
    case Kind::True: return true;
    case Kind::False: return false;
    case Kind::Atom: return trace[i].get(f.atom);
    case Kind::Not: return !eval_at(*f.left, trace, i);
    case Kind::And: {
        const bool l = eval_at(*f.left, trace, i);
        const bool r = eval_at(*f.right, trace, i);
        return l && r;
    }
    case Kind::Or: {
        const bool l = eval_at(*f.left, trace, i);
        const bool r = eval_at(*f.right, trace, i);
        return l || r;
    }
    case Kind::Globally:
        for (std::size_t j = i; j < trace.size(); ++j) {
            if (!eval_at(*f.left, trace, j)) return false;
        }
        return true;
    case Kind::Until:
        for (std::size_t j = i; j < trace.size(); ++j) {
            if (eval_at(*f.right, trace, j)) return true;
            if (!eval_at(*f.left, trace, j)) return false;
        }
        return false;  // strong until: right operand never occurred
    }
    return false;
}

}  // namespace

bool eval_finite(const Formula& f, std::span<const PropositionState> trace) {
    if (trace.empty()) {
        throw std::invalid_argument("eval_finite: trace must be nonempty");
    }
    return eval_at(f, trace, 0);
}

// ---------------------------------------------------------------------------
// Progression
// ---------------------------------------------------------------------------

namespace {

// Local rewrites only: constant folding, double negation, idempotence.
FormulaPtr s_not(FormulaPtr x) {
    if (x->kind == Kind::True) return Formula::make_false();
    if (x->kind == Kind::False) return Formula::make_true();
    if (x->kind == Kind::Not) return x->left;
    return Formula::make_not(std::move(x));
}

FormulaPtr s_and(FormulaPtr a, FormulaPtr b) {
    if (a->kind == Kind::False || b->kind == Kind::False) return Formula::make_false();
    if (a->kind == Kind::True) return b;
    if (b->kind == Kind::True) return a;
    if (equals(*a, *b)) return a;
    return Formula::make_and(std::move(a), std::move(b));
}

FormulaPtr s_or(FormulaPtr a, FormulaPtr b) {
    if (a->kind == Kind::True || b->kind == Kind::True) return Formula::make_true();
    if (a->kind == Kind::False) return b;
    if (b->kind == Kind::False) return a;
    if (equals(*a, *b)) return a;
    return Formula::make_or(std::move(a), std::move(b));
}

}  // namespace

FormulaPtr progress(const FormulaPtr& f, const PropositionState& state) {
    switch (f->kind) {
    case Kind::True:
    case Kind::False:
        return f;
    case Kind::Atom:
        return state.get(f->atom) ? Formula::make_true() : Formula::make_false();
    case Kind::Not:
        return s_not(progress(f->left, state));
    case Kind::And:
        return s_and(progress(f->left, state), progress(f->right, state));
    case Kind::Or:
        return s_or(progress(f->left, state), progress(f->right, state));
    case Kind::Globally:
        // prog(G x) = prog(x) & G x
        return s_and(progress(f->left, state), f);
    case Kind::Until:
        // prog(x U y) = prog(y) | (prog(x) & (x U y))
        return s_or(progress(f->right, state), s_and(progress(f->left, state), f));
    }
    throw std::logic_error("progress: unreachable");
}

bool accepts_empty(const Formula& f) {
    switch (f.kind) {
    case Kind::True: return true;
    case Kind::False: return false;
    case Kind::Atom: return false;  // no state left to witness it
    case Kind::Not: return !accepts_empty(*f.left);
    case Kind::And: return accepts_empty(*f.left) && accepts_empty(*f.right);
    case Kind::Or: return accepts_empty(*f.left) || accepts_empty(*f.right);
    case Kind::Globally: return true;   // vacuous over the empty suffix
    case Kind::Until: return false;     // strong until demands a witness
    }
    return false;
}

// ---------------------------------------------------------------------------
// Monitor
// ---------------------------------------------------------------------------

ProgressionMonitor::ProgressionMonitor(FormulaPtr f) : residual_(std::move(f)) {}

MonitorStatus ProgressionMonitor::step(const PropositionState& state) {
    residual_ = progress(residual_, state);
    const bool violated_now = residual_->kind == Kind::False;
    per_step_violation_.push_back(violated_now);
    if (violated_now && !first_violation_step_) {
        first_violation_step_ = per_step_violation_.size() - 1;
    }
    if (residual_->kind == Kind::False) return MonitorStatus::Violated;
    if (residual_->kind == Kind::True) return MonitorStatus::Satisfied;
    return MonitorStatus::Undetermined;
}

MonitorVerdict ProgressionMonitor::finish() const {
    MonitorVerdict v;
    v.per_step_violation = per_step_violation_;
    v.first_violation_step = first_violation_step_;
    if (first_violation_step_) {
        v.status = MonitorStatus::Violated;
        return v;
    }
    if (accepts_empty(*residual_)) {
        v.status = MonitorStatus::Satisfied;
    } else {
        // Unfulfilled strong obligation surfaces at the final step.
        v.status = MonitorStatus::Violated;
        const std::size_t last = per_step_violation_.size() - 1;
        v.first_violation_step = last;
        v.per_step_violation[last] = true;
    }
    return v;
}

MonitorVerdict monitor(const FormulaPtr& f, std::span<const PropositionState> trace) {
    if (trace.empty()) {
        throw std::invalid_argument("monitor: trace must be nonempty");
    }
    ProgressionMonitor m(f);
    for (const auto& state : trace) {
        m.step(state);
    }
    return m.finish();
}

}  // namespace timid::ltl
