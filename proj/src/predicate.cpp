#include "ssmcheck/predicate.hpp"

namespace ssmcheck {

namespace {

PredPtr make(PredicateExpr e) {
    return std::make_shared<const PredicateExpr>(std::move(e));
}

} // namespace

PredPtr predTrue() {
    static const PredPtr t = [] {
        PredicateExpr e;
        e.kind = PredKind::True;
        return make(std::move(e));
    }();
    return t;
}

PredPtr predFalse() {
    static const PredPtr f = [] {
        PredicateExpr e;
        e.kind = PredKind::False;
        return make(std::move(e));
    }();
    return f;
}

PredPtr predStateEq(std::string automaton, std::string state, SourcePos pos) {
    PredicateExpr e;
    e.kind = PredKind::StateEq;
    e.automatonName = std::move(automaton);
    e.stateName = std::move(state);
    e.pos = pos;
    return make(std::move(e));
}

PredPtr predInState(std::string automaton, std::string state, SourcePos pos) {
    PredicateExpr e;
    e.kind = PredKind::InState;
    e.automatonName = std::move(automaton);
    e.stateName = std::move(state);
    e.pos = pos;
    return make(std::move(e));
}

PredPtr predRef(std::string name, SourcePos pos) {
    PredicateExpr e;
    e.kind = PredKind::Ref;
    e.refName = std::move(name);
    e.pos = pos;
    return make(std::move(e));
}

PredPtr predNot(PredPtr a) {
    PredicateExpr e;
    e.kind = PredKind::Not;
    e.children.push_back(std::move(a));
    return make(std::move(e));
}

PredPtr predAnd(PredPtr a, PredPtr b) {
    PredicateExpr e;
    e.kind = PredKind::And;
    e.children.push_back(std::move(a));
    e.children.push_back(std::move(b));
    return make(std::move(e));
}

PredPtr predAnd(std::vector<PredPtr> terms) {
    if (terms.empty()) return predTrue();
    if (terms.size() == 1) return terms[0];
    PredicateExpr e;
    e.kind = PredKind::And;
    e.children = std::move(terms);
    return make(std::move(e));
}

PredPtr predOr(PredPtr a, PredPtr b) {
    PredicateExpr e;
    e.kind = PredKind::Or;
    e.children.push_back(std::move(a));
    e.children.push_back(std::move(b));
    return make(std::move(e));
}

PredPtr predOr(std::vector<PredPtr> terms) {
    if (terms.empty()) return predFalse();
    if (terms.size() == 1) return terms[0];
    PredicateExpr e;
    e.kind = PredKind::Or;
    e.children = std::move(terms);
    return make(std::move(e));
}

bool structurallyEqual(const PredicateExpr& a, const PredicateExpr& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case PredKind::True:
        case PredKind::False:
            return true;
        case PredKind::StateEq:
        case PredKind::InState:
            return a.automatonName == b.automatonName && a.stateName == b.stateName;
        case PredKind::Ref:
            return a.refName == b.refName;
        case PredKind::Not:
        case PredKind::And:
        case PredKind::Or:
            if (a.children.size() != b.children.size()) return false;
            for (size_t i = 0; i < a.children.size(); ++i) {
                if (!structurallyEqual(*a.children[i], *b.children[i])) return false;
            }
            return true;
    }
    return false;
}

namespace {

// Precedence: Or (1) < And (2) < Not (3) < atoms (4).
int precedence(PredKind k) {
    switch (k) {
        case PredKind::Or: return 1;
        case PredKind::And: return 2;
        case PredKind::Not: return 3;
        default: return 4;
    }
}

void printRec(const PredicateExpr& e, int parentPrec, std::string& out) {
    const int myPrec = precedence(e.kind);
    const bool parens = myPrec < parentPrec;
    if (parens) out += '(';
    switch (e.kind) {
        case PredKind::True: out += "true"; break;
        case PredKind::False: out += "false"; break;
        case PredKind::StateEq:
            out += e.automatonName + ".state == " + e.stateName;
            break;
        case PredKind::InState:
            out += e.automatonName + ".in(" + e.stateName + ")";
            break;
        case PredKind::Ref:
            out += e.refName;
            break;
        case PredKind::Not:
            out += '!';
            printRec(*e.children[0], myPrec + 1, out);
            break;
        case PredKind::And:
            for (size_t i = 0; i < e.children.size(); ++i) {
                if (i) out += " & ";
                printRec(*e.children[i], myPrec, out);
            }
            break;
        case PredKind::Or:
            for (size_t i = 0; i < e.children.size(); ++i) {
                if (i) out += " | ";
                printRec(*e.children[i], myPrec, out);
            }
            break;
    }
    if (parens) out += ')';
}

} // namespace

std::string printPredicate(const PredicateExpr& expr) {
    std::string out;
    printRec(expr, 0, out);
    return out;
}

} // namespace ssmcheck
