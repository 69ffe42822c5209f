#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ssmcheck/diagnostics.hpp"

namespace ssmcheck {

// Boolean state predicates over the local states of the automata in a model.
//
// Atoms refer to automata, states, and named predicates by NAME; the integer
// indices are filled in by SystemModel::resolve() after every structural
// transformation, so expressions survive automata being added or replaced.
enum class PredKind : uint8_t {
    True,
    False,
    StateEq,  // <automaton>.state == <state>
    InState,  // <automaton>.in(<state>)  -- may expand to a defined formula
    Ref,      // reference to a named predicate
    Not,
    And,
    Or,
};

struct PredicateExpr;
using PredPtr = std::shared_ptr<const PredicateExpr>;

struct PredicateExpr {
    PredKind kind = PredKind::True;

    // StateEq / InState
    std::string automatonName;
    std::string stateName;
    // Ref
    std::string refName;

    // Filled by SystemModel::resolve(). automatonIndex values below -1 are
    // sentinels for failure automata that are declared but not yet
    // materialized (-2 - declIndex); evaluating a sentinel is an internal error.
    int32_t automatonIndex = -1;
    int32_t stateIndex = -1;
    int32_t refIndex = -1;
    int32_t inExpansionIndex = -1;  // InState with a registered expansion

    std::vector<PredPtr> children;
    SourcePos pos;
};

PredPtr predTrue();
PredPtr predFalse();
PredPtr predStateEq(std::string automaton, std::string state, SourcePos pos = {});
PredPtr predInState(std::string automaton, std::string state, SourcePos pos = {});
PredPtr predRef(std::string name, SourcePos pos = {});
PredPtr predNot(PredPtr a);
PredPtr predAnd(PredPtr a, PredPtr b);
PredPtr predAnd(std::vector<PredPtr> terms);
PredPtr predOr(PredPtr a, PredPtr b);
PredPtr predOr(std::vector<PredPtr> terms);

// Structural equality on the name-level representation (indices ignored).
bool structurallyEqual(const PredicateExpr& a, const PredicateExpr& b);

// Renders the expression in the concrete syntax of the modeling language.
std::string printPredicate(const PredicateExpr& expr);

} // namespace ssmcheck
