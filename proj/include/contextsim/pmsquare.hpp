#pragma once

#include <string>
#include <vector>

#include "contextsim/qcore.hpp"

// The six spin/path observables of the Peres-Mermin construction, the five
// commuting contexts built from them, the maximally entangled spin-path state,
// and the two state-dependent inequality values they predict.

namespace contextsim::pmsquare {

enum class ObservableId {
    SpinX,       // sigma_x on spin
    SpinY,       // sigma_y on spin
    PathX,       // sigma_x on path
    PathY,       // sigma_y on path
    SpinXPathY,  // sigma_x (x) sigma_y, measured as one product observable
    SpinYPathX,  // sigma_y (x) sigma_x, measured as one product observable
    SpinZPathZ,  // sigma_z (x) sigma_z = (sigma_x (x) sigma_y)(sigma_y (x) sigma_x)
};

struct Observable {
    ObservableId id;
    qcore::ComplexMatrix matrix;
};

enum class ContextId { C1, C2, C3, C4, C5 };

// A set of mutually commuting observables measured together, with the sign the
// context's product term carries in the inequalities.
struct Context {
    ContextId id;
    std::vector<Observable> observables;
    int coefficient;  // +1 or -1
};

enum class Inequality {
    Eq6,  // all five context terms; classical bound 3, quantum value 5
    Eq7,  // the three state-dependent terms; classical bound 1, quantum value 3
};

// (1/sqrt 2) (|down,I> - |up,II>): anticorrelated in every spin/path direction.
const qcore::StateVector& bell_state();

const Observable& observable(ObservableId id);
const std::vector<Context>& contexts();
const Context& context(ContextId id);

// Contexts entering an inequality, in C1..C5 order.
std::vector<Context> inequality_contexts(Inequality which);

// Product of the context's observable matrices, in context order.
qcore::ComplexMatrix product_matrix(const Context& c);

// Sum of coefficient * <product of context observables> over the inequality's
// contexts, evaluated by direct traces.
double ideal_inequality_value(const qcore::DensityMatrix& state, Inequality which);
double ideal_inequality_value(const qcore::StateVector& state, Inequality which);

std::string observable_name(ObservableId id);
std::string context_name(ContextId id);
std::string inequality_name(Inequality which);

}  // namespace contextsim::pmsquare
