#pragma once

#include <array>
#include <vector>

#include "contextsim/pmsquare.hpp"

// Noncontextual hidden-variable side: exhaustive enumeration of +-1 value
// assignments to the six measured observables, the classical bounds of both
// inequalities, and the parity argument showing no assignment can reproduce
// all five quantum predictions.

namespace contextsim::nchv {

// Order of values inside an Assignment.
inline constexpr std::array<pmsquare::ObservableId, 6> kAssignedObservables = {
    pmsquare::ObservableId::SpinX,      pmsquare::ObservableId::SpinY,
    pmsquare::ObservableId::PathX,      pmsquare::ObservableId::PathY,
    pmsquare::ObservableId::SpinXPathY, pmsquare::ObservableId::SpinYPathX,
};

struct Assignment {
    std::array<int, 6> values;  // +-1 each, kAssignedObservables order

    int value(pmsquare::ObservableId id) const;
};

// All 64 assignments; with `constrained` only the 16 whose product-observable
// values factorize: v(SpinXPathY) = v(SpinX) v(PathY) and
// v(SpinYPathX) = v(SpinY) v(PathX).
std::vector<Assignment> enumerate_assignments(bool constrained);

// Value a single assignment gives an inequality's left-hand side.
// `constrained` selects which assignment set Eq7 conventionally runs over; the
// expression itself only depends on the assignment.
double nchv_value(const Assignment& a, pmsquare::Inequality which);

struct BoundReport {
    int bound;
    Assignment witness;               // attains the bound
    int assignments_searched;
    std::vector<int> value_multiset;  // every enumerated value, sorted
};

// Maximum of nchv_value over the assignment set conventional for the
// inequality: all 64 for Eq6, the 16 factorizing ones for Eq7.  Passing
// `constrained = false` for Eq7 gives the negative control over all 64.
BoundReport nchv_bound(pmsquare::Inequality which);
BoundReport nchv_bound(pmsquare::Inequality which, bool constrained);

struct KsReport {
    int assignments = 64;
    int satisfying_all_five = 0;      // assignments matching all 5 predictions
    int max_satisfiable = 0;          // best number of predictions matched
    Assignment best_witness{};        // attains max_satisfiable
    bool lhs_product_always_plus_one = false;  // product of the 5 context products
    int rhs_product = 0;              // product of the 5 quantum predictions
};

// The five quantum predictions, context order C1..C5, as required products.
inline constexpr std::array<int, 5> kQuantumContextProducts = {-1, -1, +1, +1, -1};

KsReport ks_contradiction_report();

}  // namespace contextsim::nchv
