#include "contextsim/pmsquare.hpp"

#include <cmath>
#include <stdexcept>

namespace contextsim::pmsquare {

using qcore::ComplexMatrix;
using qcore::identity2;
using qcore::pauli_x;
using qcore::pauli_y;
using qcore::pauli_z;
using qcore::tensor;

const qcore::StateVector& bell_state() {
    static const qcore::StateVector psi = qcore::StateVector::from_amplitudes(
        {0.0, -1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0), 0.0});
    return psi;
}

const Observable& observable(ObservableId id) {
    static const std::vector<Observable> all = [] {
        std::vector<Observable> v;
        v.push_back({ObservableId::SpinX, tensor(pauli_x(), identity2())});
        v.push_back({ObservableId::SpinY, tensor(pauli_y(), identity2())});
        v.push_back({ObservableId::PathX, tensor(identity2(), pauli_x())});
        v.push_back({ObservableId::PathY, tensor(identity2(), pauli_y())});
        v.push_back({ObservableId::SpinXPathY, tensor(pauli_x(), pauli_y())});
        v.push_back({ObservableId::SpinYPathX, tensor(pauli_y(), pauli_x())});
        v.push_back({ObservableId::SpinZPathZ, tensor(pauli_z(), pauli_z())});
        return v;
    }();
    return all[static_cast<int>(id)];
}

const std::vector<Context>& contexts() {
    static const std::vector<Context> all = [] {
        using O = ObservableId;
        std::vector<Context> v;
        v.push_back({ContextId::C1, {observable(O::SpinX), observable(O::PathX)}, -1});
        v.push_back({ContextId::C2, {observable(O::SpinY), observable(O::PathY)}, -1});
        v.push_back({ContextId::C3,
                     {observable(O::SpinXPathY), observable(O::SpinX), observable(O::PathY)},
                     +1});
        v.push_back({ContextId::C4,
                     {observable(O::SpinYPathX), observable(O::SpinY), observable(O::PathX)},
                     +1});
        v.push_back({ContextId::C5, {observable(O::SpinXPathY), observable(O::SpinYPathX)}, -1});
        return v;
    }();
    return all;
}

const Context& context(ContextId id) {
    return contexts()[static_cast<int>(id)];
}

std::vector<Context> inequality_contexts(Inequality which) {
    if (which == Inequality::Eq6) {
        return contexts();
    }
    return {context(ContextId::C1), context(ContextId::C2), context(ContextId::C5)};
}

ComplexMatrix product_matrix(const Context& c) {
    ComplexMatrix p = ComplexMatrix::identity(4);
    for (const Observable& o : c.observables) {
        p = p * o.matrix;
    }
    return p;
}

double ideal_inequality_value(const qcore::DensityMatrix& state, Inequality which) {
    double total = 0.0;
    for (const Context& c : inequality_contexts(which)) {
        total += c.coefficient * state.expectation(product_matrix(c));
    }
    return total;
}

double ideal_inequality_value(const qcore::StateVector& state, Inequality which) {
    return ideal_inequality_value(qcore::DensityMatrix::pure(state), which);
}

std::string observable_name(ObservableId id) {
    switch (id) {
        case ObservableId::SpinX: return "spin_x";
        case ObservableId::SpinY: return "spin_y";
        case ObservableId::PathX: return "path_x";
        case ObservableId::PathY: return "path_y";
        case ObservableId::SpinXPathY: return "spin_x_path_y";
        case ObservableId::SpinYPathX: return "spin_y_path_x";
        case ObservableId::SpinZPathZ: return "spin_z_path_z";
    }
    throw std::invalid_argument("unknown observable id");
}

std::string context_name(ContextId id) {
    switch (id) {
        case ContextId::C1: return "C1";
        case ContextId::C2: return "C2";
        case ContextId::C3: return "C3";
        case ContextId::C4: return "C4";
        case ContextId::C5: return "C5";
    }
    throw std::invalid_argument("unknown context id");
}

std::string inequality_name(Inequality which) {
    return which == Inequality::Eq6 ? "eq6" : "eq7";
}

}  // namespace contextsim::pmsquare
