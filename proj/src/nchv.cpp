#include "contextsim/nchv.hpp"

#include <algorithm>
#include <stdexcept>

namespace contextsim::nchv {

using pmsquare::Inequality;
using pmsquare::ObservableId;

int Assignment::value(ObservableId id) const {
    for (std::size_t i = 0; i < kAssignedObservables.size(); ++i) {
        if (kAssignedObservables[i] == id) {
            return values[i];
        }
    }
    throw std::invalid_argument("observable carries no assigned value");
}

std::vector<Assignment> enumerate_assignments(bool constrained) {
    std::vector<Assignment> out;
    out.reserve(constrained ? 16 : 64);
    for (int bits = 0; bits < 64; ++bits) {
        Assignment a{};
        for (int i = 0; i < 6; ++i) {
            a.values[i] = ((bits >> i) & 1) ? -1 : +1;
        }
        if (constrained) {
            const bool factorizes =
                a.value(ObservableId::SpinXPathY) ==
                    a.value(ObservableId::SpinX) * a.value(ObservableId::PathY) &&
                a.value(ObservableId::SpinYPathX) ==
                    a.value(ObservableId::SpinY) * a.value(ObservableId::PathX);
            if (!factorizes) {
                continue;
            }
        }
        out.push_back(a);
    }
    return out;
}

namespace {

// The five context products an assignment yields, C1..C5 order.
std::array<int, 5> context_products(const Assignment& a) {
    using O = ObservableId;
    return {
        a.value(O::SpinX) * a.value(O::PathX),
        a.value(O::SpinY) * a.value(O::PathY),
        a.value(O::SpinXPathY) * a.value(O::SpinX) * a.value(O::PathY),
        a.value(O::SpinYPathX) * a.value(O::SpinY) * a.value(O::PathX),
        a.value(O::SpinXPathY) * a.value(O::SpinYPathX),
    };
}

constexpr std::array<int, 5> kCoefficients = {-1, -1, +1, +1, -1};

}  // namespace

double nchv_value(const Assignment& a, Inequality which) {
    const std::array<int, 5> prods = context_products(a);
    int total = 0;
    for (int i = 0; i < 5; ++i) {
        if (which == Inequality::Eq7 && (i == 2 || i == 3)) {
            continue;  // the two state-independent terms drop out
        }
        total += kCoefficients[i] * prods[i];
    }
    return static_cast<double>(total);
}

BoundReport nchv_bound(Inequality which) {
    return nchv_bound(which, which == Inequality::Eq7);
}

BoundReport nchv_bound(Inequality which, bool constrained) {
    const std::vector<Assignment> assignments = enumerate_assignments(constrained);
    BoundReport report{};
    report.assignments_searched = static_cast<int>(assignments.size());
    bool first = true;
    for (const Assignment& a : assignments) {
        const int v = static_cast<int>(nchv_value(a, which));
        report.value_multiset.push_back(v);
        if (first || v > report.bound) {
            report.bound = v;
            report.witness = a;
            first = false;
        }
    }
    std::sort(report.value_multiset.begin(), report.value_multiset.end());
    return report;
}

KsReport ks_contradiction_report() {
    KsReport report{};
    report.lhs_product_always_plus_one = true;
    bool first = true;
    for (const Assignment& a : enumerate_assignments(false)) {
        const std::array<int, 5> prods = context_products(a);
        int satisfied = 0;
        int lhs_product = 1;
        for (int i = 0; i < 5; ++i) {
            lhs_product *= prods[i];
            if (prods[i] == kQuantumContextProducts[i]) {
                ++satisfied;
            }
        }
        // Every observable enters the five products exactly twice, so the
        // product of the left-hand sides is +1 for each assignment.
        if (lhs_product != 1) {
            report.lhs_product_always_plus_one = false;
        }
        if (satisfied == 5) {
            ++report.satisfying_all_five;
        }
        if (first || satisfied > report.max_satisfiable) {
            report.max_satisfiable = satisfied;
            report.best_witness = a;
            first = false;
        }
    }
    report.rhs_product = 1;
    for (int r : kQuantumContextProducts) {
        report.rhs_product *= r;
    }
    return report;
}

}  // namespace contextsim::nchv
