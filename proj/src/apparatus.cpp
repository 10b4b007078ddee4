#include "contextsim/apparatus.hpp"

#include <cmath>
#include <stdexcept>

namespace contextsim::apparatus {

using pmsquare::ContextId;
using pmsquare::ObservableId;
using qcore::Complex;
using qcore::ComplexMatrix;
using qcore::DensityMatrix;
using qcore::StateVector;
using qcore::tensor;

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

const ComplexMatrix& path_selector(Path p) {
    static const ComplexMatrix sel_i = ComplexMatrix::from_rows({{1.0, 0.0}, {0.0, 0.0}});
    static const ComplexMatrix sel_ii = ComplexMatrix::from_rows({{0.0, 0.0}, {0.0, 1.0}});
    return p == Path::I ? sel_i : sel_ii;
}

Path other(Path p) {
    return p == Path::I ? Path::II : Path::I;
}

StateVector apply(const ComplexMatrix& u, const StateVector& v) {
    std::array<Complex, 4> out{};
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
            out[r] += u(r, c) * v.amplitude(c);
        }
    }
    return StateVector::normalized(out);
}

bool same_vec(const qcore::Vec3& a, const qcore::Vec3& b) {
    return a.x == b.x && a.y == b.y && a.z == b.z;
}

bool same_state(const StateVector& a, const StateVector& b) {
    return a.amplitudes() == b.amplitudes();
}

}  // namespace

bool operator==(const Element& a, const Element& b) {
    if (a.index() != b.index()) {
        return false;
    }
    if (const auto* pa = std::get_if<PhaseShifter>(&a)) {
        const auto& pb = std::get<PhaseShifter>(b);
        return pa->path == pb.path && pa->phase == pb.phase;
    }
    if (const auto* ra = std::get_if<SpinRotator>(&a)) {
        const auto& rb = std::get<SpinRotator>(b);
        return ra->path == rb.path && same_vec(ra->axis, rb.axis) && ra->angle == rb.angle;
    }
    if (std::holds_alternative<BeamSplitter>(a)) {
        return true;
    }
    if (const auto* sa = std::get_if<SpinAnalyzer>(&a)) {
        return same_vec(sa->direction, std::get<SpinAnalyzer>(b).direction);
    }
    const auto& ma = std::get<Mixer>(a);
    const auto& mb = std::get<Mixer>(b);
    if (ma.retained != mb.retained || ma.branches.size() != mb.branches.size()) {
        return false;
    }
    for (std::size_t i = 0; i < ma.branches.size(); ++i) {
        if (ma.branches[i].value != mb.branches[i].value ||
            !same_state(ma.branches[i].target, mb.branches[i].target) ||
            !same_state(ma.branches[i].pullback, mb.branches[i].pullback)) {
            return false;
        }
    }
    return true;
}

ComplexMatrix element_unitary(const Element& e) {
    if (const auto* ps = std::get_if<PhaseShifter>(&e)) {
        const Complex phase = std::polar(1.0, ps->phase);
        ComplexMatrix d = ComplexMatrix::identity(2);
        d(ps->path == Path::I ? 0 : 1, ps->path == Path::I ? 0 : 1) = phase;
        return tensor(qcore::identity2(), d);
    }
    if (const auto* sr = std::get_if<SpinRotator>(&e)) {
        const qcore::Vec3 axis = qcore::normalized(sr->axis);
        const double half = 0.5 * sr->angle;
        // exp(-i angle/2 n.sigma), applied only in the rotator's beam.
        ComplexMatrix rot = Complex(std::cos(half)) * qcore::identity2();
        rot -= Complex(0.0, std::sin(half)) * qcore::bloch(axis);
        return tensor(rot, path_selector(sr->path)) +
               tensor(qcore::identity2(), path_selector(other(sr->path)));
    }
    if (std::holds_alternative<BeamSplitter>(e)) {
        static const ComplexMatrix h = ComplexMatrix::from_rows(
            {{1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)},
             {1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0)}});
        return tensor(qcore::identity2(), h);
    }
    throw std::invalid_argument("element has no unitary action");
}

bool has_mixer(const Apparatus& app) {
    for (const Element& e : app.elements) {
        if (std::holds_alternative<Mixer>(e)) {
            return true;
        }
    }
    return false;
}

std::vector<KrausBranch> kraus_branches(const Apparatus& app) {
    std::vector<KrausBranch> branches;
    branches.push_back({0u, ComplexMatrix::identity(4)});
    int event = 0;
    for (const Element& e : app.elements) {
        if (const auto* sa = std::get_if<SpinAnalyzer>(&e)) {
            const ComplexMatrix split = qcore::bloch(qcore::normalized(sa->direction));
            const qcore::ProjectorPair pp = qcore::eigenprojectors(split);
            const ComplexMatrix plus = tensor(pp.plus, qcore::identity2());
            const ComplexMatrix minus = tensor(pp.minus, qcore::identity2());
            std::vector<KrausBranch> next;
            next.reserve(branches.size() * 2);
            for (const KrausBranch& b : branches) {
                next.push_back({b.signature, plus * b.op});
                next.push_back({b.signature | (1u << event), minus * b.op});
            }
            branches = std::move(next);
            ++event;
        } else if (const auto* mx = std::get_if<Mixer>(&e)) {
            std::vector<KrausBranch> next;
            next.reserve(branches.size() * mx->branches.size());
            for (const KrausBranch& b : branches) {
                for (const MixerBranch& mb : mx->branches) {
                    const std::uint32_t bit = (mb.value < 0) ? (1u << event) : 0u;
                    next.push_back({b.signature | bit, qcore::outer(mb.target, mb.pullback) * b.op});
                }
            }
            branches = std::move(next);
            ++event;
        } else {
            const ComplexMatrix u = element_unitary(e);
            for (KrausBranch& b : branches) {
                b.op = u * b.op;
            }
        }
    }
    // Final beam detection distinguishes the two exit directions.
    {
        const ComplexMatrix det_i = tensor(qcore::identity2(), path_selector(Path::I));
        const ComplexMatrix det_ii = tensor(qcore::identity2(), path_selector(Path::II));
        std::vector<KrausBranch> next;
        next.reserve(branches.size() * 2);
        for (const KrausBranch& b : branches) {
            next.push_back({b.signature, det_i * b.op});
            next.push_back({b.signature | (1u << event), det_ii * b.op});
        }
        branches = std::move(next);
        ++event;
    }
    if (event != app.branch_events) {
        throw qcore::InternalConsistencyError("apparatus branch-event count mismatch");
    }
    return branches;
}

PortDistribution port_distribution(const Apparatus& app, const DensityMatrix& state) {
    PortDistribution dist;
    dist.probabilities.assign(app.ports.size(), 0.0);
    for (const KrausBranch& b : kraus_branches(app)) {
        double w = (b.op * state.matrix() * b.op.adjoint()).trace().real();
        if (w < 0.0) {
            if (w < -1e-12) {
                throw qcore::InternalConsistencyError("negative branch weight");
            }
            w = 0.0;
        }
        dist.probabilities.at(app.signature_to_port.at(b.signature)) += w;
    }
    double total = 0.0;
    for (double p : dist.probabilities) {
        total += p;
    }
    if (has_mixer(app)) {
        if (total < 1e-12) {
            throw qcore::InternalConsistencyError("mixer post-selection removed every branch");
        }
        dist.post_selection_probability = total;
    } else {
        if (std::abs(total - 1.0) > qcore::kDerivedTol) {
            throw qcore::InternalConsistencyError("port probabilities do not sum to one");
        }
        dist.post_selection_probability = 1.0;
    }
    for (double& p : dist.probabilities) {
        p /= total;
    }
    return dist;
}

std::vector<ComplexMatrix> port_effects(const Apparatus& app) {
    std::vector<ComplexMatrix> effects(app.ports.size(), ComplexMatrix(4));
    for (const KrausBranch& b : kraus_branches(app)) {
        effects.at(app.signature_to_port.at(b.signature)) += b.op.adjoint() * b.op;
    }
    return effects;
}

namespace {

// Unit eigenvector of the rank-1 product P_a(ea) P_b(eb) of commuting
// involutions, with the global phase pinned.
StateVector joint_eigenstate(const ComplexMatrix& a, const ComplexMatrix& b, int ea, int eb) {
    const qcore::ProjectorPair pa = qcore::eigenprojectors(a);
    const qcore::ProjectorPair pb = qcore::eigenprojectors(b);
    const ComplexMatrix prod = (ea > 0 ? pa.plus : pa.minus) * (eb > 0 ? pb.plus : pb.minus);
    int best = 0;
    double best_diag = 0.0;
    for (int c = 0; c < 4; ++c) {
        const double d = prod(c, c).real();
        if (d > best_diag) {
            best_diag = d;
            best = c;
        }
    }
    if (best_diag < 1e-12) {
        throw qcore::InternalConsistencyError("joint eigenspace is not rank one");
    }
    std::array<Complex, 4> amps{};
    for (int r = 0; r < 4; ++r) {
        amps[r] = prod(r, best);
    }
    return StateVector::normalized(amps).phase_fixed();
}

StateVector equal_weight_sum(const StateVector& a, const StateVector& b) {
    std::array<Complex, 4> amps{};
    for (int i = 0; i < 4; ++i) {
        amps[i] = a.amplitude(i) + b.amplitude(i);
    }
    return StateVector::normalized(amps).phase_fixed();
}

void append_path_measurement(std::vector<Element>& elements, Axis path_axis,
                             const AnalyzerSettings& settings) {
    if (path_axis == Axis::Y) {
        elements.push_back(PhaseShifter{Path::II, -kPi / 2.0 + settings.path_y_phase_error});
    } else if (settings.path_x_phase_error != 0.0) {
        elements.push_back(PhaseShifter{Path::II, settings.path_x_phase_error});
    }
    elements.push_back(BeamSplitter{});
}

}  // namespace

Apparatus build_scheme_i(Axis spin_axis, Axis path_axis, const AnalyzerSettings& settings) {
    Apparatus app;
    app.name = std::string("scheme_i_") + (spin_axis == Axis::X ? "x" : "y") +
               (path_axis == Axis::X ? "x" : "y");
    const ObservableId spin_obs =
        spin_axis == Axis::X ? ObservableId::SpinX : ObservableId::SpinY;
    const ObservableId path_obs =
        path_axis == Axis::X ? ObservableId::PathX : ObservableId::PathY;

    append_path_measurement(app.elements, path_axis, settings);
    app.elements.push_back(
        SpinAnalyzer{spin_axis == Axis::X ? settings.spin_x : settings.spin_y});

    // Signature bit 0: spin analyzer, bit 1: beam detection.
    app.branch_events = 2;
    for (int s : {+1, -1}) {
        for (int t : {+1, -1}) {
            const int id = (s < 0 ? 2 : 0) + (t < 0 ? 1 : 0);
            app.ports.push_back({id, {{spin_obs, s}, {path_obs, t}}});
        }
    }
    app.signature_to_port.assign(4, 0);
    for (std::uint32_t sig = 0; sig < 4; ++sig) {
        const int s = (sig & 1u) ? -1 : +1;
        const int t = (sig & 2u) ? -1 : +1;  // beam I carries the +1 outcome
        app.signature_to_port[sig] = (s < 0 ? 2 : 0) + (t < 0 ? 1 : 0);
    }
    return app;
}

Apparatus build_scheme_ii(const AnalyzerSettings& settings) {
    Apparatus app;
    app.name = "scheme_ii";
    // Spin flip in beam II folds the four joint eigenstates of the product
    // pair onto spin-z x beam products; the beam splitter then maps the
    // retained-pair value onto the exit beam.
    app.elements.push_back(SpinRotator{Path::II, {1.0, 0.0, 0.0}, kPi});
    app.elements.push_back(BeamSplitter{});
    app.elements.push_back(SpinAnalyzer{settings.spin_z});

    app.branch_events = 2;
    for (int e : {+1, -1}) {
        for (int f : {+1, -1}) {
            const int id = (e < 0 ? 2 : 0) + (f < 0 ? 1 : 0);
            app.ports.push_back(
                {id, {{ObservableId::SpinXPathY, e}, {ObservableId::SpinYPathX, f}}});
        }
    }
    app.signature_to_port.assign(4, 0);
    for (std::uint32_t sig = 0; sig < 4; ++sig) {
        const int spin_z = (sig & 1u) ? -1 : +1;
        const int e = (sig & 2u) ? -1 : +1;
        const int f = spin_z * e;  // the spin label flips meaning in beam II
        app.signature_to_port[sig] = (e < 0 ? 2 : 0) + (f < 0 ? 1 : 0);
    }
    return app;
}

Apparatus build_scheme_iii(ObservableId first, const AnalyzerSettings& settings) {
    if (first != ObservableId::SpinXPathY && first != ObservableId::SpinYPathX) {
        throw std::invalid_argument("scheme (iii) retains SpinXPathY or SpinYPathX");
    }
    const Apparatus front = build_scheme_ii(settings);

    Apparatus app;
    app.name = "scheme_iii_" + pmsquare::observable_name(first);
    app.elements = front.elements;  // identical front end, by construction

    // Unitary part of the front end, for expressing the mixer's projection
    // targets in the frame the mixer hardware actually sees.
    ComplexMatrix v_front = ComplexMatrix::identity(4);
    for (const Element& e : front.elements) {
        if (!std::holds_alternative<SpinAnalyzer>(e) && !std::holds_alternative<Mixer>(e)) {
            v_front = element_unitary(e) * v_front;
        }
    }

    const ComplexMatrix& a = pmsquare::observable(ObservableId::SpinXPathY).matrix;
    const ComplexMatrix& b = pmsquare::observable(ObservableId::SpinYPathX).matrix;
    Mixer mixer{first, {}};
    for (int value : {+1, -1}) {
        StateVector kept_a = (first == ObservableId::SpinXPathY)
                                 ? joint_eigenstate(a, b, value, +1)
                                 : joint_eigenstate(a, b, +1, value);
        StateVector kept_b = (first == ObservableId::SpinXPathY)
                                 ? joint_eigenstate(a, b, value, -1)
                                 : joint_eigenstate(a, b, -1, value);
        // Equal-weight eraser target over the two eigenstates sharing the
        // retained outcome; overlap 1/2 with either, so post-selection keeps
        // exactly half of the discriminated intensity.
        const StateVector target = equal_weight_sum(kept_a, kept_b);
        mixer.branches.push_back({value, target, apply(v_front, target)});
    }
    app.elements.push_back(mixer);

    const Axis spin_axis = (first == ObservableId::SpinXPathY) ? Axis::X : Axis::Y;
    const Axis path_axis = (first == ObservableId::SpinXPathY) ? Axis::Y : Axis::X;
    const ObservableId spin_obs =
        spin_axis == Axis::X ? ObservableId::SpinX : ObservableId::SpinY;
    const ObservableId path_obs =
        path_axis == Axis::X ? ObservableId::PathX : ObservableId::PathY;
    app.elements.push_back(
        SpinAnalyzer{spin_axis == Axis::X ? settings.spin_x : settings.spin_y});
    append_path_measurement(app.elements, path_axis, settings);

    // Signature bits: 0 front analyzer (erased), 1 mixer, 2 factor analyzer,
    // 3 beam detection.
    app.branch_events = 4;
    for (int m : {+1, -1}) {
        for (int s : {+1, -1}) {
            for (int t : {+1, -1}) {
                const int id = (m < 0 ? 4 : 0) + (s < 0 ? 2 : 0) + (t < 0 ? 1 : 0);
                app.ports.push_back({id, {{first, m}, {spin_obs, s}, {path_obs, t}}});
            }
        }
    }
    app.signature_to_port.assign(16, 0);
    for (std::uint32_t sig = 0; sig < 16; ++sig) {
        const int m = (sig & 2u) ? -1 : +1;
        const int s = (sig & 4u) ? -1 : +1;
        const int t = (sig & 8u) ? -1 : +1;
        app.signature_to_port[sig] = (m < 0 ? 4 : 0) + (s < 0 ? 2 : 0) + (t < 0 ? 1 : 0);
    }
    return app;
}

Apparatus scheme_for_context(ContextId id, const AnalyzerSettings& settings) {
    switch (id) {
        case ContextId::C1: return build_scheme_i(Axis::X, Axis::X, settings);
        case ContextId::C2: return build_scheme_i(Axis::Y, Axis::Y, settings);
        case ContextId::C3: return build_scheme_iii(ObservableId::SpinXPathY, settings);
        case ContextId::C4: return build_scheme_iii(ObservableId::SpinYPathX, settings);
        case ContextId::C5: return build_scheme_ii(settings);
    }
    throw std::invalid_argument("unknown context id");
}

const std::vector<DensityMatrix>& tomographic_probes() {
    static const std::vector<DensityMatrix> probes = [] {
        const double r = 1.0 / std::sqrt(2.0);
        const std::array<std::array<Complex, 2>, 4> kets = {{
            {Complex(1.0), Complex(0.0)},        // z+
            {Complex(0.0), Complex(1.0)},        // z-
            {Complex(r), Complex(r)},            // x+
            {Complex(r), Complex(0.0, r)},       // y+
        }};
        std::vector<DensityMatrix> out;
        out.reserve(16);
        for (const auto& spin : kets) {
            for (const auto& path : kets) {
                std::array<Complex, 4> amps{};
                for (int s = 0; s < 2; ++s) {
                    for (int p = 0; p < 2; ++p) {
                        amps[2 * s + p] = spin[s] * path[p];
                    }
                }
                out.push_back(DensityMatrix::pure(StateVector::from_amplitudes(amps)));
            }
        }
        return out;
    }();
    return probes;
}

VerifyReport verify_against_abstract(const Apparatus& app, const pmsquare::Context& c,
                                     const std::vector<DensityMatrix>& probes, double tol) {
    VerifyReport report;
    report.apparatus_name = app.name;
    report.context = c.id;
    const bool mixer_mode = has_mixer(app);

    auto port_value = [](const Port& port, ObservableId id) {
        for (const auto& [obs, val] : port.outcomes) {
            if (obs == id) {
                return val;
            }
        }
        throw std::invalid_argument("apparatus port labeling does not cover the context");
    };

    if (mixer_mode) {
        for (const Element& e : app.elements) {
            if (const auto* mx = std::get_if<Mixer>(&e)) {
                if (mx->retained != c.observables.front().id) {
                    throw std::invalid_argument(
                        "mixer retains a different observable than the context measures first");
                }
            }
        }
    }

    for (const DensityMatrix& probe : probes) {
        const PortDistribution dist = port_distribution(app, probe);
        const std::vector<double> joint = measurement::exact_joint_distribution(probe, c);
        double dev = 0.0;
        if (!mixer_mode) {
            // Aggregate port probabilities into abstract outcome tuples and
            // compare distributions entry by entry.
            std::vector<double> agg(joint.size(), 0.0);
            for (std::size_t i = 0; i < app.ports.size(); ++i) {
                std::size_t idx = 0;
                for (std::size_t j = 0; j < c.observables.size(); ++j) {
                    if (port_value(app.ports[i], c.observables[j].id) < 0) {
                        idx |= (1u << j);
                    }
                }
                agg[idx] += dist.probabilities[i];
            }
            for (std::size_t idx = 0; idx < joint.size(); ++idx) {
                dev = std::max(dev, std::abs(agg[idx] - joint[idx]));
            }
        } else {
            // The eraser re-prepares a fixed state per retained outcome, so
            // only that outcome's marginal is compared against the abstract
            // prediction; the port labels must still multiply to +1.
            double abstract_plus = 0.0;
            for (std::size_t idx = 0; idx < joint.size(); ++idx) {
                if (!(idx & 1u)) {
                    abstract_plus += joint[idx];
                }
            }
            double apparatus_plus = 0.0;
            for (std::size_t i = 0; i < app.ports.size(); ++i) {
                if (port_value(app.ports[i], c.observables.front().id) > 0) {
                    apparatus_plus += dist.probabilities[i];
                }
            }
            dev = std::abs(apparatus_plus - abstract_plus);
            for (std::size_t i = 0; i < app.ports.size(); ++i) {
                if (dist.probabilities[i] > 1e-12) {
                    int prod = 1;
                    for (const auto& [obs, val] : app.ports[i].outcomes) {
                        (void)obs;
                        prod *= val;
                    }
                    if (prod != +1) {
                        report.product_constraint_ok = false;
                    }
                }
            }
        }
        report.probes.push_back({dev, dev <= tol});
        report.max_deviation = std::max(report.max_deviation, dev);
    }
    report.pass = report.max_deviation <= tol && report.product_constraint_ok;
    return report;
}

}  // namespace contextsim::apparatus
