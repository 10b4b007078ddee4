#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "contextsim/measurement.hpp"
#include "contextsim/pmsquare.hpp"
#include "contextsim/qcore.hpp"

// Interferometer element models and the three concrete measurement setups:
//
//   scheme (i)   path interferometer + spin analyzer; measures one spin and
//                one path observable (contexts C1, C2),
//   scheme (ii)  spin-flip rotator in beam II + recombining beam splitter +
//                spin analyzer; its four exit ports discriminate the joint
//                eigenstates of the two product observables (context C5),
//   scheme (iii) scheme (ii)'s hardware, then a state mixer that erases the
//                unwanted half of the discrimination, then ordinary factor
//                measurements (contexts C3, C4).
//
// An apparatus is simulated by walking its element list while accumulating one
// Kraus operator per branch; exit-port probabilities are tr(K rho K^dag).
// Branching events (spin analyzers, the mixer, final beam detection) each
// contribute one signature bit; the apparatus maps branch signatures to
// labelled ports.

namespace contextsim::apparatus {

enum class Path { I, II };
enum class Axis { X, Y };

struct PhaseShifter {
    Path path;
    double phase;  // radians applied to the named beam
};

struct SpinRotator {
    Path path;
    qcore::Vec3 axis;
    double angle;  // radians; the rotation exp(-i angle/2 axis.sigma)
};

// Fixed 50:50 recombination on the path factor (Hadamard convention).
struct BeamSplitter {};

// Two-outcome projective split of the spin factor along `direction`.
struct SpinAnalyzer {
    qcore::Vec3 direction;
};

// One post-selected exit of the state mixer: keeps branches whose first
// (retained) outcome is `value`, projecting them onto `target`.  `pullback` is
// the target propagated through the front-end unitaries, i.e. the state the
// mixer hardware actually selects in the beams it sees.
struct MixerBranch {
    int value;
    qcore::StateVector target;
    qcore::StateVector pullback;
};

// Quantum eraser stage: a rank-1 projection (with recorded success
// probability) per retained first outcome.  Erases the other half of the
// preceding joint discrimination while the retained outcome stays encoded in
// which mixer exit fired.
struct Mixer {
    pmsquare::ObservableId retained;
    std::vector<MixerBranch> branches;
};

using Element = std::variant<PhaseShifter, SpinRotator, BeamSplitter, SpinAnalyzer, Mixer>;

bool operator==(const Element& a, const Element& b);

struct Port {
    int id;
    std::vector<std::pair<pmsquare::ObservableId, int>> outcomes;
};

struct Apparatus {
    std::string name;
    std::vector<Element> elements;
    std::vector<Port> ports;
    // Branch signature -> port index.  Bit k of a signature is the k-th
    // branching event in pipeline order (final beam detection last); bit value
    // 1 means outcome -1 (or beam II at detection).
    int branch_events = 0;
    std::vector<int> signature_to_port;
};

// 4x4 unitary of a phase shifter, spin rotator, or beam splitter.
qcore::ComplexMatrix element_unitary(const Element& e);

bool has_mixer(const Apparatus& app);

struct KrausBranch {
    std::uint32_t signature;
    qcore::ComplexMatrix op;
};

// All terminal branches of the apparatus, including final beam detection.
std::vector<KrausBranch> kraus_branches(const Apparatus& app);

struct PortDistribution {
    std::vector<double> probabilities;       // by port id, renormalized
    double post_selection_probability;       // 1 without a mixer
};

PortDistribution port_distribution(const Apparatus& app, const qcore::DensityMatrix& state);

// POVM effect sum_K K^dag K of each port.  For scheme (ii) these are exactly
// the four joint eigenprojectors of the discriminated pair.
std::vector<qcore::ComplexMatrix> port_effects(const Apparatus& app);

// Fixed analyzer directions and stray phases; perturb these to model
// misaligned hardware.  Phase entries are errors added to the ideal values.
struct AnalyzerSettings {
    qcore::Vec3 spin_x{1.0, 0.0, 0.0};
    qcore::Vec3 spin_y{0.0, 1.0, 0.0};
    qcore::Vec3 spin_z{0.0, 0.0, 1.0};
    double path_x_phase_error = 0.0;
    double path_y_phase_error = 0.0;
};

Apparatus build_scheme_i(Axis spin_axis, Axis path_axis, const AnalyzerSettings& settings = {});
Apparatus build_scheme_ii(const AnalyzerSettings& settings = {});
// `first` must be SpinXPathY or SpinYPathX; it selects which product
// observable the eraser retains and which factor pair is measured afterwards.
Apparatus build_scheme_iii(pmsquare::ObservableId first, const AnalyzerSettings& settings = {});

// The apparatus serving each context in an experiment run.
Apparatus scheme_for_context(pmsquare::ContextId id, const AnalyzerSettings& settings = {});

// 16 product probe states (spin and path each from {z+, z-, x+, y+}), jointly
// spanning the space of 4x4 operators, so agreement on them is agreement on
// every input state.
const std::vector<qcore::DensityMatrix>& tomographic_probes();

struct ProbeCheck {
    double max_deviation;
    bool pass;
};

struct VerifyReport {
    std::string apparatus_name;
    pmsquare::ContextId context;
    double max_deviation = 0.0;
    bool product_constraint_ok = true;  // mixer schemes: port labels multiply to +1
    bool pass = false;
    std::vector<ProbeCheck> probes;
};

// Compares the apparatus against the abstract sequential measurement of `c`
// on every probe.  Mixer-free schemes must reproduce the full joint outcome
// distribution.  A mixer scheme re-prepares a fixed state per retained
// outcome, so only the retained outcome's marginal is state-faithful; it is
// compared, and the port-label product constraint is checked instead of the
// conditional factor statistics.
VerifyReport verify_against_abstract(const Apparatus& app, const pmsquare::Context& c,
                                     const std::vector<qcore::DensityMatrix>& probes,
                                     double tol = qcore::kDerivedTol);

}  // namespace contextsim::apparatus
