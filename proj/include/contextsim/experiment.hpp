#pragma once

#include <cstdint>
#include <vector>

#include "contextsim/apparatus.hpp"
#include "contextsim/measurement.hpp"
#include "contextsim/pmsquare.hpp"
#include "contextsim/qcore.hpp"

// End-to-end experiment runs: noisy state preparation, finite-shot estimation
// of the inequalities (with either abstract sequential measurements or the
// concrete apparatus schemes), the visibility threshold where the quantum
// violation disappears, and the CHSH comparison point.

namespace contextsim::experiment {

struct NoiseModel {
    double visibility = 1.0;         // Werner mixing weight of the prepared state
    double spin_misalignment = 0.0;  // cone half-angle (radians) for analyzer directions
    double path_phase_jitter = 0.0;  // std deviation (radians) of stray beam phases
};

enum class RunMode {
    Abstract,   // sequential projective measurements of the context observables
    Apparatus,  // sample the exit ports of the matching interferometer scheme
};

struct RunConfig {
    pmsquare::Inequality inequality = pmsquare::Inequality::Eq7;
    long shots_per_context = 100000;
    NoiseModel noise;
    std::uint64_t seed = 42;
    RunMode mode = RunMode::Abstract;
};

struct ContextEstimate {
    pmsquare::ContextId id;
    int coefficient;
    double mean;
    double std_error;
    double post_selection;  // mean mixer success probability; 1 without a mixer
};

struct EstimateReport {
    std::vector<ContextEstimate> terms;
    double value;
    double std_error;        // root sum of squares of the term errors
    double classical_bound;
    bool violation;
    double sigma_above_bound;  // +inf when the error vanishes
};

// visibility * |bell><bell| + (1 - visibility) * 1/4.
qcore::DensityMatrix werner_state(double visibility);

// Estimates each context term with `shots_per_context` runs and combines them
// with the inequality coefficients.  Context estimations run concurrently on
// independent derived random streams (seed, context index) and are combined
// by context index, so reports are bitwise reproducible for a fixed seed.
EstimateReport estimate_inequality(const RunConfig& config);

// Exact <product of context outcomes> on `state` under either run mode; the
// two modes agree for every context and state.
double exact_context_expectation(const qcore::DensityMatrix& state, pmsquare::ContextId id,
                                 RunMode mode);

// Smallest visibility whose exact inequality value reaches the classical
// bound, bisected to 1e-9.  Both inequalities give 1/3.
double critical_visibility(pmsquare::Inequality which);

struct MeasurementSetting {
    qcore::Vec3 a0, a1;  // spin-side analyzer directions
    qcore::Vec3 b0, b1;  // path-side analyzer directions
};

// <a0 b0> + <a0 b1> + <a1 b0> - <a1 b1> from the four correlation traces.
double chsh_value(const qcore::DensityMatrix& state, const MeasurementSetting& settings);

// Orthogonal spin directions in the x-y plane with path directions midway
// between them; reaches 2 sqrt 2 on the Bell state.
MeasurementSetting optimal_chsh_settings();

// Published comparison points, used only to annotate reports.
struct ReferenceValue {
    double value;
    double uncertainty;
    const char* citation;
};

inline constexpr double kChshClassicalBound = 2.0;
inline constexpr double kChshQuantumMax = 2.8284271247461903;  // 2 sqrt 2
inline constexpr ReferenceValue kIonPairChsh{2.25, 0.03,
                                             "M. A. Rowe et al., Nature 409, 791 (2001)"};
inline constexpr ReferenceValue kNeutronChsh{2.051, 0.019,
                                             "Y. Hasegawa et al., Nature 425, 45 (2003)"};
// Contextuality value the three-term inequality is expected to reach at the
// visibility implied by the neutron CHSH point (bound 1).
inline constexpr double kExpectedNeutronContextuality = 2.1;

}  // namespace contextsim::experiment
