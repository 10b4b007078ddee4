#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "contextsim/pmsquare.hpp"
#include "contextsim/qcore.hpp"

// Projective measurement with the Lueders state update, sequential context
// runs, and the exact / sampled product expectations they generate.

namespace contextsim::measurement {

// Deterministic random stream.  A (seed, stream) pair fully determines the
// sequence; derived streams from the same seed are independent, which lets
// concurrent consumers stay bitwise reproducible.  Raw engine output is turned
// into doubles by fixed bit manipulation, never through distribution objects
// with implementation-defined behaviour.
class RandomSource {
  public:
    explicit RandomSource(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

    // Uniform on [0, 1) with 53 random bits.
    double uniform();

    // Gaussian via Box-Muller on two uniform draws.
    double gaussian(double stddev);

    RandomSource derive(std::uint64_t stream) const { return RandomSource(seed_, stream); }

  private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::mt19937_64 engine_;
};

// Projection branch of a state: (P rho P / tr, tr).  Throws
// DegenerateBranchError when the branch weight is below 1e-15.
std::pair<qcore::DensityMatrix, double> collapse(const qcore::DensityMatrix& state,
                                                 const qcore::ComplexMatrix& projector);

struct MeasureResult {
    int outcome;  // +1 or -1
    qcore::DensityMatrix post;
    double prob_plus;
};

// Single two-valued measurement of a Hermitian involution.  The Born
// probability is clamped into [0, 1] when within 1e-12 of the boundary;
// anything farther out raises InternalConsistencyError.
MeasureResult measure(const qcore::DensityMatrix& state, const qcore::ComplexMatrix& observable,
                      RandomSource& rng);

struct MeasurementRecord {
    pmsquare::ContextId context_id;
    std::vector<int> outcomes;  // in context order
    int product;
};

// Measures the context's observables in order on one system, threading the
// collapsed state through.
MeasurementRecord run_context(const qcore::DensityMatrix& state, const pmsquare::Context& c,
                              RandomSource& rng);

enum class EstimationMode { Exact, Sampled };

struct Expectation {
    double value;
    double std_error;  // unbiased-sample-deviation / sqrt(shots); 0 when exact
};

// <product of context outcomes>: either the closed-form trace of the product
// observable, or the sample mean over `shots` sequential runs.
Expectation context_product_expectation(const qcore::DensityMatrix& state,
                                        const pmsquare::Context& c, EstimationMode mode,
                                        long shots = 0, RandomSource* rng = nullptr);

// Exact probability of each outcome tuple of a sequential context run.
// Entry index: bit j set when observable j (context order) gave -1.
std::vector<double> exact_joint_distribution(const qcore::DensityMatrix& state,
                                             const pmsquare::Context& c);

// Haar-random pure state from four complex Gaussian amplitudes.
qcore::StateVector random_pure_state(RandomSource& rng);

}  // namespace contextsim::measurement
