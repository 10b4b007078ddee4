#include "contextsim/measurement.hpp"

#include <cmath>
#include <stdexcept>

namespace contextsim::measurement {

using qcore::Complex;
using qcore::ComplexMatrix;
using qcore::DensityMatrix;

namespace {

constexpr double kBranchFloor = 1e-15;
constexpr double kProbabilitySlack = 1e-12;
constexpr double kTwoPi = 6.283185307179586476925286766559;

double clamp_probability(double p) {
    if (p < 0.0) {
        if (p < -kProbabilitySlack) {
            throw qcore::InternalConsistencyError("branch probability below zero");
        }
        return 0.0;
    }
    if (p > 1.0) {
        if (p > 1.0 + kProbabilitySlack) {
            throw qcore::InternalConsistencyError("branch probability above one");
        }
        return 1.0;
    }
    return p;
}

}  // namespace

RandomSource::RandomSource(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream & 0xffffffffu),
                      static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
}

double RandomSource::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RandomSource::gaussian(double stddev) {
    const double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
    const double u2 = uniform();
    return stddev * std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

std::pair<DensityMatrix, double> collapse(const DensityMatrix& state,
                                          const ComplexMatrix& projector) {
    const ComplexMatrix sandwiched = projector * state.matrix() * projector;
    const double weight = clamp_probability(sandwiched.trace().real());
    if (weight < kBranchFloor) {
        throw qcore::DegenerateBranchError("selected measurement branch has zero probability");
    }
    return {DensityMatrix::trusted(Complex(1.0 / weight) * sandwiched), weight};
}

MeasureResult measure(const DensityMatrix& state, const ComplexMatrix& observable,
                      RandomSource& rng) {
    const qcore::ProjectorPair proj = qcore::eigenprojectors(observable);
    const double prob_plus = clamp_probability((state.matrix() * proj.plus).trace().real());
    const int outcome = (rng.uniform() < prob_plus) ? +1 : -1;
    auto [post, weight] = collapse(state, outcome > 0 ? proj.plus : proj.minus);
    (void)weight;
    return MeasureResult{outcome, post, prob_plus};
}

MeasurementRecord run_context(const DensityMatrix& state, const pmsquare::Context& c,
                              RandomSource& rng) {
    MeasurementRecord rec{c.id, {}, 1};
    rec.outcomes.reserve(c.observables.size());
    DensityMatrix current = state;
    for (const pmsquare::Observable& o : c.observables) {
        const MeasureResult r = measure(current, o.matrix, rng);
        rec.outcomes.push_back(r.outcome);
        rec.product *= r.outcome;
        current = r.post;
    }
    return rec;
}

Expectation context_product_expectation(const DensityMatrix& state, const pmsquare::Context& c,
                                        EstimationMode mode, long shots, RandomSource* rng) {
    if (mode == EstimationMode::Exact) {
        return Expectation{state.expectation(pmsquare::product_matrix(c)), 0.0};
    }
    if (shots < 1) {
        throw std::invalid_argument("sampled estimation needs at least one shot");
    }
    if (rng == nullptr) {
        throw std::invalid_argument("sampled estimation needs a random source");
    }
    long plus = 0;
    for (long i = 0; i < shots; ++i) {
        if (run_context(state, c, *rng).product > 0) {
            ++plus;
        }
    }
    const double n = static_cast<double>(shots);
    const double mean = (2.0 * static_cast<double>(plus) - n) / n;
    double std_error = 0.0;
    if (shots > 1) {
        // Products are +-1, so sum of squares is n and the unbiased sample
        // variance reduces to n (1 - mean^2) / (n - 1).
        const double var = std::max(0.0, n * (1.0 - mean * mean) / (n - 1.0));
        std_error = std::sqrt(var / n);
    }
    return Expectation{mean, std_error};
}

std::vector<double> exact_joint_distribution(const DensityMatrix& state,
                                             const pmsquare::Context& c) {
    const int k = static_cast<int>(c.observables.size());
    std::vector<qcore::ProjectorPair> projs;
    projs.reserve(k);
    for (const pmsquare::Observable& o : c.observables) {
        projs.push_back(qcore::eigenprojectors(o.matrix));
    }
    std::vector<double> dist(static_cast<std::size_t>(1) << k, 0.0);
    double total = 0.0;
    for (std::size_t idx = 0; idx < dist.size(); ++idx) {
        ComplexMatrix chain = ComplexMatrix::identity(4);
        for (int j = 0; j < k; ++j) {
            const bool minus = (idx >> j) & 1u;
            chain = (minus ? projs[j].minus : projs[j].plus) * chain;
        }
        const double p =
            clamp_probability((chain * state.matrix() * chain.adjoint()).trace().real());
        dist[idx] = p;
        total += p;
    }
    if (std::abs(total - 1.0) > qcore::kDerivedTol) {
        throw qcore::InternalConsistencyError("joint outcome distribution does not sum to one");
    }
    return dist;
}

qcore::StateVector random_pure_state(RandomSource& rng) {
    std::array<Complex, 4> amps;
    for (int i = 0; i < 4; ++i) {
        const double re = rng.gaussian(1.0);
        const double im = rng.gaussian(1.0);
        amps[i] = Complex(re, im);
    }
    return qcore::StateVector::normalized(amps);
}

}  // namespace contextsim::measurement
