#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "contextsim/measurement.hpp"
#include "contextsim/pmsquare.hpp"
#include "contextsim/qcore.hpp"

using namespace contextsim;
using measurement::EstimationMode;
using measurement::RandomSource;
using pmsquare::ContextId;
using qcore::Complex;
using qcore::DensityMatrix;
using qcore::StateVector;

namespace {

DensityMatrix up_beam_one() {
    return DensityMatrix::pure(StateVector::from_amplitudes({1.0, 0.0, 0.0, 0.0}));
}

DensityMatrix bell_rho() {
    return DensityMatrix::pure(pmsquare::bell_state());
}

}  // namespace

TEST_CASE("random source is reproducible per (seed, stream) pair") {
    RandomSource a(1234, 7);
    RandomSource b(1234, 7);
    for (int i = 0; i < 50; ++i) {
        CHECK(a.uniform() == b.uniform());
    }
    RandomSource c(1234, 8);
    RandomSource d(1235, 7);
    bool differs_stream = false;
    bool differs_seed = false;
    RandomSource a2(1234, 7);
    for (int i = 0; i < 50; ++i) {
        const double base = a2.uniform();
        differs_stream = differs_stream || base != c.uniform();
        differs_seed = differs_seed || base != d.uniform();
    }
    CHECK(differs_stream);
    CHECK(differs_seed);
    CHECK(a.derive(3).stream() == 3);
    CHECK(a.derive(3).seed() == 1234);
}

TEST_CASE("uniform stays in [0,1) and gaussian has sane spread") {
    RandomSource rng(99);
    double sum = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        sum += u;
    }
    CHECK(sum / 10000 == doctest::Approx(0.5).epsilon(0.05));

    double gsum = 0.0;
    double gsq = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double g = rng.gaussian(2.0);
        gsum += g;
        gsq += g * g;
    }
    CHECK(gsum / 10000 == doctest::Approx(0.0).scale(1.0).epsilon(0.1));
    CHECK(std::sqrt(gsq / 10000) == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("measuring an eigenstate leaves it unchanged with certainty") {
    RandomSource rng(5);
    const auto spin_z = qcore::tensor(qcore::pauli_z(), qcore::identity2());
    for (int i = 0; i < 20; ++i) {
        const auto r = measurement::measure(up_beam_one(), spin_z, rng);
        CHECK(r.outcome == +1);
        CHECK(r.prob_plus == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(qcore::max_abs_diff(r.post.matrix(), up_beam_one().matrix()) < 1e-12);
    }
}

TEST_CASE("bell state gives unbiased single-observable outcomes") {
    RandomSource rng(17);
    const auto xx = qcore::tensor(qcore::pauli_x(), qcore::identity2());
    int plus = 0;
    for (int i = 0; i < 4000; ++i) {
        const auto r = measurement::measure(bell_rho(), xx, rng);
        CHECK(r.prob_plus == doctest::Approx(0.5).epsilon(1e-12));
        plus += r.outcome == +1;
    }
    // 4000 fair coin flips: stay within 5 sigma = 5 * sqrt(1000).
    CHECK(std::abs(plus - 2000) < 5 * std::sqrt(1000.0));
}

TEST_CASE("perfectly anticorrelated observable always yields minus one") {
    RandomSource rng(23);
    const auto zz = qcore::tensor(qcore::pauli_z(), qcore::pauli_z());
    for (int i = 0; i < 50; ++i) {
        const auto r = measurement::measure(bell_rho(), zz, rng);
        CHECK(r.outcome == -1);
    }
}

TEST_CASE("repeating a measurement on the collapsed state reproduces the outcome") {
    RandomSource rng(31);
    const auto xy = qcore::tensor(qcore::pauli_x(), qcore::pauli_y());
    for (int i = 0; i < 50; ++i) {
        const auto first = measurement::measure(bell_rho(), xy, rng);
        const auto again = measurement::measure(first.post, xy, rng);
        CHECK(again.outcome == first.outcome);
    }
}

TEST_CASE("anticorrelated contexts give product minus one on every run") {
    RandomSource rng(47);
    for (const auto id : {ContextId::C1, ContextId::C2, ContextId::C5}) {
        const auto& c = pmsquare::context(id);
        for (int i = 0; i < 200; ++i) {
            const auto record = measurement::run_context(bell_rho(), c, rng);
            CHECK(record.product == -1);
            CHECK(record.context_id == id);
            CHECK(record.outcomes.size() == c.observables.size());
            int prod = 1;
            for (const int o : record.outcomes) {
                CHECK(std::abs(o) == 1);
                prod *= o;
            }
            CHECK(prod == record.product);
        }
    }
}

TEST_CASE("identity-product contexts give product plus one on any state") {
    RandomSource rng(53);
    for (const auto id : {ContextId::C3, ContextId::C4}) {
        const auto& c = pmsquare::context(id);
        for (int s = 0; s < 100; ++s) {
            const auto rho = DensityMatrix::pure(measurement::random_pure_state(rng));
            for (int i = 0; i < 10; ++i) {
                CHECK(measurement::run_context(rho, c, rng).product == +1);
            }
        }
    }
}

TEST_CASE("exact product expectation equals the closed-form trace") {
    const auto rho = bell_rho();
    const struct {
        ContextId id;
        double expected;
    } cases[] = {{ContextId::C1, -1.0},
                 {ContextId::C2, -1.0},
                 {ContextId::C3, +1.0},
                 {ContextId::C4, +1.0},
                 {ContextId::C5, -1.0}};
    for (const auto& c : cases) {
        const auto e = measurement::context_product_expectation(rho, pmsquare::context(c.id),
                                                                EstimationMode::Exact);
        CHECK(e.value == doctest::Approx(c.expected).epsilon(1e-12));
        CHECK(e.std_error == 0.0);
    }
}

TEST_CASE("sampled product expectation converges to the exact value") {
    RandomSource rng(61);
    // A state with a nondegenerate product expectation: cos(t)|up,I> + sin(t)|down,II>.
    const double t = 0.6;
    const auto psi = StateVector::from_amplitudes(
        {Complex{std::cos(t), 0}, 0.0, 0.0, Complex{std::sin(t), 0}});
    const auto rho = DensityMatrix::pure(psi);
    const auto& c1 = pmsquare::context(ContextId::C1);
    const auto exact = measurement::context_product_expectation(rho, c1, EstimationMode::Exact);
    const long shots = 20000;
    const auto sampled =
        measurement::context_product_expectation(rho, c1, EstimationMode::Sampled, shots, &rng);
    CHECK(sampled.std_error > 0.0);
    CHECK(std::abs(sampled.value - exact.value) < 5.0 * sampled.std_error);
    // Unbiased +-1 sample error: sqrt(n (1 - m^2) / (n - 1)) / sqrt(n).
    const double m = sampled.value;
    const double predicted = std::sqrt(shots * (1.0 - m * m) / (shots - 1.0) / shots);
    CHECK(sampled.std_error == doctest::Approx(predicted).epsilon(1e-12));
}

TEST_CASE("deterministic products sample with zero error") {
    RandomSource rng(67);
    const auto sampled = measurement::context_product_expectation(
        bell_rho(), pmsquare::context(ContextId::C3), EstimationMode::Sampled, 500, &rng);
    CHECK(sampled.value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sampled.std_error == 0.0);
}

TEST_CASE("sampled estimation validates its arguments") {
    RandomSource rng(71);
    const auto& c1 = pmsquare::context(ContextId::C1);
    CHECK_THROWS_AS(measurement::context_product_expectation(bell_rho(), c1,
                                                             EstimationMode::Sampled, 0, &rng),
                    std::invalid_argument);
    CHECK_THROWS_AS(measurement::context_product_expectation(bell_rho(), c1,
                                                             EstimationMode::Sampled, 100, nullptr),
                    std::invalid_argument);
}

TEST_CASE("joint distribution of an anticorrelated pair context") {
    const auto dist =
        measurement::exact_joint_distribution(bell_rho(), pmsquare::context(ContextId::C1));
    REQUIRE(dist.size() == 4);
    // Bit j set <=> observable j gave -1; only mixed-sign tuples survive.
    CHECK(dist[0] == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK(dist[1] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(dist[2] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(dist[3] == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("joint distribution sums to one on random states") {
    RandomSource rng(73);
    for (const auto& c : pmsquare::contexts()) {
        for (int s = 0; s < 10; ++s) {
            const auto rho = DensityMatrix::pure(measurement::random_pure_state(rng));
            const auto dist = measurement::exact_joint_distribution(rho, c);
            double total = 0.0;
            for (const double p : dist) {
                CHECK(p >= -1e-12);
                total += p;
            }
            CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
        }
    }
}

TEST_CASE("measurement order within a context does not change the statistics") {
    RandomSource rng(79);
    const auto& c3 = pmsquare::context(ContextId::C3);
    pmsquare::Context reversed = c3;
    std::reverse(reversed.observables.begin(), reversed.observables.end());
    for (int s = 0; s < 20; ++s) {
        const auto rho = DensityMatrix::pure(measurement::random_pure_state(rng));
        const auto fwd = measurement::exact_joint_distribution(rho, c3);
        const auto rev = measurement::exact_joint_distribution(rho, reversed);
        // Compare tuple by tuple after reversing the bit order of the index.
        for (int idx = 0; idx < 8; ++idx) {
            const int flipped = ((idx & 1) << 2) | (idx & 2) | ((idx >> 2) & 1);
            CHECK(fwd[idx] == doctest::Approx(rev[flipped]).scale(1.0).epsilon(1e-10));
        }
    }
}

TEST_CASE("collapse renormalizes and rejects zero-probability branches") {
    const auto projectors = qcore::eigenprojectors(qcore::tensor(qcore::pauli_z(), qcore::identity2()));
    const auto [post, weight] = measurement::collapse(bell_rho(), projectors.plus);
    CHECK(weight == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::abs(post.matrix().trace() - Complex{1, 0}) < 1e-12);
    // |up,I> has no sigma_z = -1 component at all.
    CHECK_THROWS_AS(measurement::collapse(up_beam_one(), projectors.minus),
                    qcore::DegenerateBranchError);
}

TEST_CASE("random pure states are normalized and seed-deterministic") {
    RandomSource a(83);
    RandomSource b(83);
    for (int i = 0; i < 20; ++i) {
        const auto s1 = measurement::random_pure_state(a);
        const auto s2 = measurement::random_pure_state(b);
        CHECK(s1.norm() == doctest::Approx(1.0).epsilon(1e-12));
        for (int k = 0; k < 4; ++k) {
            CHECK(s1.amplitude(k) == s2.amplitude(k));
        }
    }
}
