#include "contextsim/experiment.hpp"

#include <cmath>
#include <future>
#include <limits>
#include <stdexcept>

#include "contextsim/nchv.hpp"

namespace contextsim::experiment {

using measurement::RandomSource;
using pmsquare::Context;
using pmsquare::ContextId;
using pmsquare::Inequality;
using pmsquare::ObservableId;
using qcore::Complex;
using qcore::ComplexMatrix;
using qcore::DensityMatrix;
using qcore::tensor;
using qcore::Vec3;

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

void validate_noise(const NoiseModel& noise) {
    if (noise.visibility < 0.0 || noise.visibility > 1.0) {
        throw std::invalid_argument("visibility must lie in [0, 1]");
    }
    if (noise.spin_misalignment < 0.0 || noise.path_phase_jitter < 0.0) {
        throw std::invalid_argument("noise magnitudes must be non-negative");
    }
}

bool has_setting_noise(const NoiseModel& noise) {
    return noise.spin_misalignment > 0.0 || noise.path_phase_jitter > 0.0;
}

// Direction tilted uniformly within a cone of the given half-angle.
// Consumes exactly two uniform draws.
Vec3 tilt_within_cone(const Vec3& n, double half_angle, RandomSource& rng) {
    const double cos_alpha = 1.0 - rng.uniform() * (1.0 - std::cos(half_angle));
    const double beta = kTwoPi * rng.uniform();
    const double sin_alpha = std::sqrt(std::max(0.0, 1.0 - cos_alpha * cos_alpha));
    // Orthonormal frame around n.
    Vec3 e1{-n.y, n.x, 0.0};
    if (e1.norm() < 1e-9) {
        e1 = Vec3{1.0, 0.0, 0.0};
    }
    e1 = qcore::normalized(e1);
    const Vec3 e2{n.y * e1.z - n.z * e1.y, n.z * e1.x - n.x * e1.z, n.x * e1.y - n.y * e1.x};
    return qcore::normalized(Vec3{
        cos_alpha * n.x + sin_alpha * (std::cos(beta) * e1.x + std::sin(beta) * e2.x),
        cos_alpha * n.y + sin_alpha * (std::cos(beta) * e1.y + std::sin(beta) * e2.y),
        cos_alpha * n.z + sin_alpha * (std::cos(beta) * e1.z + std::sin(beta) * e2.z)});
}

// One run's analyzer alignment.  Draw order is fixed: spin x, spin y, spin z
// tilts, then the two beam-phase errors.
apparatus::AnalyzerSettings draw_settings(const NoiseModel& noise, RandomSource& rng) {
    apparatus::AnalyzerSettings s;
    if (noise.spin_misalignment > 0.0) {
        s.spin_x = tilt_within_cone(s.spin_x, noise.spin_misalignment, rng);
        s.spin_y = tilt_within_cone(s.spin_y, noise.spin_misalignment, rng);
        s.spin_z = tilt_within_cone(s.spin_z, noise.spin_misalignment, rng);
    }
    if (noise.path_phase_jitter > 0.0) {
        s.path_x_phase_error = rng.gaussian(noise.path_phase_jitter);
        s.path_y_phase_error = rng.gaussian(noise.path_phase_jitter);
    }
    return s;
}

// The abstract-mode view of misaligned hardware: each factor observable is
// measured along the perturbed analyzer direction, and the product observables
// are built from the same perturbed factors.  A beam phase error rotates a
// path direction about z.
Context perturbed_context(ContextId id, const apparatus::AnalyzerSettings& s) {
    const Vec3 path_x{std::cos(s.path_x_phase_error), std::sin(s.path_x_phase_error), 0.0};
    const Vec3 path_y{-std::sin(s.path_y_phase_error), std::cos(s.path_y_phase_error), 0.0};
    const ComplexMatrix sx = qcore::bloch(s.spin_x);
    const ComplexMatrix sy = qcore::bloch(s.spin_y);
    const ComplexMatrix px = qcore::bloch(path_x);
    const ComplexMatrix py = qcore::bloch(path_y);
    const ComplexMatrix& id2 = qcore::identity2();

    auto obs = [](ObservableId oid, ComplexMatrix m) {
        return pmsquare::Observable{oid, std::move(m)};
    };
    using O = ObservableId;
    switch (id) {
        case ContextId::C1:
            return Context{id, {obs(O::SpinX, tensor(sx, id2)), obs(O::PathX, tensor(id2, px))}, -1};
        case ContextId::C2:
            return Context{id, {obs(O::SpinY, tensor(sy, id2)), obs(O::PathY, tensor(id2, py))}, -1};
        case ContextId::C3:
            return Context{id,
                           {obs(O::SpinXPathY, tensor(sx, py)), obs(O::SpinX, tensor(sx, id2)),
                            obs(O::PathY, tensor(id2, py))},
                           +1};
        case ContextId::C4:
            return Context{id,
                           {obs(O::SpinYPathX, tensor(sy, px)), obs(O::SpinY, tensor(sy, id2)),
                            obs(O::PathX, tensor(id2, px))},
                           +1};
        case ContextId::C5:
            return Context{id,
                           {obs(O::SpinXPathY, tensor(sx, py)), obs(O::SpinYPathX, tensor(sy, px))},
                           -1};
    }
    throw std::invalid_argument("unknown context id");
}

int port_product(const apparatus::Port& port) {
    int prod = 1;
    for (const auto& [obs, val] : port.outcomes) {
        (void)obs;
        prod *= val;
    }
    return prod;
}

// Draws one port index from a cumulative scan of the distribution.
int sample_port(const std::vector<double>& probs, RandomSource& rng) {
    const double u = rng.uniform();
    double cum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        cum += probs[i];
        if (u < cum) {
            return static_cast<int>(i);
        }
    }
    return static_cast<int>(probs.size()) - 1;
}

ContextEstimate estimate_context(const DensityMatrix& state, ContextId id,
                                 const RunConfig& config, RandomSource rng) {
    const Context& ideal = pmsquare::context(id);
    const bool perturb = has_setting_noise(config.noise);
    const long shots = config.shots_per_context;

    long plus = 0;
    double post_selection_sum = 0.0;

    if (config.mode == RunMode::Abstract) {
        for (long i = 0; i < shots; ++i) {
            const Context c = perturb ? perturbed_context(id, draw_settings(config.noise, rng))
                                      : ideal;
            if (measurement::run_context(state, c, rng).product > 0) {
                ++plus;
            }
            post_selection_sum += 1.0;
        }
    } else {
        apparatus::Apparatus fixed_app;
        apparatus::PortDistribution fixed_dist;
        if (!perturb) {
            fixed_app = apparatus::scheme_for_context(id);
            fixed_dist = apparatus::port_distribution(fixed_app, state);
        }
        for (long i = 0; i < shots; ++i) {
            const apparatus::Apparatus* app = &fixed_app;
            const apparatus::PortDistribution* dist = &fixed_dist;
            apparatus::Apparatus run_app;
            apparatus::PortDistribution run_dist;
            if (perturb) {
                run_app = apparatus::scheme_for_context(id, draw_settings(config.noise, rng));
                run_dist = apparatus::port_distribution(run_app, state);
                app = &run_app;
                dist = &run_dist;
            }
            const int port = sample_port(dist->probabilities, rng);
            if (port_product(app->ports[port]) > 0) {
                ++plus;
            }
            post_selection_sum += dist->post_selection_probability;
        }
    }

    const double n = static_cast<double>(shots);
    const double mean = (2.0 * static_cast<double>(plus) - n) / n;
    double std_error = 0.0;
    if (shots > 1) {
        const double var = std::max(0.0, n * (1.0 - mean * mean) / (n - 1.0));
        std_error = std::sqrt(var / n);
    }
    return ContextEstimate{id, ideal.coefficient, mean, std_error, post_selection_sum / n};
}

}  // namespace

DensityMatrix werner_state(double visibility) {
    if (visibility < 0.0 || visibility > 1.0) {
        throw std::invalid_argument("visibility must lie in [0, 1]");
    }
    const ComplexMatrix bell = qcore::outer(pmsquare::bell_state(), pmsquare::bell_state());
    const ComplexMatrix mixed =
        Complex(visibility) * bell + Complex((1.0 - visibility) * 0.25) * qcore::identity4();
    return DensityMatrix::trusted(mixed);
}

EstimateReport estimate_inequality(const RunConfig& config) {
    validate_noise(config.noise);
    if (config.shots_per_context < 1) {
        throw std::invalid_argument("shots_per_context must be at least 1");
    }
    const DensityMatrix state = werner_state(config.noise.visibility);
    const std::vector<Context> ctxs = pmsquare::inequality_contexts(config.inequality);

    // One derived stream per context id; completion order cannot matter
    // because results are combined by index.
    std::vector<std::future<ContextEstimate>> futures;
    futures.reserve(ctxs.size());
    for (const Context& c : ctxs) {
        const ContextId id = c.id;
        RandomSource stream(config.seed, 1 + static_cast<std::uint64_t>(static_cast<int>(id)));
        futures.push_back(std::async(std::launch::async, [state, id, config, stream] {
            return estimate_context(state, id, config, stream);
        }));
    }

    EstimateReport report{};
    double sum_sq = 0.0;
    for (auto& f : futures) {
        report.terms.push_back(f.get());
    }
    report.value = 0.0;
    for (const ContextEstimate& t : report.terms) {
        report.value += t.coefficient * t.mean;
        sum_sq += t.std_error * t.std_error;
    }
    report.std_error = std::sqrt(sum_sq);
    report.classical_bound = static_cast<double>(nchv::nchv_bound(config.inequality).bound);
    report.violation = report.value > report.classical_bound;
    report.sigma_above_bound =
        report.std_error > 0.0
            ? (report.value - report.classical_bound) / report.std_error
            : std::numeric_limits<double>::infinity();
    return report;
}

double exact_context_expectation(const DensityMatrix& state, ContextId id, RunMode mode) {
    if (mode == RunMode::Abstract) {
        return state.expectation(pmsquare::product_matrix(pmsquare::context(id)));
    }
    const apparatus::Apparatus app = apparatus::scheme_for_context(id);
    const apparatus::PortDistribution dist = apparatus::port_distribution(app, state);
    double expectation = 0.0;
    for (std::size_t i = 0; i < app.ports.size(); ++i) {
        expectation += port_product(app.ports[i]) * dist.probabilities[i];
    }
    return expectation;
}

double critical_visibility(Inequality which) {
    const double bound = static_cast<double>(nchv::nchv_bound(which).bound);
    auto value_at = [&](double v) {
        return pmsquare::ideal_inequality_value(werner_state(v), which);
    };
    double lo = 0.0;
    double hi = 1.0;
    if (value_at(lo) - bound >= 0.0 || value_at(hi) - bound <= 0.0) {
        throw qcore::InternalConsistencyError("inequality value does not bracket its bound");
    }
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (value_at(mid) - bound > 0.0) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double chsh_value(const DensityMatrix& state, const MeasurementSetting& settings) {
    for (const Vec3* v : {&settings.a0, &settings.a1, &settings.b0, &settings.b1}) {
        if (std::abs(v->norm() - 1.0) > 1e-9) {
            throw std::invalid_argument("measurement directions must be unit vectors");
        }
    }
    auto corr = [&](const Vec3& a, const Vec3& b) {
        return state.expectation(qcore::tensor(qcore::bloch(a), qcore::bloch(b)));
    };
    return corr(settings.a0, settings.b0) + corr(settings.a0, settings.b1) +
           corr(settings.a1, settings.b0) - corr(settings.a1, settings.b1);
}

MeasurementSetting optimal_chsh_settings() {
    const double r = 1.0 / std::sqrt(2.0);
    // Signs chosen so the anticorrelated Bell state gives +2 sqrt 2.
    return MeasurementSetting{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {-r, -r, 0.0}, {-r, r, 0.0}};
}

}  // namespace contextsim::experiment
