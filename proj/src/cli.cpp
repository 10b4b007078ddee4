#include "contextsim/cli.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "contextsim/apparatus.hpp"
#include "contextsim/experiment.hpp"
#include "contextsim/nchv.hpp"
#include "contextsim/pmsquare.hpp"
#include "contextsim/qcore.hpp"

namespace contextsim::cli {
namespace {

using nlohmann::ordered_json;

// Resolved option set.  Precedence: built-in default, then CONTEXTUALITY_SEED,
// then --config file entries, then explicit flags.
struct Options {
    std::string inequality = "eq7";
    long shots = 100000;
    std::uint64_t seed = 42;
    double visibility = 1.0;
    double misalignment = 0.0;
    double jitter = 0.0;
    std::string mode = "abstract";
    int points = 21;
    std::string format = "json";
    std::string output;
    bool deterministic = false;
};

// Round-trips a value through 12 significant decimal digits, the precision
// every report is emitted with.
double round12(double v) {
    if (!std::isfinite(v)) {
        return v;
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return std::strtod(buf, nullptr);
}

std::string fmt12(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

struct Csv {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

std::string render_csv(const Csv& csv) {
    std::ostringstream out;
    auto line = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i > 0) {
                out << ',';
            }
            out << cells[i];
        }
        out << '\n';
    };
    line(csv.header);
    for (const auto& row : csv.rows) {
        line(row);
    }
    return out.str();
}

pmsquare::Inequality parse_inequality(const std::string& s) {
    if (s == "eq6") {
        return pmsquare::Inequality::Eq6;
    }
    if (s == "eq7") {
        return pmsquare::Inequality::Eq7;
    }
    throw std::invalid_argument("inequality must be eq6 or eq7, got '" + s + "'");
}

experiment::RunMode parse_mode(const std::string& s) {
    if (s == "abstract") {
        return experiment::RunMode::Abstract;
    }
    if (s == "apparatus") {
        return experiment::RunMode::Apparatus;
    }
    throw std::invalid_argument("mode must be abstract or apparatus, got '" + s + "'");
}

void apply_env(Options& o) {
    const char* env = std::getenv("CONTEXTUALITY_SEED");
    if (env == nullptr || *env == '\0') {
        return;
    }
    const std::string text(env);
    errno = 0;
    char* end = nullptr;
    const unsigned long long value = std::strtoull(text.c_str(), &end, 10);
    if (errno != 0 || end == text.c_str() || *end != '\0' || text[0] == '-') {
        throw std::invalid_argument("CONTEXTUALITY_SEED must be a nonnegative integer, got '" +
                                    text + "'");
    }
    o.seed = value;
}

void apply_config_file(const std::string& path, Options& o) {
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("cannot open config file: " + path);
    }
    const ordered_json j = ordered_json::parse(in);
    if (!j.is_object()) {
        throw std::invalid_argument("config file must hold a JSON object: " + path);
    }
    for (const auto& [key, value] : j.items()) {
        if (key == "inequality") {
            o.inequality = value.get<std::string>();
        } else if (key == "shots") {
            o.shots = value.get<long>();
        } else if (key == "seed") {
            o.seed = value.get<std::uint64_t>();
        } else if (key == "visibility") {
            o.visibility = value.get<double>();
        } else if (key == "misalignment") {
            o.misalignment = value.get<double>();
        } else if (key == "jitter") {
            o.jitter = value.get<double>();
        } else if (key == "mode") {
            o.mode = value.get<std::string>();
        } else if (key == "points") {
            o.points = value.get<int>();
        } else if (key == "format") {
            o.format = value.get<std::string>();
        } else if (key == "output") {
            o.output = value.get<std::string>();
        } else if (key == "deterministic") {
            o.deterministic = value.get<bool>();
        } else {
            throw std::invalid_argument("unknown config key: " + key);
        }
    }
}

std::string now_iso8601() {
    const std::time_t t = std::time(nullptr);
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

ordered_json reference_entry(const experiment::ReferenceValue& r) {
    ordered_json j;
    j["value"] = round12(r.value);
    j["uncertainty"] = round12(r.uncertainty);
    j["citation"] = r.citation;
    return j;
}

ordered_json references_json() {
    ordered_json r;
    r["chsh_classical_bound"] = round12(experiment::kChshClassicalBound);
    r["chsh_quantum_maximum"] = round12(experiment::kChshQuantumMax);
    r["ion_pair_chsh"] = reference_entry(experiment::kIonPairChsh);
    r["neutron_chsh"] = reference_entry(experiment::kNeutronChsh);
    r["expected_neutron_contextuality"] = round12(experiment::kExpectedNeutronContextuality);
    return r;
}

ordered_json witness_json(const nchv::Assignment& a) {
    ordered_json w;
    for (std::size_t i = 0; i < nchv::kAssignedObservables.size(); ++i) {
        w[pmsquare::observable_name(nchv::kAssignedObservables[i])] = a.values[i];
    }
    return w;
}

std::string witness_string(const nchv::Assignment& a) {
    std::ostringstream out;
    for (std::size_t i = 0; i < nchv::kAssignedObservables.size(); ++i) {
        if (i > 0) {
            out << ';';
        }
        out << pmsquare::observable_name(nchv::kAssignedObservables[i])
            << (a.values[i] > 0 ? "=+1" : "=-1");
    }
    return out.str();
}

// Serializes non-finite values (an infinite sigma from a zero standard error)
// as null rather than an out-of-band token.
ordered_json json_number(double v) {
    if (!std::isfinite(v)) {
        return nullptr;
    }
    return round12(v);
}

ordered_json vec3_json(const qcore::Vec3& v) {
    return ordered_json::array({round12(v.x), round12(v.y), round12(v.z)});
}

int handle_bounds(const Options& o, ordered_json& config, ordered_json& results, Csv& csv) {
    std::vector<pmsquare::Inequality> selected;
    if (o.inequality == "both") {
        selected = {pmsquare::Inequality::Eq6, pmsquare::Inequality::Eq7};
    } else {
        selected = {parse_inequality(o.inequality)};
    }
    config["inequality"] = o.inequality;
    csv.header = {"inequality", "classical_bound", "quantum_value", "assignments_searched",
                  "witness"};
    for (const auto which : selected) {
        const auto report = nchv::nchv_bound(which);
        const double quantum = pmsquare::ideal_inequality_value(pmsquare::bell_state(), which);
        ordered_json j;
        j["classical_bound"] = report.bound;
        j["quantum_value"] = round12(quantum);
        j["assignments_searched"] = report.assignments_searched;
        j["witness"] = witness_json(report.witness);
        if (which == pmsquare::Inequality::Eq7) {
            const auto control = nchv::nchv_bound(which, /*constrained=*/false);
            j["unconstrained_bound"] = control.bound;
            j["unconstrained_assignments_searched"] = control.assignments_searched;
        }
        results[pmsquare::inequality_name(which)] = j;
        csv.rows.push_back({pmsquare::inequality_name(which), std::to_string(report.bound),
                            fmt12(quantum), std::to_string(report.assignments_searched),
                            witness_string(report.witness)});
    }
    return 0;
}

int handle_ideal(const Options&, ordered_json&, ordered_json& results, Csv& csv) {
    const auto& bell = pmsquare::bell_state();
    const auto rho = qcore::DensityMatrix::pure(bell);
    results["state"] = "bell";
    ordered_json amplitudes = ordered_json::array();
    for (int i = 0; i < 4; ++i) {
        const auto a = bell.amplitude(i);
        amplitudes.push_back(ordered_json::array({round12(a.real()), round12(a.imag())}));
    }
    results["state_amplitudes"] = amplitudes;
    ordered_json context_table = ordered_json::array();
    csv.header = {"context", "coefficient", "expectation"};
    for (const auto& c : pmsquare::contexts()) {
        const double expectation = rho.expectation(pmsquare::product_matrix(c));
        ordered_json entry;
        entry["context"] = pmsquare::context_name(c.id);
        ordered_json names = ordered_json::array();
        for (const auto& obs : c.observables) {
            names.push_back(pmsquare::observable_name(obs.id));
        }
        entry["observables"] = names;
        entry["coefficient"] = c.coefficient;
        entry["expectation"] = round12(expectation);
        context_table.push_back(entry);
        csv.rows.push_back({pmsquare::context_name(c.id), std::to_string(c.coefficient),
                            fmt12(expectation)});
    }
    results["contexts"] = context_table;
    for (const auto which : {pmsquare::Inequality::Eq6, pmsquare::Inequality::Eq7}) {
        ordered_json j;
        j["value"] = round12(pmsquare::ideal_inequality_value(bell, which));
        j["classical_bound"] = nchv::nchv_bound(which).bound;
        results[pmsquare::inequality_name(which)] = j;
    }
    return 0;
}

int handle_ks_check(const Options&, ordered_json&, ordered_json& results, Csv& csv) {
    const auto report = nchv::ks_contradiction_report();
    results["assignments"] = report.assignments;
    results["satisfying_all_five"] = report.satisfying_all_five;
    results["max_satisfiable"] = report.max_satisfiable;
    results["best_witness"] = witness_json(report.best_witness);
    results["lhs_product_always_plus_one"] = report.lhs_product_always_plus_one;
    results["rhs_product"] = report.rhs_product;
    results["contradiction"] = report.satisfying_all_five == 0;
    csv.header = {"assignments", "satisfying_all_five", "max_satisfiable", "rhs_product",
                  "contradiction"};
    csv.rows.push_back({std::to_string(report.assignments),
                        std::to_string(report.satisfying_all_five),
                        std::to_string(report.max_satisfiable), std::to_string(report.rhs_product),
                        report.satisfying_all_five == 0 ? "true" : "false"});
    return 0;
}

int handle_simulate(const Options& o, ordered_json& config, ordered_json& results, Csv& csv) {
    experiment::RunConfig run;
    run.inequality = parse_inequality(o.inequality);
    run.shots_per_context = o.shots;
    run.noise = {o.visibility, o.misalignment, o.jitter};
    run.seed = o.seed;
    run.mode = parse_mode(o.mode);

    config["inequality"] = o.inequality;
    config["shots_per_context"] = o.shots;
    config["seed"] = o.seed;
    config["visibility"] = round12(o.visibility);
    config["spin_misalignment"] = round12(o.misalignment);
    config["path_phase_jitter"] = round12(o.jitter);
    config["mode"] = o.mode;

    const auto report = experiment::estimate_inequality(run);
    ordered_json terms = ordered_json::array();
    csv.header = {"context", "coefficient", "mean", "std_error", "post_selection"};
    for (const auto& term : report.terms) {
        ordered_json entry;
        entry["context"] = pmsquare::context_name(term.id);
        entry["coefficient"] = term.coefficient;
        entry["mean"] = round12(term.mean);
        entry["std_error"] = round12(term.std_error);
        entry["post_selection"] = round12(term.post_selection);
        terms.push_back(entry);
        csv.rows.push_back({pmsquare::context_name(term.id), std::to_string(term.coefficient),
                            fmt12(term.mean), fmt12(term.std_error), fmt12(term.post_selection)});
    }
    results["terms"] = terms;
    results["value"] = round12(report.value);
    results["std_error"] = round12(report.std_error);
    results["classical_bound"] = round12(report.classical_bound);
    results["violation"] = report.violation;
    results["sigma_above_bound"] = json_number(report.sigma_above_bound);
    csv.rows.push_back({"combined", "", fmt12(report.value), fmt12(report.std_error), ""});
    return 0;
}

int handle_sweep(const Options& o, ordered_json& config, ordered_json& results, Csv& csv) {
    const auto which = parse_inequality(o.inequality);
    if (o.points < 2) {
        throw std::invalid_argument("sweep needs at least 2 points, got " +
                                    std::to_string(o.points));
    }
    config["inequality"] = o.inequality;
    config["points"] = o.points;
    const double bound = nchv::nchv_bound(which).bound;
    results["classical_bound"] = round12(bound);
    results["critical_visibility"] = round12(experiment::critical_visibility(which));
    ordered_json table = ordered_json::array();
    csv.header = {"visibility", "value", "violation"};
    for (int i = 0; i < o.points; ++i) {
        const double visibility = static_cast<double>(i) / (o.points - 1);
        const double value =
            pmsquare::ideal_inequality_value(experiment::werner_state(visibility), which);
        const bool violation = value > bound;
        ordered_json entry;
        entry["visibility"] = round12(visibility);
        entry["value"] = round12(value);
        entry["violation"] = violation;
        table.push_back(entry);
        csv.rows.push_back({fmt12(visibility), fmt12(value), violation ? "true" : "false"});
    }
    results["points"] = table;
    return 0;
}

int handle_verify(const Options&, ordered_json& config, ordered_json& results, Csv& csv) {
    const double tol = qcore::kDerivedTol;
    config["tolerance"] = round12(tol);
    const auto& probes = apparatus::tomographic_probes();
    ordered_json checks = ordered_json::array();
    csv.header = {"apparatus", "context", "max_deviation", "product_constraint_ok", "pass"};
    bool all_pass = true;
    using pmsquare::ContextId;
    for (const auto id :
         {ContextId::C1, ContextId::C2, ContextId::C3, ContextId::C4, ContextId::C5}) {
        const auto scheme = apparatus::scheme_for_context(id);
        const auto report =
            apparatus::verify_against_abstract(scheme, pmsquare::context(id), probes, tol);
        all_pass = all_pass && report.pass;
        ordered_json entry;
        entry["apparatus"] = report.apparatus_name;
        entry["context"] = pmsquare::context_name(id);
        entry["max_deviation"] = round12(report.max_deviation);
        entry["product_constraint_ok"] = report.product_constraint_ok;
        entry["pass"] = report.pass;
        checks.push_back(entry);
        csv.rows.push_back({report.apparatus_name, pmsquare::context_name(id),
                            fmt12(report.max_deviation),
                            report.product_constraint_ok ? "true" : "false",
                            report.pass ? "true" : "false"});
    }
    // The erasure schemes must physically contain the pair-discrimination
    // scheme: identical leading elements, not merely equivalent statistics.
    const auto pair_scheme = apparatus::build_scheme_ii();
    bool prefix_ok = true;
    for (const auto first :
         {pmsquare::ObservableId::SpinXPathY, pmsquare::ObservableId::SpinYPathX}) {
        const auto eraser = apparatus::build_scheme_iii(first);
        prefix_ok = prefix_ok && eraser.elements.size() >= pair_scheme.elements.size() &&
                    std::equal(pair_scheme.elements.begin(), pair_scheme.elements.end(),
                               eraser.elements.begin());
    }
    results["checks"] = checks;
    results["eraser_reuses_pair_scheme_prefix"] = prefix_ok;
    results["all_pass"] = all_pass && prefix_ok;
    return (all_pass && prefix_ok) ? 0 : 2;
}

int handle_chsh(const Options& o, ordered_json& config, ordered_json& results, Csv& csv) {
    config["visibility"] = round12(o.visibility);
    const auto settings = experiment::optimal_chsh_settings();
    const double value = experiment::chsh_value(experiment::werner_state(o.visibility), settings);
    results["visibility"] = round12(o.visibility);
    results["value"] = round12(value);
    results["classical_bound"] = round12(experiment::kChshClassicalBound);
    results["quantum_maximum"] = round12(experiment::kChshQuantumMax);
    results["werner_prediction"] = round12(experiment::kChshQuantumMax * o.visibility);
    results["violation"] = value > experiment::kChshClassicalBound;
    ordered_json dirs;
    dirs["a0"] = vec3_json(settings.a0);
    dirs["a1"] = vec3_json(settings.a1);
    dirs["b0"] = vec3_json(settings.b0);
    dirs["b1"] = vec3_json(settings.b1);
    results["settings"] = dirs;
    csv.header = {"visibility", "value", "classical_bound", "quantum_maximum", "violation"};
    csv.rows.push_back({fmt12(o.visibility), fmt12(value),
                        fmt12(experiment::kChshClassicalBound),
                        fmt12(experiment::kChshQuantumMax),
                        value > experiment::kChshClassicalBound ? "true" : "false"});
    return 0;
}

int run_impl(const std::vector<std::string>& args) {
    Options o;
    apply_env(o);
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) {
                throw std::invalid_argument("--config requires a file path");
            }
            apply_config_file(args[i + 1], o);
        } else if (args[i].rfind("--config=", 0) == 0) {
            apply_config_file(args[i].substr(9), o);
        }
    }

    CLI::App app{"Single-neutron spin-path contextuality experiment simulator"};
    app.require_subcommand(1);
    std::string config_path;  // consumed by the pre-scan above

    const auto add_report_options = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON file supplying option defaults");
        sub->add_option("--output", o.output, "write the report to this file instead of stdout");
        sub->add_option("--format", o.format, "report format: json or csv");
        sub->add_flag("--deterministic", o.deterministic,
                      "omit the timestamp so identical runs emit identical bytes");
        return sub;
    };

    auto* bounds = add_report_options(
        app.add_subcommand("bounds", "exhaustive noncontextual bounds of the inequalities"));
    bounds->add_option("--inequality", o.inequality, "eq6, eq7, or both");

    add_report_options(
        app.add_subcommand("ideal", "exact quantum predictions for the entangled state"));

    add_report_options(app.add_subcommand(
        "ks-check", "parity argument: no assignment matches all five context products"));

    auto* simulate = add_report_options(
        app.add_subcommand("simulate", "finite-shot noisy estimate of an inequality"));
    simulate->add_option("--inequality", o.inequality, "eq6 or eq7");
    simulate->add_option("--shots", o.shots, "shots per context");
    simulate->add_option("--seed", o.seed, "base seed for all random streams");
    simulate->add_option("--visibility", o.visibility, "Werner state visibility in [0,1]");
    simulate->add_option("--misalignment", o.misalignment,
                         "spin analyzer cone half-angle in radians");
    simulate->add_option("--jitter", o.jitter, "path phase jitter standard deviation in radians");
    simulate->add_option("--mode", o.mode, "abstract or apparatus");

    auto* sweep = add_report_options(app.add_subcommand(
        "sweep-visibility", "exact inequality value across Werner visibilities"));
    sweep->add_option("--inequality", o.inequality, "eq6 or eq7");
    sweep->add_option("--points", o.points, "number of evenly spaced visibilities");

    add_report_options(app.add_subcommand(
        "verify-apparatus", "check every interferometer scheme against the abstract contexts"));

    auto* chsh = add_report_options(
        app.add_subcommand("chsh", "CHSH value of the Werner state at the optimal settings"));
    chsh->add_option("--visibility", o.visibility, "Werner state visibility in [0,1]");

    {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        try {
            app.parse(reversed);
        } catch (const CLI::CallForHelp& e) {
            return app.exit(e);
        } catch (const CLI::CallForAllHelp& e) {
            return app.exit(e);
        } catch (const CLI::ParseError& e) {
            std::cerr << "invalid input: " << e.what() << "\n";
            return 1;
        }
    }

    if (o.format != "json" && o.format != "csv") {
        throw std::invalid_argument("format must be json or csv, got '" + o.format + "'");
    }

    const auto* active = app.get_subcommands().front();
    const std::string name = active->get_name();

    ordered_json config;
    config["subcommand"] = name;
    ordered_json results;
    Csv csv;
    int code = 0;
    if (name == "bounds") {
        code = handle_bounds(o, config, results, csv);
    } else if (name == "ideal") {
        code = handle_ideal(o, config, results, csv);
    } else if (name == "ks-check") {
        code = handle_ks_check(o, config, results, csv);
    } else if (name == "simulate") {
        code = handle_simulate(o, config, results, csv);
    } else if (name == "sweep-visibility") {
        code = handle_sweep(o, config, results, csv);
    } else if (name == "verify-apparatus") {
        code = handle_verify(o, config, results, csv);
    } else if (name == "chsh") {
        code = handle_chsh(o, config, results, csv);
    } else {
        throw std::invalid_argument("unknown subcommand: " + name);
    }

    std::string text;
    if (o.format == "json") {
        ordered_json doc;
        doc["config"] = config;
        doc["results"] = results;
        doc["references"] = references_json();
        if (!o.deterministic) {
            doc["timestamp"] = now_iso8601();
        }
        text = doc.dump(2);
        text += '\n';
    } else {
        text = render_csv(csv);
    }

    if (o.output.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(o.output, std::ios::binary);
        if (!out) {
            throw std::invalid_argument("cannot open output file: " + o.output);
        }
        out << text;
        if (!out) {
            throw std::invalid_argument("failed writing output file: " + o.output);
        }
    }
    return code;
}

}  // namespace

int run(const std::vector<std::string>& args) {
    try {
        return run_impl(args);
    } catch (const qcore::InternalConsistencyError& e) {
        std::cerr << "internal consistency failure: " << e.what() << "\n";
        return 2;
    } catch (const qcore::DegenerateBranchError& e) {
        std::cerr << "internal consistency failure: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

int run(int argc, const char* const* argv) {
    std::vector<std::string> args;
    args.reserve(argc > 0 ? static_cast<std::size_t>(argc) - 1 : 0);
    for (int i = 1; i < argc; ++i) {
        args.emplace_back(argv[i]);
    }
    return run(args);
}

}  // namespace contextsim::cli
