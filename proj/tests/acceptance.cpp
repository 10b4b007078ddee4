// Acceptance checks for the full simulation stack.  Each criterion prints one
// PASS/FAIL line; the process exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "contextsim/apparatus.hpp"
#include "contextsim/cli.hpp"
#include "contextsim/experiment.hpp"
#include "contextsim/measurement.hpp"
#include "contextsim/nchv.hpp"
#include "contextsim/pmsquare.hpp"
#include "contextsim/qcore.hpp"

using namespace contextsim;

namespace {

int failures = 0;

void criterion(int number, const std::string& title,
               const std::function<bool(std::ostringstream&)>& body) {
    std::ostringstream detail;
    bool ok = false;
    try {
        ok = body(detail);
    } catch (const std::exception& e) {
        detail << " [exception: " << e.what() << "]";
    }
    std::printf("%s criterion %d: %s%s\n", ok ? "PASS" : "FAIL", number, title.c_str(),
                detail.str().c_str());
    if (!ok) {
        ++failures;
    }
}

double elapsed_ms(const std::chrono::steady_clock::time_point& start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

int main() {
    using pmsquare::ContextId;
    using pmsquare::Inequality;
    using pmsquare::ObservableId;

    criterion(1, "five-term bound (eq6) is 3 over all 64 assignments in under 1 ms",
              [](std::ostringstream& detail) {
                  nchv::nchv_bound(Inequality::Eq6);  // warm up
                  const auto start = std::chrono::steady_clock::now();
                  const auto report = nchv::nchv_bound(Inequality::Eq6);
                  const double ms = elapsed_ms(start);
                  detail << " [bound " << report.bound << ", " << report.assignments_searched
                         << " assignments, " << ms << " ms]";
                  return report.bound == 3 && report.assignments_searched == 64 && ms < 1.0 &&
                         nchv::nchv_value(report.witness, Inequality::Eq6) == 3.0;
              });

    criterion(2,
              "three-term bound (eq7) is 1 over the 16 factorizing assignments in under 1 ms, "
              "and 3 without the constraint",
              [](std::ostringstream& detail) {
                  nchv::nchv_bound(Inequality::Eq7);  // warm up
                  const auto start = std::chrono::steady_clock::now();
                  const auto report = nchv::nchv_bound(Inequality::Eq7);
                  const double ms = elapsed_ms(start);
                  const auto control = nchv::nchv_bound(Inequality::Eq7, false);
                  detail << " [bound " << report.bound << " over "
                         << report.assignments_searched << ", control " << control.bound
                         << " over " << control.assignments_searched << ", " << ms << " ms]";
                  return report.bound == 1 && report.assignments_searched == 16 && ms < 1.0 &&
                         control.bound == 3 && control.assignments_searched == 64;
              });

    criterion(3, "no assignment matches all five context products; at most 4 of 5 hold",
              [](std::ostringstream& detail) {
                  const auto report = nchv::ks_contradiction_report();
                  detail << " [" << report.satisfying_all_five << "/" << report.assignments
                         << " satisfy all, best " << report.max_satisfiable
                         << "/5, value products " << (report.lhs_product_always_plus_one ? "+1" : "?")
                         << " vs required " << report.rhs_product << "]";
                  return report.assignments == 64 && report.satisfying_all_five == 0 &&
                         report.max_satisfiable == 4 && report.lhs_product_always_plus_one &&
                         report.rhs_product == -1;
              });

    criterion(4, "entangled-state predictions: eq6 value 5 and eq7 value 3 within 1e-12",
              [](std::ostringstream& detail) {
                  const auto& bell = pmsquare::bell_state();
                  const double eq6 = pmsquare::ideal_inequality_value(bell, Inequality::Eq6);
                  const double eq7 = pmsquare::ideal_inequality_value(bell, Inequality::Eq7);
                  detail << " [eq6 " << eq6 << ", eq7 " << eq7 << "]";
                  return std::abs(eq6 - 5.0) < 1e-12 && std::abs(eq7 - 3.0) < 1e-12;
              });

    criterion(5, "identity-product contexts give outcome product +1 in 10000 sequential runs",
              [](std::ostringstream& detail) {
                  measurement::RandomSource rng(1905);
                  long runs = 0;
                  for (int s = 0; s < 100; ++s) {
                      const auto rho =
                          qcore::DensityMatrix::pure(measurement::random_pure_state(rng));
                      for (const auto id : {ContextId::C3, ContextId::C4}) {
                          const auto& c = pmsquare::context(id);
                          for (int i = 0; i < 50; ++i) {
                              ++runs;
                              if (measurement::run_context(rho, c, rng).product != +1) {
                                  detail << " [failed on run " << runs << "]";
                                  return false;
                              }
                          }
                      }
                  }
                  detail << " [" << runs << " runs across 100 random states]";
                  return runs == 10000;
              });

    criterion(6, "product of the two mixed observables equals sigma_z x sigma_z within 1e-12",
              [](std::ostringstream& detail) {
                  const auto& xy = pmsquare::observable(ObservableId::SpinXPathY).matrix;
                  const auto& yx = pmsquare::observable(ObservableId::SpinYPathX).matrix;
                  const auto& zz = pmsquare::observable(ObservableId::SpinZPathZ).matrix;
                  const double diff = qcore::max_abs_diff(xy * yx, zz);
                  detail << " [max deviation " << diff << "]";
                  return diff < 1e-12 && qcore::commutes(xy, yx);
              });

    criterion(7,
              "all five apparatus schemes match the abstract contexts on 16 probe states "
              "within 1e-10, and the eraser scheme physically extends the pair scheme",
              [](std::ostringstream& detail) {
                  const auto& probes = apparatus::tomographic_probes();
                  double worst = 0.0;
                  bool pass = probes.size() == 16;
                  for (const auto id : {ContextId::C1, ContextId::C2, ContextId::C3,
                                        ContextId::C4, ContextId::C5}) {
                      const auto app = apparatus::scheme_for_context(id);
                      const auto report =
                          apparatus::verify_against_abstract(app, pmsquare::context(id), probes);
                      worst = std::max(worst, report.max_deviation);
                      pass = pass && report.pass && report.product_constraint_ok;
                  }
                  const auto pair_scheme = apparatus::build_scheme_ii();
                  for (const auto first :
                       {ObservableId::SpinXPathY, ObservableId::SpinYPathX}) {
                      const auto eraser = apparatus::build_scheme_iii(first);
                      bool prefix = eraser.elements.size() >= pair_scheme.elements.size();
                      for (std::size_t i = 0; prefix && i < pair_scheme.elements.size(); ++i) {
                          prefix = eraser.elements[i] == pair_scheme.elements[i];
                      }
                      pass = pass && prefix;
                  }
                  detail << " [worst deviation " << worst << "]";
                  return pass && worst < 1e-10;
              });

    criterion(8,
              "noiseless eq7 estimate with 100000 shots per context reaches 3 within "
              "5 standard errors, error below 0.01, in under 10 s",
              [](std::ostringstream& detail) {
                  experiment::RunConfig config;
                  config.inequality = Inequality::Eq7;
                  config.shots_per_context = 100000;
                  config.seed = 42;
                  const auto start = std::chrono::steady_clock::now();
                  const auto report = experiment::estimate_inequality(config);
                  const double seconds = elapsed_ms(start) / 1000.0;
                  detail << " [value " << report.value << " +- " << report.std_error << ", "
                         << seconds << " s]";
                  return std::abs(report.value - 3.0) <= 5.0 * report.std_error &&
                         report.std_error < 0.01 && seconds < 10.0 && report.violation;
              });

    criterion(9,
              "both violations vanish at visibility 1/3 within 1e-9, and the eq7 value at "
              "visibility 0.7 is 2.1 within 1e-12",
              [](std::ostringstream& detail) {
                  const double v6 = experiment::critical_visibility(Inequality::Eq6);
                  const double v7 = experiment::critical_visibility(Inequality::Eq7);
                  const double at07 = pmsquare::ideal_inequality_value(
                      experiment::werner_state(0.7), Inequality::Eq7);
                  detail << " [critical " << v6 << " / " << v7 << ", value(0.7) " << at07 << "]";
                  return std::abs(v6 - 1.0 / 3.0) < 1e-9 && std::abs(v7 - 1.0 / 3.0) < 1e-9 &&
                         std::abs(at07 - 2.1) < 1e-12;
              });

    criterion(10,
              "chsh reaches 2*sqrt(2) on the entangled state within 1e-10 and scales "
              "linearly with werner visibility",
              [](std::ostringstream& detail) {
                  const auto settings = experiment::optimal_chsh_settings();
                  const double top = experiment::chsh_value(
                      qcore::DensityMatrix::pure(pmsquare::bell_state()), settings);
                  bool linear = true;
                  double worst = 0.0;
                  for (int i = 0; i <= 9; ++i) {
                      const double v = i / 9.0;
                      const double value =
                          experiment::chsh_value(experiment::werner_state(v), settings);
                      const double dev = std::abs(value - experiment::kChshQuantumMax * v);
                      worst = std::max(worst, dev);
                      linear = linear && dev < 1e-10;
                  }
                  detail << " [top " << top << ", worst linearity deviation " << worst << "]";
                  return std::abs(top - experiment::kChshQuantumMax) < 1e-10 && linear;
              });

    criterion(11, "seeded deterministic reports are byte-for-byte reproducible",
              [](std::ostringstream& detail) {
                  const auto dir = std::filesystem::temp_directory_path();
                  bool ok = true;
                  int pair_index = 0;
                  for (const std::string mode : {"abstract", "apparatus"}) {
                      const auto a = dir / ("contextsim_acc_a_" + mode + ".json");
                      const auto b = dir / ("contextsim_acc_b_" + mode + ".json");
                      const std::vector<std::string> base = {
                          "simulate", "--inequality", "eq7", "--shots",
                          mode == "abstract" ? "20000" : "2000", "--seed", "42",
                          "--visibility", "0.8", "--misalignment", "0.02", "--jitter", "0.01",
                          "--mode", mode, "--deterministic", "--output"};
                      auto run_a = base;
                      run_a.push_back(a.string());
                      auto run_b = base;
                      run_b.push_back(b.string());
                      ok = ok && cli::run(run_a) == 0 && cli::run(run_b) == 0;
                      const auto bytes_a = slurp(a);
                      ok = ok && !bytes_a.empty() && bytes_a == slurp(b);
                      ++pair_index;
                  }
                  detail << " [" << pair_index << " seeded report pairs compared]";
                  return ok;
              });

    std::printf("%s\n", failures == 0 ? "ALL CRITERIA PASSED" : "CRITERIA FAILED");
    return failures == 0 ? 0 : 1;
}
