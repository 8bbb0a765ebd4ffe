// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
// argv[1] is the path of the eopm executable, used by the determinism check.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "eopm/cli.hpp"

using namespace eopm;

namespace {

struct Verdict {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// 1. Orthonormality of the transition matrix columns.
Verdict unitarity() {
  double worst = 0.0;
  for (double m : {0.5, 2.0, 5.0}) {
    for (std::int64_t n : {1, 3}) {
      for (double theta : {0.0, 1.0}) {
        for (double phi : {0.0, 0.7}) {
          const auto spec = ModulatorSpec::make(m, theta, n, phi);
          const std::int64_t q_max = carson_window(m) + 12;
          for (std::int64_t p0 = 1; p0 <= 12; ++p0) {
            for (std::int64_t q0 = 1; q0 <= 12; ++q0) worst = std::max(worst, unitarity_defect(p0, q0, spec, q_max));
          }
        }
      }
    }
  }
  return {worst <= 1e-10, "max defect " + fmt("%.3e", worst)};
}

// 2. Closed form, matrix exponential and corrected path sum pairwise.
Verdict triple_oracle() {
  double closed_vs_exp = 0.0;
  double closed_vs_path = 0.0;
  double exp_vs_path = 0.0;
  for (double m : {0.5, 2.0, 5.0}) {
    for (std::int64_t n : {1, 3}) {
      const auto spec = ModulatorSpec::make(m, 0.3, n, 0.7);
      const std::int64_t m_max = 25 * n + n * carson_window(m);
      const TransitionMatrix s = exponentiate(build_generator(spec, m_max));
      const cplx bias = std::polar(1.0, spec.phi_b);
      for (std::int64_t r0 = 0; r0 < n; ++r0) {
        for (std::int64_t q0 : {1, 2, 7}) {
          const auto col = detail::checked_column(s, q0 * n - r0, n * carson_window(m, 5));
          for (std::int64_t q = 1; q <= 25; ++q) {
            const cplx d = d_coefficient(q, q0, spec);
            const cplx e = col[static_cast<std::size_t>(q * n - r0 - 1)];
            const cplx p = bias * forbidden_path_corrected(q, q0, spec, 80);
            closed_vs_exp = std::max(closed_vs_exp, std::abs(d - e));
            closed_vs_path = std::max(closed_vs_path, std::abs(d - p));
            exp_vs_path = std::max(exp_vs_path, std::abs(e - p));
          }
        }
      }
    }
  }
  const double worst = std::max({closed_vs_exp, closed_vs_path, exp_vs_path});
  return {worst <= 1e-9, "closed/exp " + fmt("%.2e", closed_vs_exp) + ", closed/path " + fmt("%.2e", closed_vs_path) +
                             ", exp/path " + fmt("%.2e", exp_vs_path)};
}

// 3. No output below mode 1 and no lost probability.
Verdict positive_support() {
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<std::int64_t> n0_dist(1, 60);
  std::uniform_int_distribution<std::int64_t> step_dist(1, 8);
  std::uniform_real_distribution<double> m_dist(0.0, 10.0);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  double worst_deficit = 0.0;
  int bad_modes = 0;
  for (int draw = 0; draw < 500; ++draw) {
    const ModeIndex n0(n0_dist(rng));
    const std::int64_t step = step_dist(rng);
    const double m = m_dist(rng);
    const auto spec = ModulatorSpec::make(m, angle(rng), step, angle(rng));
    double total = 0.0;
    for (const auto& l : scatter_single_photon(n0, spec, 1e-12)) {
      if (l.mode.value() < 1) ++bad_modes;
      total += l.probability;
    }
    worst_deficit = std::max(worst_deficit, 1.0 - total);
  }
  return {bad_modes == 0 && worst_deficit <= 1e-10,
          std::to_string(bad_modes) + " modes < 1, max deficit " + fmt("%.2e", worst_deficit)};
}

// 4. Far above the wall the quantum and classical amplitudes coincide.
Verdict classical_limit() {
  const auto spec = ModulatorSpec::make(2.0, 0.0, 1, 0.0);
  const std::int64_t q0 = 100;
  double worst = 0.0;
  for (std::int64_t q = -(q0 - 1); q <= q0; ++q) {
    worst = std::max(worst, std::abs(d_coefficient(q + q0, q0, spec) - coefficient(q, spec)));
  }
  return {worst <= 1e-12, "max |D - C| " + fmt("%.2e", worst)};
}

struct CompareRow {
  std::int64_t mode;
  double classical_prob;
  double quantum_prob;
};

std::vector<CompareRow> classical_compare(const std::string& n0) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run({"classical-compare", "--n0", n0, "--m", "5", "--N", "1"}, out, err);
  if (code != 0) throw std::runtime_error("classical-compare failed: " + err.str());
  std::vector<CompareRow> rows;
  std::istringstream is(out.str());
  std::string line;
  bool header = false;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) cells.push_back(c);
    rows.push_back({std::stoll(cells[0]), std::stod(cells[4]), std::stod(cells[7])});
  }
  return rows;
}

// 5. The low-frequency spectra of the two models.
Verdict low_frequency_spectra() {
  double leaked = 0.0;
  double quantum_below = 0.0;
  for (const auto& r : classical_compare("6")) {
    if (r.mode < 1) {
      leaked = std::max(leaked, r.classical_prob);
      quantum_below = std::max(quantum_below, r.quantum_prob);
    }
  }
  double diff = 0.0;
  for (const auto& r : classical_compare("10")) diff = std::max(diff, std::abs(r.classical_prob - r.quantum_prob));
  const bool ok = leaked > 1e-4 && quantum_below == 0.0 && diff <= 2e-4;
  return {ok, "n0=6 classical max prob below mode 1 " + fmt("%.3e", leaked) + ", quantum " +
                  fmt("%.1e", quantum_below) + "; n0=10 max diff " + fmt("%.3e", diff)};
}

// 6. Normalization and three-term recurrence.
Verdict bessel_identities() {
  double norm = 0.0;
  for (double m : {0.5, 1.0, 2.0, 5.0, 10.0}) {
    const int q_top = static_cast<int>(std::ceil(m)) + 40;
    double s = bessel_j(0, m) * bessel_j(0, m);
    for (int q = 1; q <= q_top; ++q) s += 2.0 * bessel_j(q, m) * bessel_j(q, m);
    norm = std::max(norm, std::abs(s - 1.0));
  }
  double rec = 0.0;
  for (int i = 0; i <= 380; ++i) {
    const double m = 0.5 + 0.025 * i;
    for (int q = 1; q <= 30; ++q) {
      rec = std::max(rec, std::abs(bessel_j(q - 1, m) + bessel_j(q + 1, m) - (2.0 * q / m) * bessel_j(q, m)));
    }
  }
  return {norm <= 1e-12 && rec <= 1e-10, "normalization " + fmt("%.2e", norm) + ", recurrence " + fmt("%.2e", rec)};
}

double rel(cplx got, cplx want) { return std::abs(got - want) / std::abs(want); }

// 7. Leading orders of the operator expansions.
Verdict expansion_prefixes() {
  const double m = 0.7;
  const auto spec = ModulatorSpec::make(m, 0.0, 1, 0.0);
  const double chi = m / 2.0;
  const auto terms = adjoint_expansion_terms(0, spec, 4);
  double worst = 0.0;
  worst = std::max(worst, rel(terms[0], 1.0));
  worst = std::max(worst, rel(terms[2], -2.0 * chi * chi / 2.0));
  worst = std::max(worst, rel(terms[4], 6.0 * std::pow(chi, 4) / 24.0));
  const bool odd_zero = terms[1] == cplx{} && terms[3] == cplx{};
  const cplx want{0.0, m / 2.0 - 0.5 * std::pow(m / 2.0, 3)};
  worst = std::max(worst, rel(path_amplitude(1, spec, 1), want));
  return {odd_zero && worst <= 1e-15, "max relative error " + fmt("%.2e", worst)};
}

// 8. Factored two-tone operator against the exact one.
Verdict multitone_scaling() {
  const ModeIndex n0(200);
  auto deviation = [&](double m) {
    const auto tones = ToneSet::make(
        {ModulationTone::make(m, 0.0, 3), ModulationTone::make(m, std::numbers::pi / 2, 7)}, 0.0);
    const auto exact = combined_oracle(n0, tones, combined_oracle_window(n0, tones));
    return max_oracle_deviation(two_tone_spectrum(n0, tones, 1e-15), exact);
  };
  auto swap_dev = [&](double m) {
    const auto a = ModulationTone::make(m, 0.0, 3);
    const auto b = ModulationTone::make(m, std::numbers::pi / 2, 7);
    const auto fwd = two_tone_spectrum(n0, ToneSet::make({a, b}, 0.0), 1e-15);
    const auto rev = two_tone_spectrum(n0, ToneSet::make({b, a}, 0.0), 1e-15);
    std::map<std::int64_t, cplx> diff;
    for (const auto& l : fwd) diff[l.mode.value()] += l.amplitude;
    for (const auto& l : rev) diff[l.mode.value()] -= l.amplitude;
    double worst = 0.0;
    for (const auto& kv : diff) worst = std::max(worst, std::abs(kv.second));
    return worst;
  };
  const double big = deviation(0.4);
  const double small = deviation(0.2);
  const double ratio = big / small;
  const double sw_big = swap_dev(0.4);
  const double sw_small = swap_dev(0.2);
  const bool ratio_ok = ratio >= 3.0 && ratio <= 5.0;
  const bool swap_ok = sw_big <= 2 * 0.4 * 0.4 && sw_small <= 2 * 0.2 * 0.2;
  return {ratio_ok && swap_ok, "dev(0.4) " + fmt("%.3e", big) + ", dev(0.2) " + fmt("%.3e", small) + ", ratio " +
                                   fmt("%.3g", ratio) + "; swap " + fmt("%.2e", sw_big) + ", " + fmt("%.2e", sw_small)};
}

// 9. Coherent amplitudes keep their l2 norm.
Verdict coherent_norm() {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> count(1, 6);
  std::uniform_int_distribution<std::int64_t> mode(1, 40);
  std::uniform_int_distribution<std::int64_t> step(1, 6);
  std::uniform_real_distribution<double> m_dist(0.0, 5.0);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  std::normal_distribution<double> gauss;
  double worst = 0.0;
  for (int draw = 0; draw < 100; ++draw) {
    ModeField alpha;
    const int k = count(rng);
    while (static_cast<int>(alpha.size()) < k) alpha[ModeIndex(mode(rng))] = {gauss(rng), gauss(rng)};
    const auto spec = ModulatorSpec::make(m_dist(rng), angle(rng), step(rng), angle(rng));
    double in = 0.0;
    for (const auto& kv : alpha) in += std::norm(kv.second);
    double out = 0.0;
    for (const auto& kv : scatter_coherent(alpha, spec, 1e-14, 4)) out += std::norm(kv.second);
    worst = std::max(worst, std::abs(std::sqrt(out) - std::sqrt(in)));
  }
  return {worst <= 1e-10, "max norm change " + fmt("%.2e", worst)};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// 10. Repeated CLI runs, serial and fully parallel, give identical bytes.
Verdict determinism(const std::string& exe) {
  if (exe.empty()) return {false, "no executable given"};
  const auto dir = std::filesystem::temp_directory_path() / "eopm_acceptance";
  std::filesystem::create_directories(dir);
  const std::vector<std::string> commands = {
      "spectrum --n0 6 --m 5 --N 1",
      "classical-compare --n0 10 --m 5 --N 1",
      "unitarity --m 2 --N 3 --theta 1 --phi-b 0.7",
      "oracle-check --oracle matrix-exp",
      "multitone --n0 40 --tone 0.4,0,3 --tone 0.4,1.5707963267948966,7",
  };
  int mismatches = 0;
  for (std::size_t c = 0; c < commands.size(); ++c) {
    std::string reference;
    for (int rep = 0; rep < 3; ++rep) {
      const char* threads = rep == 0 ? "1" : "0";
      const auto path = dir / ("run" + std::to_string(c) + "_" + std::to_string(rep) + ".csv");
      const std::string cmd = "\"" + exe + "\" " + commands[c] + " --threads " + threads + " -o \"" + path.string() + "\"";
      if (std::system(cmd.c_str()) != 0) return {false, "command failed: " + commands[c]};
      std::string bytes = slurp(path);
      if (std::filesystem::exists(path.string() + ".report.csv")) bytes += slurp(path.string() + ".report.csv");
      if (rep == 0) {
        reference = bytes;
      } else if (bytes != reference) {
        ++mismatches;
      }
    }
  }
  return {mismatches == 0, std::to_string(commands.size()) + " commands x 3 runs, " + std::to_string(mismatches) +
                               " mismatches"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string exe = argc > 1 ? argv[1] : "";
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"unitarity", unitarity},
      {"triple-oracle agreement", triple_oracle},
      {"positive-frequency support", positive_support},
      {"classical limit", classical_limit},
      {"low-frequency spectra n0=6 and n0=10", low_frequency_spectra},
      {"Bessel identities", bessel_identities},
      {"expansion prefixes", expansion_prefixes},
      {"two-tone error scaling", multitone_scaling},
      {"coherent-state norm", coherent_norm},
      {"CLI determinism", [&] { return determinism(exe); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!v.pass) ++failed;
    std::printf("[%s] %2zu %s: %s (%.2f s)\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                v.detail.c_str(), secs);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
