// qauth: command-line front end.
//
//   qauth params --D 2^-17 [--p1 0.5] [--format json]
//   qauth run scenario.json [--seed N] [--trials N] [--format csv] [--out FILE]
//   qauth verify-tables [--format json]
//   qauth oracle [--created PHI_PLUS] [--source ENTANGLED|PRODUCT|GHZ] [--x 0|1]
//
// Exit status: 0 success, 1 a check failed, 2 usage error.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "qauth/conformance.hpp"
#include "qauth/harness.hpp"
#include "qauth/secparams.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Accepts a decimal ("1e-6", "0.5") or a power of two ("2^-17").
double parse_target(const std::string& text) {
  const auto caret = text.find('^');
  std::size_t used = 0;
  try {
    if (caret != std::string::npos) {
      const double base = std::stod(text.substr(0, caret), &used);
      if (used != caret) throw UsageError("bad D '" + text + "'");
      const std::string exp_text = text.substr(caret + 1);
      const double exponent = std::stod(exp_text, &used);
      if (used != exp_text.size()) throw UsageError("bad D '" + text + "'");
      return std::pow(base, exponent);
    }
    const double v = std::stod(text, &used);
    if (used != text.size()) throw UsageError("bad D '" + text + "'");
    return v;
  } catch (const std::logic_error&) {
    throw UsageError("bad D '" + text + "'");
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read scenario file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary | std::ios::trunc);
  if (!f || !(f << text)) throw std::runtime_error("cannot write '" + out + "'");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace qauth;

  CLI::App app{"Trusted-server quantum authentication lab"};
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> trials;
  std::string format;
  std::string out;
  int threads = 0;
  app.add_option("--seed", seed, "Master seed (overrides the scenario)");
  app.add_option("--trials", trials, "Trial count (overrides the scenario)");
  app.add_option("--format", format, "json, csv or text (command dependent)");
  app.add_option("--out", out, "Output file; '-' for standard output");
  app.add_option("--threads", threads, "Worker threads for run; 0 = OpenMP default, 1 = serial")
      ->check(CLI::NonNegativeNumber);

  auto* params = app.add_subcommand("params", "Key and tamper sizes for a security target");
  std::string target_text;
  std::optional<double> p1;
  params->add_option("--D", target_text, "Security target, e.g. 2^-17 or 1e-6")->required();
  params->add_option("--p1", p1, "Single-photon probability for the PNS-inflated d");

  auto* run = app.add_subcommand("run", "Run a Monte Carlo scenario");
  std::string scenario_path;
  run->add_option("scenario", scenario_path, "Scenario JSON file")->required();

  auto* verify = app.add_subcommand("verify-tables", "Check the swap tables against the oracle");

  auto* oracle = app.add_subcommand("oracle", "Dump the entanglement-swap enumeration");
  std::string created_name;
  std::string source_name = "ENTANGLED";
  int x = 0;
  oracle->add_option("--created", created_name, "Created pair, e.g. PSI_PLUS (default: all)");
  oracle->add_option("--source", source_name, "ENTANGLED, PRODUCT or GHZ");
  oracle->add_option("--x", x, "Bit sent by a PRODUCT source")->check(CLI::Range(0, 1));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*params) {
      const double D = parse_target(target_text);
      const std::uint64_t k = secparams::required_k(D);
      const std::uint64_t d = secparams::required_d(D);
      const double ratio = static_cast<double>(d) / static_cast<double>(k);
      std::optional<std::uint64_t> inflated;
      std::optional<std::uint64_t> exact_model;
      if (p1) {
        inflated = secparams::pns_required_d(d, *p1);
        exact_model = secparams::pns_required_d_exact(D, *p1);
      }
      std::ostringstream text;
      if (format == "json" || format == "JSON") {
        nlohmann::ordered_json j;
        j["D"] = D;
        j["k"] = k;
        j["d"] = d;
        j["d_over_k"] = ratio;
        j["asymptotic_ratio"] = secparams::ratio_d_over_k();
        if (p1) {
          j["p1"] = *p1;
          j["pns_inflated_d"] = *inflated;
          j["pns_exact_model_d"] = *exact_model;
        }
        text << j.dump() << "\n";
      } else if (format.empty() || format == "text") {
        char line[160];
        std::snprintf(line, sizeof line, "D = %.17g\nk = %llu\nd = %llu\nd/k = %.6f\n", D,
                      static_cast<unsigned long long>(k), static_cast<unsigned long long>(d),
                      ratio);
        text << line;
        if (p1) {
          text << "PNS inflated d (ceil(d/p1)) = " << *inflated << "\n"
               << "PNS d under per-slot model = " << *exact_model << "\n";
        }
      } else {
        throw UsageError("params: unknown format '" + format + "'");
      }
      write_text(text.str(), out);
      return kOk;
    }

    if (*run) {
      ScenarioSpec spec = parse_scenario(read_file(scenario_path));
      if (seed) spec.seed = *seed;
      if (trials) spec.trials = *trials;
      if (!format.empty()) {
        const auto f = parse_format(format);
        if (!f) throw UsageError("run: unknown format '" + format + "'");
        spec.format = *f;
      }
      if (!out.empty()) spec.path = out;
      const ScenarioReport report = run_scenario(spec, threads);
      emit_report(report, spec.format, spec.path);
      std::cerr << render_aggregate_text(report.aggregate);
      return report.aggregate.all_pass ? kOk : kCheckFailed;
    }

    if (*verify) {
      const ConformanceReport rep = verify_tables();
      if (format == "json" || format == "JSON") {
        write_text(render_conformance_json(rep), out);
      } else if (format.empty() || format == "text") {
        write_text(render_conformance_text(rep), out);
      } else {
        throw UsageError("verify-tables: unknown format '" + format + "'");
      }
      return rep.passed() ? kOk : kCheckFailed;
    }

    if (*oracle) {
      SwapSource source;
      if (source_name == "ENTANGLED") {
        source = SwapSource::entangled();
      } else if (source_name == "PRODUCT") {
        source = SwapSource::product(static_cast<Bit>(x));
      } else if (source_name == "GHZ") {
        source = SwapSource::ghz();
      } else {
        throw UsageError("oracle: unknown source '" + source_name + "'");
      }
      std::vector<BellLabel> created;
      if (created_name.empty()) {
        created.assign(kAllBellLabels.begin(), kAllBellLabels.end());
      } else if (const auto c = parse_bell(created_name)) {
        created.push_back(*c);
      } else {
        throw UsageError("oracle: unknown Bell state '" + created_name + "'");
      }
      std::ostringstream text;
      for (BellLabel c : created) {
        const SwapTable t = swap_enumerate(c, source);
        text << "created " << to_string(c) << ", source " << to_string(source) << "\n";
        for (const SwapBranch& b : t.branches) {
          char line[200];
          std::snprintf(line, sizeof line,
                        "  %-9s p=%.6f P(Q_i=1)=%.6f P(Q_l=1)=%.6f P(Q_i=Q_l)=%.6f",
                        std::string(to_string(b.outcome)).c_str(), b.probability, b.p_qi_one(),
                        b.p_ql_one(), b.p_qi_equals_ql());
          text << line;
          if (const auto qm = b.p_ql_equals_qm()) {
            std::snprintf(line, sizeof line, " P(Q_l=Q_m)=%.6f", *qm);
            text << line;
          }
          text << "  joint=[";
          for (std::size_t i = 0; i < b.joint.size(); ++i) {
            std::snprintf(line, sizeof line, "%s%.4f", i ? " " : "", b.joint[i]);
            text << line;
          }
          text << "]\n";
        }
      }
      write_text(text.str(), out);
      return kOk;
    }
  } catch (const UsageError& e) {
    std::cerr << "qauth: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "qauth: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "qauth: " << e.what() << "\n";
    return kCheckFailed;
  }
  return kUsage;
}
