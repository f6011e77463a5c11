// Acceptance runner: one [PASS]/[FAIL] line per criterion.
// Monte Carlo checks use a 4 sigma band around the analytic value.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "qauth/conformance.hpp"
#include "qauth/harness.hpp"
#include "qauth/secparams.hpp"
#include "support/oracles.hpp"

using namespace qauth;
namespace sp = qauth::secparams;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "FAILED ") + what;
  }
};

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[200];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double sigma(double p, double n) { return std::sqrt(p * (1 - p) / n); }

bool within(double observed, double expected, double n) {
  return std::abs(observed - expected) <= 4.0 * sigma(expected, n) + 1e-12;
}

ScenarioSpec scenario(std::uint64_t seed, std::uint64_t trials, std::size_t k, std::size_t d,
                      std::size_t a) {
  ScenarioSpec s;
  s.seed = seed;
  s.trials = trials;
  s.session.k = k;
  s.session.d = d;
  s.session.reveal_count = a;
  return s;
}

ScenarioSpec swap(ScenarioSpec s, BeliefRule rule) {
  s.session.mode = Mode::Swap;
  s.session.belief_rule = rule;
  return s;
}

double mean_of(const AggregateReport& r, const char* name) {
  const MetricSummary* m = r.metric(name);
  return m ? m->mean : std::nan("");
}

std::string render(const ScenarioReport& r, OutputFormat f) {
  std::ostringstream out;
  write_report(out, r, f);
  return out.str();
}

Verdict ac1() {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  const ConformanceReport rep = verify_tables();
  bool law = true;
  for (const ComposeCell& c : rep.table1) law = law && c.composed == c.published;
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  v.require(rep.table1_passed() == 16, std::to_string(rep.table1_passed()) + "/16 cells exact");
  v.require(law, "compose law equals table");
  v.require(secs < 1.0, fmt("%.3f s", secs));
  return v;
}

Verdict ac2() {
  Verdict v;
  for (bool swap_mode : {false, true}) {
    ScenarioSpec s = scenario(202, 10000, 17, 41, 8);
    if (swap_mode) s = swap(s, BeliefRule::ComposeTable1);
    const AggregateReport r = run_scenario(s).aggregate;
    const char* tag = swap_mode ? "SWAP/COMPOSE" : "BASE";
    v.require(mean_of(r, "accept_rate") == 1.0,
              std::string(tag) + fmt(" accept %.6f", mean_of(r, "accept_rate")));
    const MetricSummary* ea = r.metric("alice_tamper_error_rate");
    const MetricSummary* eb = r.metric("bob_tamper_error_rate");
    v.require(ea->mean == 0.0 && ea->ci99_high == 0.0 && eb->mean == 0.0 && eb->n == 10000,
              std::string(tag) + " tamper error 0");
  }
  return v;
}

Verdict ac3() {
  Verdict v;
  for (BasisStrategy strat : {BasisStrategy::RandomPerSlot, BasisStrategy::Fixed}) {
    ScenarioSpec s = scenario(303, 2500, 17, 41, 8);
    s.attack.kind = AttackKind::InterceptResend;
    s.attack.basis_strategy = strat;
    const AggregateReport r = run_scenario(s).aggregate;
    const MetricSummary* e = r.metric("alice_tamper_error_rate");
    const double bits = static_cast<double>(e->n) * 41.0;
    v.require(std::abs(e->mean - 0.25) <= 0.01 && bits >= 1e5,
              std::string(to_string(strat)) + fmt(" %.5f over %.0f bits", e->mean, bits));
  }
  return v;
}

Verdict ac4() {
  Verdict v;
  for (std::size_t d : {std::size_t{8}, std::size_t{1}}) {
    ScenarioSpec s = scenario(404 + d, 100000, 1, d, 1);
    s.attack.kind = AttackKind::InterceptResend;
    const double want = sp::evasion_prob(d);
    const double got = mean_of(run_scenario(s).aggregate, "evasion_rate");
    v.require(within(got, want, 1e5), fmt("d=%.0f evasion %.5f vs %.5f", double(d), got, want));
  }
  return v;
}

Verdict ac5() {
  Verdict v;
  constexpr int kN = 1000000;
  RandomSource rand(505, 0);
  int accepted = 0;
  BitString bob(8);
  BitString guess(8);
  for (int i = 0; i < kN; ++i) {
    for (auto& b : bob) b = rand.bit();
    for (auto& b : guess) b = rand.bit();
    accepted += authenticate(bob, guess);
  }
  const double rate = static_cast<double>(accepted) / kN;
  v.require(within(rate, sp::forgery_prob(8), kN),
            fmt("accept %.6f vs %.6f", rate, sp::forgery_prob(8)));
  return v;
}

Verdict ac6() {
  Verdict v;
  for (std::size_t g = 2; g <= 5; ++g) {
    ScenarioSpec s = scenario(600 + g, 100000, 2, 3, 1);
    s.attack.kind = AttackKind::SubsetGuess;
    s.attack.g = g;
    const double want = sp::to_double(sp::subset_success_prob(2, 3, g));
    const double got = mean_of(run_scenario(s).aggregate, "eve_success_rate");
    v.require(within(got, want, 1e5), fmt("g=%.0f %.5f vs %.5f", double(g), got, want));
  }
  int exact = 0;
  int total = 0;
  for (unsigned k = 1; k <= 3; ++k) {
    for (unsigned d = 0; d <= 5; ++d) {
      for (unsigned g = k; g <= k + d; ++g) {
        ++total;
        exact += sp::subset_success_prob(k, d, g) == oracle::subset_success(k, d, g);
      }
    }
  }
  v.require(exact == total, std::to_string(exact) + "/" + std::to_string(total) + " exact vs enumeration");
  bool boundary = true;
  for (unsigned k = 1; k <= 6; ++k) {
    for (unsigned g = k; g < 6 * k; ++g) {
      const bool improves = sp::subset_success_prob(k, 5 * k, g + 1) > sp::subset_success_prob(k, 5 * k, g);
      boundary = boundary && improves == (g < 4 * k - 1) && sp::improvement_limit(k) == 4 * k - 1;
    }
  }
  v.require(boundary, "improvement iff g < 4k-1");
  return v;
}

Verdict ac7() {
  Verdict v;
  const double D = std::ldexp(1.0, -17);
  v.require(sp::required_k(D) == 17 && sp::required_d(D) == 41,
            fmt("D=2^-17 -> k=%.0f d=%.0f", double(sp::required_k(D)), double(sp::required_d(D))));
  RandomSource rand(707, 0);
  int ok = 0;
  for (int i = 0; i < 1000; ++i) {
    double t = 0.0;
    while (!(t > 0.0 && t < 1.0)) t = std::exp2(-64.0 * rand.uniform());
    const oracle::Rational exact(t);
    const std::uint64_t k = sp::required_k(t);
    const std::uint64_t d = sp::required_d(t);
    const bool post = oracle::Rational(1, 1) / boost::multiprecision::pow(
                                                   boost::multiprecision::cpp_int(2), unsigned(k)) <=
                          exact &&
                      oracle::three_quarters(unsigned(d)) <= exact;
    ok += post && k == oracle::smallest_k(exact) && d == oracle::smallest_d(exact);
  }
  v.require(ok == 1000, std::to_string(ok) + "/1000 sampled D bound and minimal");
  return v;
}

Verdict ac8() {
  Verdict v;
  ScenarioSpec s = scenario(808, 100000, 4, 16, 1);
  s.attack.kind = AttackKind::PhotonNumberSplitting;
  s.photon.photons.p1 = 0.5;
  const double want = sp::pns_exact_evasion(16, 0.5);
  const double got = mean_of(run_scenario(s).aggregate, "evasion_rate");
  v.require(within(got, want, 1e5),
            fmt("evasion %.5f vs 0.875^16=%.5f (coarse 0.75^8=%.5f)", got, want,
                sp::pns_approx_evasion(16, 0.5)));
  const std::uint64_t inflated = sp::pns_required_d(16, 0.5);
  const double restored = sp::pns_approx_evasion(inflated, 0.5);
  v.require(inflated == 32 && sp::pns_effective_d(double(inflated), 0.5) >= 16.0 &&
                restored <= sp::evasion_prob(16) * (1 + 1e-12),
            fmt("inflated d=%.0f gives 0.75^(p1 d)=%.5f <= target %.5f", double(inflated), restored,
                sp::evasion_prob(16)));
  // Reported, not asserted: the per-slot model at the inflated d.
  ScenarioSpec s2 = s;
  s2.session.d = inflated;
  s2.seed = 809;
  const double at_inflated = mean_of(run_scenario(s2).aggregate, "evasion_rate");
  v.detail += fmt("; info: per-slot model at d=32 evades %.5f (analytic %.5f)", at_inflated,
                  sp::pns_exact_evasion(32, 0.5));
  v.detail += "; per-slot d needed " +
              std::to_string(sp::pns_required_d_exact(sp::evasion_prob(16) * (1 + 1e-12), 0.5));
  return v;
}

Verdict ac9() {
  Verdict v;
  const ConformanceReport rep = verify_tables();
  v.require(rep.measurement_passed() == 32,
            std::to_string(rep.measurement_passed()) + "/32 table cells exact");
  ScenarioSpec s = swap(scenario(909, 100000, 8, 8, 8), BeliefRule::MeasurementResult);
  s.attack.kind = AttackKind::ServerProduct;
  const AggregateReport r = run_scenario(s).aggregate;
  const MetricSummary* match = r.metric("key_match_fraction");
  const double slots = static_cast<double>(match->n) * 8.0;
  v.require(std::abs(match->mean - 0.5) <= 0.01 && slots >= 1e5,
            fmt("key match %.5f over %.0f slots", match->mean, slots));
  const double acc = mean_of(r, "accept_rate");
  v.require(within(acc, std::ldexp(1.0, -8), 1e5), fmt("accept %.6f vs 2^-8", acc));
  return v;
}

Verdict ac10() {
  Verdict v;
  const ConformanceReport a = verify_tables();
  const ConformanceReport b = verify_tables();
  v.require(a.compose.size() == 32, std::to_string(a.compose.size()) + " rows listed");
  v.require(a.compose_discrepancies() > 0,
            std::to_string(a.compose_discrepancies()) + " rows differ from the table");
  const std::string text = render_conformance_text(a);
  v.require(text == render_conformance_text(b) &&
                render_conformance_json(a) == render_conformance_json(b),
            "byte-identical rerun");
  v.require(text.find("DIFFERS") != std::string::npos, "discrepancies printed");
  return v;
}

Verdict ac11() {
  Verdict v;
  for (bool swap_mode : {false, true}) {
    ScenarioSpec s = scenario(1111, 10000, 17, 41, 8);
    if (swap_mode) s = swap(s, BeliefRule::ComposeTable1);
    s.attack.kind = AttackKind::ServerGhz;
    const AggregateReport r = run_scenario(s).aggregate;
    const MetricSummary* copy = r.metric("server_copy_match");
    const std::string tag = swap_mode ? "SWAP/COMPOSE" : "BASE";
    v.require(copy && copy->n == 10000 && copy->mean == 1.0 && copy->ci99_low == 1.0,
              tag + fmt(" copy match %.6f", copy ? copy->mean : -1));
    v.require(mean_of(r, "alice_tamper_error_rate") == 0.0 &&
                  mean_of(r, "bob_tamper_error_rate") == 0.0 && mean_of(r, "detection_rate") == 0.0,
              tag + " tamper error 0, detection 0");
  }
  return v;
}

Verdict ac12() {
  Verdict v;
  ScenarioSpec base = scenario(1212, 20000, 8, 16, 4);
  base.attack.kind = AttackKind::InterceptResend;

  ScenarioSpec rt = base;
  rt.attack.location_knowledge = LocationKnowledge::Realtime;
  const AggregateReport r = run_scenario(rt).aggregate;
  const MetricSummary* know = r.metric("eve_key_knowledge");
  v.require(mean_of(r, "detection_rate") == 0.0 && know->mean == 1.0 && know->ci99_low == 1.0,
            fmt("REALTIME detection %.4f knowledge %.4f", mean_of(r, "detection_rate"), know->mean));

  ScenarioSpec never = base;
  ScenarioSpec after = base;
  after.attack.location_knowledge = LocationKnowledge::AfterMeasurement;
  after.seed = 1213;  // independent sample, so this is a genuine two-sample test
  const AggregateReport a = run_scenario(never).aggregate;
  const AggregateReport b = run_scenario(after).aggregate;
  int compared = 0;
  int agree = 0;
  std::string worst;
  double worst_z = 0.0;
  for (const MetricSummary& m : a.metrics) {
    const MetricSummary* o = b.metric(m.name);
    if (!o || m.n == 0 || o->n == 0) continue;
    const double se_a = (m.ci99_high - m.ci99_low) / (2 * 2.5758293035489004);
    const double se_b = (o->ci99_high - o->ci99_low) / (2 * 2.5758293035489004);
    const double se = std::sqrt(se_a * se_a + se_b * se_b);
    const double diff = std::abs(m.mean - o->mean);
    ++compared;
    const bool ok = se > 0 ? diff <= 4 * se : diff <= 1e-12;
    agree += ok;
    const double z = se > 0 ? diff / se : 0;
    if (z >= worst_z) {
      worst_z = z;
      worst = m.name;
    }
  }
  v.require(agree == compared,
            "AFTER_MEASUREMENT vs NEVER " + std::to_string(agree) + "/" + std::to_string(compared) +
                " metrics within 4 sigma" + fmt(" (max %.2f sigma", worst_z) + " on " + worst + ")");
  return v;
}

Verdict ac13() {
  Verdict v;
  std::vector<ScenarioSpec> specs;
  {
    ScenarioSpec s = scenario(1313, 3000, 6, 10, 4);
    s.attack.kind = AttackKind::InterceptResend;
    s.attack.path = Path::Both;
    specs.push_back(s);
  }
  {
    ScenarioSpec s = scenario(1314, 3000, 6, 10, 4);
    s.attack.kind = AttackKind::PhotonNumberSplitting;
    s.photon.photons.p1 = 0.4;
    s.photon.p_loss = 0.002;
    specs.push_back(s);
  }
  {
    ScenarioSpec s = swap(scenario(1315, 3000, 6, 10, 4), BeliefRule::MeasurementResult);
    s.attack.kind = AttackKind::ServerGhz;
    specs.push_back(s);
  }
  int identical = 0;
  for (const ScenarioSpec& s : specs) {
    const ScenarioReport one = run_scenario(s, 1);
    const ScenarioReport two = run_scenario(s, 1);
    const ScenarioReport par = run_scenario(s, 4);
    bool same = true;
    for (OutputFormat f : {OutputFormat::Json, OutputFormat::Csv}) {
      const std::string ref = render(one, f);
      same = same && ref == render(two, f) && ref == render(par, f);
    }
    identical += same;
  }
  v.require(identical == static_cast<int>(specs.size()),
            std::to_string(identical) + "/" + std::to_string(specs.size()) +
                " scenarios byte-identical across reruns and 1 vs 4 threads");
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"AC1  swap table conformance", ac1},
      {"AC2  honest completeness", ac2},
      {"AC3  intercept-resend tamper error", ac3},
      {"AC4  evasion probability", ac4},
      {"AC5  token forgery", ac5},
      {"AC6  subset-guess formula", ac6},
      {"AC7  parameter sizing", ac7},
      {"AC8  photon-number splitting", ac8},
      {"AC9  compromised server, measurement-result rule", ac9},
      {"AC10 compromised server, compose rule discrepancies", ac10},
      {"AC11 GHZ server copy", ac11},
      {"AC12 location-knowledge timing", ac12},
      {"AC13 determinism", ac13},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] %s: %s (%.2f s)\n", v.pass ? "PASS" : "FAIL", name, v.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !v.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
