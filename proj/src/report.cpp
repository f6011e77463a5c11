#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "qauth/harness.hpp"
#include "qauth/secparams.hpp"

namespace qauth {

namespace {

constexpr double kZ99 = 2.5758293035489004;  // two-sided 99% normal quantile
constexpr double kSigmaBand = 4.0;
constexpr double kExactTol = 1e-12;

double log_choose(double n, double r) {
  return std::lgamma(n + 1.0) - std::lgamma(r + 1.0) - std::lgamma(n - r + 1.0);
}

double binomial_pmf(std::size_t n, std::size_t j, double p) {
  if (p <= 0.0) return j == 0 ? 1.0 : 0.0;
  if (p >= 1.0) return j == n ? 1.0 : 0.0;
  const auto nd = static_cast<double>(n);
  const auto jd = static_cast<double>(j);
  return std::exp(log_choose(nd, jd) + jd * std::log(p) + (nd - jd) * std::log1p(-p));
}

double binomial_cdf(std::size_t n, std::size_t m, double p) {
  double sum = 0.0;
  for (std::size_t j = 0; j <= std::min(n, m); ++j) sum += binomial_pmf(n, j, p);
  return std::min(sum, 1.0);
}

/// Draws of size g from n items with `marked` marked ones; P(h marked drawn).
double hypergeometric_pmf(std::size_t n, std::size_t marked, std::size_t g, std::size_t h) {
  if (h > marked || h > g || g - h > n - marked) return 0.0;
  return std::exp(log_choose(static_cast<double>(marked), static_cast<double>(h)) +
                  log_choose(static_cast<double>(n - marked), static_cast<double>(g - h)) -
                  log_choose(static_cast<double>(n), static_cast<double>(g)));
}

/// Largest mismatch count that still passes: mirrors tamper_check's
/// rate <= threshold on the same double arithmetic.
std::size_t max_passing_errors(std::size_t d, double threshold) {
  std::size_t m = 0;
  while (m < d && static_cast<double>(m + 1) / static_cast<double>(d) <= threshold) ++m;
  return m;
}

bool is_bernoulli_metric(std::string_view name) {
  return name == "accept_rate" || name == "detection_rate" || name == "evasion_rate" ||
         name == "incomplete_rate" || name == "eve_success_rate";
}

std::string describe_attack(const AttackConfig& a) {
  std::string s(to_string(a.kind));
  if (a.kind == AttackKind::None || a.is_server_attack()) return s;
  s += "/";
  s += to_string(a.path);
  if (a.kind == AttackKind::InterceptResend) {
    s += "/";
    s += a.basis_strategy == BasisStrategy::Fixed ? "FIXED_" + std::string(to_string(a.fixed_basis))
                                                  : std::string(to_string(a.basis_strategy));
  }
  if (a.kind == AttackKind::SubsetGuess) s += "/g=" + std::to_string(a.g);
  s += "/";
  s += to_string(a.location_knowledge);
  return s;
}

}  // namespace

const MetricSummary* AggregateReport::metric(std::string_view name) const {
  for (const MetricSummary& m : metrics) {
    if (m.name == name) return &m;
  }
  return nullptr;
}

std::vector<std::pair<std::string, Prediction>> analytic_predictions(const ScenarioSpec& spec) {
  std::vector<std::pair<std::string, Prediction>> out;
  const auto put = [&](std::string name, double value, std::string source) {
    out.emplace_back(std::move(name), Prediction{value, std::move(source)});
  };

  const SessionConfig& s = spec.session;
  const AttackConfig& a = spec.attack;
  const std::size_t n = s.length();
  const double p_loss = spec.photon.p_loss;
  const double p1 = spec.photon.photons.p1;

  if (p_loss > 0.0) {
    put("incomplete_rate", 1.0 - std::pow(1.0 - p_loss, 2.0 * static_cast<double>(n)),
        "1-(1-p_loss)^(2(k+d))");
    return out;
  }
  put("incomplete_rate", 0.0, "no loss");

  const bool eve_taps = a.kind == AttackKind::InterceptResend || a.kind == AttackKind::SubsetGuess ||
                        a.kind == AttackKind::PhotonNumberSplitting;
  const bool realtime = a.location_knowledge == LocationKnowledge::Realtime;
  const bool rect_key = s.key_basis == MeasBasis::Rectilinear;

  // Probability that a tapped key slot is measured in a basis other than the
  // key basis.
  double r = 0.0;
  if (a.kind == AttackKind::InterceptResend && !realtime) {
    if (a.basis_strategy == BasisStrategy::RandomPerSlot) {
      r = 0.5;
    } else {
      r = a.fixed_basis == s.key_basis ? 0.0 : 1.0;
    }
  }

  // Per-slot agreement of Alice's and Bob's key bits when every tap (if any)
  // is in the key basis.
  const bool honest_ok =
      (s.mode == Mode::Base) || (s.belief_rule == BeliefRule::ComposeTable1);
  double q_kb = honest_ok ? 1.0 : 0.5;
  if (s.mode == Mode::Base && a.is_server_attack() && !rect_key) q_kb = 0.5;

  std::optional<double> q;
  if (r == 0.0) {
    q = q_kb;
  } else if (s.mode == Mode::Base && a.path != Path::Both) {
    q = 1.0 - r / 2.0;
  }

  // Per-bit tamper error on a tapped side, and per-side pass probability.
  double e = 0.0;
  std::function<double()> side_pass = [] { return 1.0; };
  std::string pass_source = "no tap";
  const std::size_t m = max_passing_errors(s.d, s.error_threshold);
  if (eve_taps && !realtime) {
    switch (a.kind) {
      case AttackKind::InterceptResend:
        e = 0.25;
        side_pass = [&] { return binomial_cdf(s.d, m, 0.25); };
        pass_source = s.error_threshold == 0.0 ? "0.75^d" : "Binomial(d,1/4) cdf";
        if (s.error_threshold == 0.0) {
          side_pass = [&] { return secparams::evasion_prob(s.d); };
        }
        break;
      case AttackKind::PhotonNumberSplitting:
        e = 0.25 * p1;
        side_pass = [&] { return binomial_cdf(s.d, m, 0.25 * p1); };
        pass_source = "(1-p1/4)^d";
        if (s.error_threshold == 0.0) {
          side_pass = [&] { return secparams::pns_exact_evasion(s.d, p1); };
        }
        break;
      case AttackKind::SubsetGuess:
        e = static_cast<double>(a.g) / (4.0 * static_cast<double>(n));
        side_pass = [&] {
          double total = 0.0;
          for (std::size_t h = 0; h <= std::min(a.g, s.d); ++h) {
            const double ph = hypergeometric_pmf(n, s.d, a.g, h);
            if (ph > 0.0) total += ph * binomial_cdf(h, m, 0.25);
          }
          return total;
        };
        pass_source = "hypergeometric mixture of Binomial(h,1/4)";
        break;
      default:
        break;
    }
  }
  const int tapped_sides = eve_taps ? (a.path == Path::Both ? 2 : 1) : 0;
  // Both sides carry the same secret tamper basis, so their errors are
  // independent only when Eve draws a fresh basis per side.
  const bool sides_independent =
      realtime || (a.kind == AttackKind::InterceptResend &&
                   a.basis_strategy == BasisStrategy::RandomPerSlot);
  std::optional<double> evasion;
  if (tapped_sides == 0) {
    evasion = 1.0;
  } else if (tapped_sides == 1) {
    evasion = side_pass();
  } else if (sides_independent) {
    evasion = std::pow(side_pass(), 2);
    pass_source += ", squared over two independent paths";
  } else if (s.error_threshold == 0.0) {
    const double dd = static_cast<double>(s.d);
    switch (a.kind) {
      case AttackKind::InterceptResend:
        // Shared basis differs from Eve's with probability 1/2; then each
        // side errs with probability 1/2.
        evasion = std::pow(0.625, dd);
        pass_source = "(5/8)^d, both paths, shared tamper basis";
        break;
      case AttackKind::PhotonNumberSplitting: {
        const double side_ok = 1.0 - 0.5 * p1;
        evasion = std::pow(0.5 + 0.5 * side_ok * side_ok, dd);
        pass_source = "(1/2 + (1-p1/2)^2/2)^d, both paths";
        break;
      }
      case AttackKind::SubsetGuess: {
        // Independent subsets: h_a and h_b tamper hits, o of them shared.
        double total = 0.0;
        const std::size_t hmax = std::min(a.g, s.d);
        for (std::size_t ha = 0; ha <= hmax; ++ha) {
          const double pa = hypergeometric_pmf(n, s.d, a.g, ha);
          if (pa == 0.0) continue;
          for (std::size_t hb = 0; hb <= hmax; ++hb) {
            const double pb = hypergeometric_pmf(n, s.d, a.g, hb);
            if (pb == 0.0) continue;
            for (std::size_t o = 0; o <= std::min(ha, hb); ++o) {
              const double po = hypergeometric_pmf(s.d, ha, hb, o);
              if (po == 0.0) continue;
              total += pa * pb * po * std::pow(0.625, static_cast<double>(o)) *
                       std::pow(0.75, static_cast<double>(ha + hb - 2 * o));
            }
          }
        }
        evasion = total;
        pass_source = "hypergeometric overlap mixture, both paths";
        break;
      }
      default:
        break;
    }
  }

  if (evasion) {
    put("evasion_rate", *evasion, pass_source);
    put("detection_rate", 1.0 - *evasion, "1 - evasion");
  }
  put("alice_tamper_error_rate", a.taps(Path::ToAlice) && eve_taps ? e : 0.0,
      "per-bit tamper error");
  // In SWAP mode Bob checks only after Alice passed; with correlated sides
  // that conditioning biases his error rate.
  if (!(s.mode == Mode::Swap && tapped_sides == 2 && !sides_independent)) {
    put("bob_tamper_error_rate", a.taps(Path::ToBob) && eve_taps ? e : 0.0,
        "per-bit tamper error");
  }

  if (q) {
    put("key_match_fraction", *q, r == 0.0 ? "per-slot agreement" : "1 - r/2");
    if (evasion) {
      put("accept_rate", *evasion * std::pow(*q, static_cast<double>(s.reveal_count)),
          "evasion * q^a");
    }
  }

  // Eve's key knowledge and her full-key success.
  if (a.kind == AttackKind::None || a.is_server_attack()) {
    put("eve_key_knowledge", 0.0, "no eavesdropper");
    put("eve_success_rate", 0.0, "no eavesdropper");
  } else {
    const double k = static_cast<double>(s.k);
    double cover = 1.0;  // probability a key slot yields Eve a certain bit
    if (a.kind == AttackKind::InterceptResend) cover = 1.0 - r;
    if (a.kind == AttackKind::SubsetGuess) {
      const double f = static_cast<double>(a.g) / static_cast<double>(n);
      cover = a.path == Path::Both ? 1.0 - (1.0 - f) * (1.0 - f) : f;
    }
    if (a.path != Path::Both || r == 0.0) {
      put("eve_key_knowledge", cover * q_kb, "P(certain key-basis bit) * q");
    }
    if (a.path != Path::Both) {
      if (a.kind == AttackKind::SubsetGuess) {
        if (q_kb == 1.0 && a.g < s.k) {
          put("eve_success_rate", 0.0, "g < k");
        } else if (q_kb == 1.0 && realtime) {
          put("eve_success_rate",
              secparams::to_double(secparams::Rational(secparams::binomial(s.d, a.g - s.k),
                                                       secparams::binomial(n, a.g))),
              "C(d,g-k)/C(k+d,g)");
        } else if (q_kb == 1.0 && s.error_threshold == 0.0) {
          put("eve_success_rate",
              secparams::to_double(secparams::subset_success_prob(s.k, s.d, a.g)),
              "C(d,g-k)/C(k+d,g)*(3/4)^(g-k)");
        }
      } else {
        put("eve_success_rate", std::pow(cover * q_kb, k) * evasion.value_or(0.0),
            "(P(key bit))^k * evasion");
      }
    }
  }

  if (a.is_server_attack()) put("server_copy_match", q_kb, "per-slot copy agreement");
  return out;
}

AggregateReport aggregate(const ScenarioSpec& spec, std::span<const TrialResult> trials) {
  AggregateReport rep;
  rep.seed = spec.seed;
  rep.trials = trials.size();
  rep.mode = std::string(to_string(spec.session.mode));
  rep.belief_rule =
      spec.session.belief_rule ? std::string(to_string(*spec.session.belief_rule)) : "NONE";
  rep.attack = describe_attack(spec.attack);

  const auto predictions = analytic_predictions(spec);
  const auto find_prediction = [&](std::string_view name) -> const Prediction* {
    for (const auto& [n, p] : predictions) {
      if (n == name) return &p;
    }
    return nullptr;
  };

  const auto summarize = [&](std::string name, const std::vector<double>& xs) {
    MetricSummary ms;
    ms.name = std::move(name);
    ms.n = xs.size();
    const bool bernoulli = is_bernoulli_metric(ms.name);
    double se = 0.0;
    if (!xs.empty()) {
      double sum = 0.0;
      for (double x : xs) sum += x;
      ms.mean = sum / static_cast<double>(xs.size());
      double var = 0.0;
      if (bernoulli) {
        var = ms.mean * (1.0 - ms.mean);
      } else if (xs.size() > 1) {
        for (double x : xs) var += (x - ms.mean) * (x - ms.mean);
        var /= static_cast<double>(xs.size() - 1);
      }
      se = std::sqrt(var / static_cast<double>(xs.size()));
      ms.ci99_low = ms.mean - kZ99 * se;
      ms.ci99_high = ms.mean + kZ99 * se;
    }
    if (const Prediction* p = find_prediction(ms.name); p && !xs.empty()) {
      ms.analytic = p->value;
      ms.analytic_source = p->source;
      ms.abs_diff = std::abs(ms.mean - p->value);
      const double sigma =
          bernoulli ? std::sqrt(p->value * (1.0 - p->value) / static_cast<double>(xs.size())) : se;
      if (sigma > 0.0) {
        ms.sigma_distance = *ms.abs_diff / sigma;
        ms.pass = *ms.abs_diff <= kSigmaBand * sigma + kExactTol;
      } else {
        ms.pass = *ms.abs_diff <= kExactTol;
      }
      if (!*ms.pass) rep.all_pass = false;
    }
    rep.metrics.push_back(std::move(ms));
  };

  std::vector<double> accept, detect, evade, incomplete, success, alice_err, bob_err, match,
      knowledge, copy;
  for (const TrialResult& t : trials) {
    const bool is_incomplete = t.status == SessionStatus::IncompleteStream;
    const bool aborted = t.status == SessionStatus::TamperAbort;
    accept.push_back(t.status == SessionStatus::AuthAccept ? 1.0 : 0.0);
    incomplete.push_back(is_incomplete ? 1.0 : 0.0);
    knowledge.push_back(t.eve_key_knowledge);
    if (t.server_copy_match) copy.push_back(*t.server_copy_match);
    if (is_incomplete) continue;
    detect.push_back(aborted ? 1.0 : 0.0);
    evade.push_back(aborted ? 0.0 : 1.0);
    success.push_back(!aborted && t.eve_key_knowledge == 1.0 ? 1.0 : 0.0);
    if (spec.session.d > 0) {
      alice_err.push_back(t.alice_tamper_error_rate);
      if (t.bob_tamper_error_rate) bob_err.push_back(*t.bob_tamper_error_rate);
    }
    if (t.key_match_fraction) match.push_back(*t.key_match_fraction);
  }

  summarize("accept_rate", accept);
  summarize("detection_rate", detect);
  summarize("evasion_rate", evade);
  summarize("incomplete_rate", incomplete);
  summarize("alice_tamper_error_rate", alice_err);
  summarize("bob_tamper_error_rate", bob_err);
  summarize("key_match_fraction", match);
  summarize("eve_key_knowledge", knowledge);
  summarize("eve_success_rate", success);
  if (spec.attack.is_server_attack()) summarize("server_copy_match", copy);

  if (spec.session.mode == Mode::Swap) {
    rep.notes.push_back("belief rule " + rep.belief_rule +
                        (spec.session.belief_rule == BeliefRule::MeasurementResult
                             ? ": Alice's key agrees with Bob's on half the slots even without an attack"
                             : ": honest swaps always agree"));
  }
  if (spec.attack.path == Path::Both && !spec.attack.is_server_attack() &&
      spec.attack.kind != AttackKind::None) {
    rep.notes.push_back(
        "both paths tapped: detection figures treat the two sides as independent (extrapolation)");
  }
  if (spec.session.d == 0) {
    rep.notes.push_back("d = 0: tamper checks pass vacuously, tamper error rates are not reported");
  }
  if (spec.attack.kind == AttackKind::PhotonNumberSplitting) {
    const double d = static_cast<double>(spec.session.d);
    const double p1 = spec.photon.photons.p1;
    char buf[160];
    std::snprintf(buf, sizeof buf, "PNS: coarse form 0.75^(p1 d) = %.6g beside per-slot (1-p1/4)^d = %.6g",
                  std::pow(0.75, p1 * d), std::pow(1.0 - p1 / 4.0, d));
    rep.notes.emplace_back(buf);
  }
  if (spec.attack.location_knowledge == LocationKnowledge::AfterMeasurement) {
    rep.notes.push_back("layout decrypted only after the photons were measured");
  }
  return rep;
}

ScenarioReport run_scenario(const ScenarioSpec& spec, int threads) {
  spec.validate();
  ScenarioReport r;
  r.trials = threads == 1 ? run_trials_serial(spec) : run_trials_parallel(spec, threads);
  r.aggregate = aggregate(spec, r.trials);
  return r;
}

std::string format_number(double value) {
  if (!std::isfinite(value)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string csv_quote(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

namespace {

std::string json_string(std::string_view s) { return nlohmann::json(std::string(s)).dump(); }

std::string json_number(double v) {
  const std::string s = format_number(v);
  return s.empty() ? "null" : s;
}

std::string json_opt(const std::optional<double>& v) { return v ? json_number(*v) : "null"; }

std::string opt_field(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

void write_csv(std::ostream& out, const ScenarioReport& report) {
  out << "trial,status,alice_tamper_error_rate,bob_tamper_error_rate,key_match_fraction,"
         "token_accepted,eve_key_knowledge,server_copy_match,event_log_digest\r\n";
  for (const TrialResult& t : report.trials) {
    out << t.trial << ',' << csv_quote(to_string(t.status)) << ','
        << format_number(t.alice_tamper_error_rate) << ',' << opt_field(t.bob_tamper_error_rate)
        << ',' << opt_field(t.key_match_fraction) << ',' << (t.token_accepted ? "true" : "false")
        << ',' << format_number(t.eve_key_knowledge) << ',' << opt_field(t.server_copy_match)
        << ',' << hex64(t.event_log_digest) << "\r\n";
  }
}

void write_json(std::ostream& out, const ScenarioReport& report) {
  for (const TrialResult& t : report.trials) {
    out << "{\"trial\":" << t.trial << ",\"status\":" << json_string(to_string(t.status))
        << ",\"alice_tamper_error_rate\":" << json_number(t.alice_tamper_error_rate)
        << ",\"bob_tamper_error_rate\":" << json_opt(t.bob_tamper_error_rate)
        << ",\"key_match_fraction\":" << json_opt(t.key_match_fraction)
        << ",\"token_accepted\":" << (t.token_accepted ? "true" : "false")
        << ",\"eve_key_knowledge\":" << json_number(t.eve_key_knowledge)
        << ",\"server_copy_match\":" << json_opt(t.server_copy_match)
        << ",\"event_log_digest\":" << json_string(hex64(t.event_log_digest)) << "}\n";
  }
  const AggregateReport& a = report.aggregate;
  out << "{\"aggregate\":{\"seed\":" << a.seed << ",\"trials\":" << a.trials
      << ",\"mode\":" << json_string(a.mode) << ",\"belief_rule\":" << json_string(a.belief_rule)
      << ",\"attack\":" << json_string(a.attack) << ",\"all_pass\":" << (a.all_pass ? "true" : "false")
      << ",\"metrics\":[";
  for (std::size_t i = 0; i < a.metrics.size(); ++i) {
    const MetricSummary& m = a.metrics[i];
    if (i) out << ',';
    out << "{\"name\":" << json_string(m.name) << ",\"n\":" << m.n
        << ",\"mean\":" << json_number(m.mean) << ",\"ci99_low\":" << json_number(m.ci99_low)
        << ",\"ci99_high\":" << json_number(m.ci99_high) << ",\"analytic\":" << json_opt(m.analytic)
        << ",\"analytic_source\":" << (m.analytic ? json_string(m.analytic_source) : "null")
        << ",\"abs_diff\":" << json_opt(m.abs_diff)
        << ",\"sigma_distance\":" << json_opt(m.sigma_distance) << ",\"pass\":"
        << (m.pass ? (*m.pass ? "true" : "false") : "null") << '}';
  }
  out << "],\"notes\":[";
  for (std::size_t i = 0; i < a.notes.size(); ++i) {
    if (i) out << ',';
    out << json_string(a.notes[i]);
  }
  out << "]}}\n";
}

}  // namespace

void write_report(std::ostream& out, const ScenarioReport& report, OutputFormat format) {
  if (format == OutputFormat::Csv) {
    write_csv(out, report);
  } else {
    write_json(out, report);
  }
}

void emit_report(const ScenarioReport& report, OutputFormat format, const std::string& path) {
  if (path.empty() || path == "-") {
    write_report(std::cout, report, format);
    std::cout.flush();
    if (!std::cout) throw std::runtime_error("failed writing report to standard output");
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw std::runtime_error("cannot open report file '" + path + "' for writing");
  write_report(file, report, format);
  file.close();
  if (!file) throw std::runtime_error("failed writing report file '" + path + "'");
}

std::string render_aggregate_text(const AggregateReport& report) {
  std::ostringstream out;
  out << "seed " << report.seed << ", " << report.trials << " trials, mode " << report.mode
      << ", belief rule " << report.belief_rule << ", attack " << report.attack << "\n";
  char line[256];
  std::snprintf(line, sizeof line, "%-24s %8s %10s %23s %10s %8s %s\n", "metric", "n", "mean",
                "99% interval", "analytic", "sigma", "verdict");
  out << line;
  for (const MetricSummary& m : report.metrics) {
    const std::string analytic = m.analytic ? format_number(*m.analytic).substr(0, 10) : "-";
    char sig[16] = "-";
    if (m.sigma_distance) std::snprintf(sig, sizeof sig, "%.2f", *m.sigma_distance);
    std::snprintf(line, sizeof line, "%-24s %8llu %10.6f [%10.6f,%10.6f] %10s %8s %s\n",
                  m.name.c_str(), static_cast<unsigned long long>(m.n), m.mean, m.ci99_low,
                  m.ci99_high, analytic.c_str(), sig,
                  m.pass ? (*m.pass ? "PASS" : "FAIL") : "-");
    out << line;
  }
  for (const std::string& note : report.notes) out << "note: " << note << "\n";
  out << (report.all_pass ? "all analytic checks within 4 sigma\n"
                          : "some analytic checks outside 4 sigma\n");
  return out.str();
}

}  // namespace qauth
