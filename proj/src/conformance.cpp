#include "qauth/conformance.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "qauth/protocol.hpp"

namespace qauth {

namespace {

constexpr double kTol = 1e-9;

// Published swap table, row = created state of (Q_i, Q_j), column = Bell
// outcome on (Q_j, Q_k), in the order Phi+, Phi-, Psi+, Psi-.
constexpr std::array<std::array<BellLabel, 4>, 4> kPublishedTable1{{
    {kPhiPlus, kPhiMinus, kPsiPlus, kPsiMinus},
    {kPhiMinus, kPhiPlus, kPsiMinus, kPsiPlus},
    {kPsiPlus, kPsiMinus, kPhiPlus, kPhiMinus},
    {kPsiMinus, kPsiPlus, kPhiMinus, kPhiPlus},
}};

// Key rule: Phi-kind keeps Q_i's result, Psi-kind flips it.
constexpr Bit published_key_rule(BellLabel believed, Bit qi) {
  const bool phi = believed.kind == BellKind::Phi;
  if (phi) return qi == 0 ? 0 : 1;
  return qi == 0 ? 1 : 0;
}

// Compromised-server table: the key is x for a Phi-kind created pair and
// its complement for a Psi-kind one, whatever the Bell outcome.
constexpr Bit published_compromised_key(BellLabel created, Bit x) {
  return created.kind == BellKind::Phi ? x : static_cast<Bit>(1 - x);
}

double joint_at(const SwapBranch& b, Bit qi, Bit ql) {
  return b.joint[static_cast<std::size_t>(2 * qi + ql)];
}

CompromisedCell compromised_cell(BellLabel s, const SwapBranch& b, Bit x, BeliefRule rule) {
  CompromisedCell c;
  c.created = s;
  c.outcome = b.outcome;
  c.x = x;
  c.branch_probability = b.probability;
  c.published_key = published_compromised_key(s, x);
  const BellLabel believed = believed_state(s, b.outcome, rule);
  // key = 1 exactly when derive_key_bit maps Q_i's result to 1.
  const double p_qi1 = b.p_qi_one();
  c.p_key_one = derive_key_bit(believed, 1) == 1 ? p_qi1 : 1.0 - p_qi1;
  c.p_match = x == 1 ? c.p_key_one : 1.0 - c.p_key_one;
  const double p_published = c.published_key == 1 ? c.p_key_one : 1.0 - c.p_key_one;
  c.agrees = std::abs(p_published - 1.0) < kTol;
  return c;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string key_name(Bit published, Bit x) { return published == x ? "x" : "x'"; }

}  // namespace

std::size_t ConformanceReport::table1_passed() const {
  std::size_t n = 0;
  for (const auto& c : table1) n += c.pass;
  return n;
}

std::size_t ConformanceReport::key_rule_passed() const {
  std::size_t n = 0;
  for (const auto& r : key_rule) n += r.pass;
  return n;
}

std::size_t ConformanceReport::measurement_passed() const {
  std::size_t n = 0;
  for (const auto& c : measurement) n += c.agrees;
  return n;
}

std::size_t ConformanceReport::compose_discrepancies() const {
  std::size_t n = 0;
  for (const auto& c : compose) n += !c.agrees;
  return n;
}

bool ConformanceReport::passed() const {
  return table1.size() == 16 && table1_passed() == 16 && key_rule.size() == 8 &&
         key_rule_passed() == 8 && measurement.size() == 32 && measurement_passed() == 32;
}

ConformanceReport verify_tables() {
  ConformanceReport rep;

  // 1. Swap table against the oracle.
  for (BellLabel s : kAllBellLabels) {
    const SwapTable t = swap_enumerate(s, SwapSource::entangled());
    for (BellLabel m : kAllBellLabels) {
      const SwapBranch& b = t.branches[m.index()];
      ComposeCell c;
      c.created = s;
      c.outcome = m;
      c.published = kPublishedTable1[s.index()][m.index()];
      c.composed = bell_compose(s, m);
      c.probability = b.probability;
      c.residual_matches = b.residual && b.residual->equal_up_to_phase(prepare_bell(c.published));
      c.pass = c.residual_matches && c.composed == c.published &&
               std::abs(c.probability - 0.25) < kTol;
      rep.table1.push_back(c);
    }
  }

  // 2. Key rule against the honest residual.
  for (BellLabel believed : kAllBellLabels) {
    // Created = believed and outcome Phi+ leaves (Q_i, Q_l) in `believed`.
    const SwapTable t = swap_enumerate(believed, SwapSource::entangled());
    const SwapBranch& b = t.branches[kPhiPlus.index()];
    for (Bit qi : {Bit{0}, Bit{1}}) {
      KeyRuleRow r;
      r.believed = believed;
      r.qi_result = qi;
      r.published_key = published_key_rule(believed, qi);
      r.derived_key = derive_key_bit(believed, qi);
      const double p_qi = joint_at(b, qi, 0) + joint_at(b, qi, 1);
      r.p_bob_agrees = p_qi > 0.0 ? joint_at(b, qi, r.published_key) / p_qi : 0.0;
      r.pass = r.derived_key == r.published_key && std::abs(r.p_bob_agrees - 1.0) < kTol;
      rep.key_rule.push_back(r);
    }
  }

  // 3 and 4. Compromised server sending |x> on both paths.
  for (BellLabel s : kAllBellLabels) {
    for (Bit x : {Bit{0}, Bit{1}}) {
      const SwapTable t = swap_enumerate(s, SwapSource::product(x));
      for (BellLabel m : kAllBellLabels) {
        const SwapBranch& b = t.branches[m.index()];
        rep.measurement.push_back(compromised_cell(s, b, x, BeliefRule::MeasurementResult));
        rep.compose.push_back(compromised_cell(s, b, x, BeliefRule::ComposeTable1));
      }
    }
  }

  for (BellLabel s : kAllBellLabels) {
    const SwapTable t = swap_enumerate(s, SwapSource::ghz());
    for (BellLabel m : kAllBellLabels) {
      const SwapBranch& b = t.branches[m.index()];
      GhzCell g;
      g.created = s;
      g.outcome = m;
      g.p_ql_equals_qm = b.p_ql_equals_qm().value_or(0.0);
      const BellLabel believed = believed_state(s, m, BeliefRule::ComposeTable1);
      double agree = 0.0;
      for (std::size_t idx = 0; idx < b.joint.size(); ++idx) {
        const auto qi = static_cast<Bit>((idx >> 2) & 1);
        const auto qm = static_cast<Bit>(idx & 1);
        if (derive_key_bit(believed, qi) == qm) agree += b.joint[idx];
      }
      g.p_compose_key_equals_qm = b.probability > 0.0 ? agree : 0.0;
      rep.ghz.push_back(g);
    }
  }

  const SwapTable ex = swap_enumerate(kPsiPlus, SwapSource::product(0));
  const SwapBranch& exb = ex.branches[kPhiPlus.index()];
  rep.example_p_qi_one = exb.p_qi_one();
  rep.example_p_ql_one = exb.p_ql_one();
  return rep;
}

std::string render_conformance_text(const ConformanceReport& r) {
  std::ostringstream out;
  out << "[1] swap table, created (Q_i,Q_j) x outcome (Q_j,Q_k) -> (Q_i,Q_l): "
      << r.table1_passed() << "/" << r.table1.size() << " exact\n";
  for (const auto& c : r.table1) {
    out << "  " << to_string(c.created) << " x " << to_string(c.outcome) << " -> "
        << to_string(c.published) << "  oracle p=" << num(c.probability)
        << " residual=" << (c.residual_matches ? "match" : "MISMATCH")
        << " compose=" << to_string(c.composed) << "  " << (c.pass ? "ok" : "FAIL") << "\n";
  }

  out << "[2] key rule on honest residual: " << r.key_rule_passed() << "/" << r.key_rule.size()
      << " exact\n";
  for (const auto& k : r.key_rule) {
    out << "  " << to_string(k.believed) << " Q_i=" << int(k.qi_result)
        << " key=" << int(k.published_key) << "  derived=" << int(k.derived_key)
        << " P(Q_l=key)=" << num(k.p_bob_agrees) << "  " << (k.pass ? "ok" : "FAIL") << "\n";
  }

  const auto cells = [&](const std::vector<CompromisedCell>& v, bool discrepancy) {
    for (const auto& c : v) {
      out << "  " << to_string(c.created) << " |" << int(c.x) << "> " << to_string(c.outcome)
          << " p=" << num(c.branch_probability) << " published=" << key_name(c.published_key, c.x)
          << " P(key=1)=" << num(c.p_key_one) << " bob=" << int(c.x)
          << " P(match)=" << num(c.p_match) << "  "
          << (c.agrees ? "agrees" : (discrepancy ? "DIFFERS" : "FAIL")) << "\n";
    }
  };
  out << "[3] compromised server, MEASUREMENT_RESULT rule: " << r.measurement_passed() << "/"
      << r.measurement.size() << " exact\n";
  cells(r.measurement, false);
  out << "[4] compromised server, COMPOSE_TABLE1 rule (informational): "
      << r.compose_discrepancies() << "/" << r.compose.size() << " cells differ from the table\n";
  cells(r.compose, true);

  out << "[info] GHZ source, compose rule: P(Q_l=Q_m) and P(key=Q_m) per branch\n";
  for (const auto& g : r.ghz) {
    out << "  " << to_string(g.created) << " x " << to_string(g.outcome)
        << " P(Q_l=Q_m)=" << num(g.p_ql_equals_qm)
        << " P(key=Q_m)=" << num(g.p_compose_key_equals_qm) << "\n";
  }
  out << "[info] worked example PSI_PLUS with |0>, outcome PHI_PLUS: P(Q_i=1)="
      << num(r.example_p_qi_one) << " P(Q_l=1)=" << num(r.example_p_ql_one)
      << " (the text assigns |1> to Q_l)\n";
  out << (r.passed() ? "conformance: PASS\n" : "conformance: FAIL\n");
  return out.str();
}

std::string render_conformance_json(const ConformanceReport& r) {
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["passed"] = r.passed();

  ordered_json t1 = ordered_json::array();
  for (const auto& c : r.table1) {
    t1.push_back({{"created", to_string(c.created)},
                  {"outcome", to_string(c.outcome)},
                  {"published", to_string(c.published)},
                  {"composed", to_string(c.composed)},
                  {"probability", c.probability},
                  {"residual_matches", c.residual_matches},
                  {"pass", c.pass}});
  }
  doc["table1"] = std::move(t1);

  ordered_json kr = ordered_json::array();
  for (const auto& k : r.key_rule) {
    kr.push_back({{"believed", to_string(k.believed)},
                  {"qi_result", k.qi_result},
                  {"published_key", k.published_key},
                  {"derived_key", k.derived_key},
                  {"p_bob_agrees", k.p_bob_agrees},
                  {"pass", k.pass}});
  }
  doc["key_rule"] = std::move(kr);

  const auto cells = [](const std::vector<CompromisedCell>& v) {
    ordered_json a = ordered_json::array();
    for (const auto& c : v) {
      a.push_back({{"created", to_string(c.created)},
                   {"x", c.x},
                   {"outcome", to_string(c.outcome)},
                   {"branch_probability", c.branch_probability},
                   {"published_key", c.published_key},
                   {"p_key_one", c.p_key_one},
                   {"bob_bit", c.x},
                   {"p_match", c.p_match},
                   {"agrees", c.agrees}});
    }
    return a;
  };
  doc["compromised_measurement_result"] = cells(r.measurement);
  doc["compromised_compose_discrepancies"] = cells(r.compose);

  ordered_json gh = ordered_json::array();
  for (const auto& g : r.ghz) {
    gh.push_back({{"created", to_string(g.created)},
                  {"outcome", to_string(g.outcome)},
                  {"p_ql_equals_qm", g.p_ql_equals_qm},
                  {"p_compose_key_equals_qm", g.p_compose_key_equals_qm}});
  }
  doc["ghz"] = std::move(gh);
  doc["worked_example"] = {{"p_qi_one", r.example_p_qi_one}, {"p_ql_one", r.example_p_ql_one}};
  return doc.dump(2) + "\n";
}

}  // namespace qauth
