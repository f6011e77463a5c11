#pragma once

// Cross-checks of the published swap tables against the state-vector oracle.
//
// Sections 1-3 are pass/fail. Section 4 lists, cell by cell, how the
// compose-rule key compares with the published compromised-server table; it
// is informational and always fully populated.

#include <string>
#include <vector>

#include "qauth/qsim.hpp"

namespace qauth {

struct ComposeCell {
  BellLabel created;
  BellLabel outcome;
  BellLabel published;  // transcribed table entry
  BellLabel composed;   // bell_compose(created, outcome)
  double probability = 0.0;
  bool residual_matches = false;
  bool pass = false;
};

struct KeyRuleRow {
  BellLabel believed;
  Bit qi_result = 0;
  Bit published_key = 0;
  Bit derived_key = 0;
  /// P(Bob's Q_l equals the key | Q_i result) on the honest swap residual.
  double p_bob_agrees = 0.0;
  bool pass = false;
};

struct CompromisedCell {
  BellLabel created;
  BellLabel outcome;
  Bit x = 0;  // value sent by the server on both paths
  double branch_probability = 0.0;
  Bit published_key = 0;
  /// P(Alice's key bit = 1) under the belief rule of the section.
  double p_key_one = 0.0;
  /// P(Alice's key bit = Bob's bit x).
  double p_match = 0.0;
  bool agrees = false;  // key deterministic and equal to the published one
};

struct GhzCell {
  BellLabel created;
  BellLabel outcome;
  double p_ql_equals_qm = 0.0;
  /// P(compose-rule key = server's retained Q_m).
  double p_compose_key_equals_qm = 0.0;
};

struct ConformanceReport {
  std::vector<ComposeCell> table1;           // 16 cells
  std::vector<KeyRuleRow> key_rule;          // 8 rows
  std::vector<CompromisedCell> measurement;  // 32 cells, MEASUREMENT_RESULT
  std::vector<CompromisedCell> compose;      // 32 cells, COMPOSE_TABLE1
  std::vector<GhzCell> ghz;                  // 16 cells
  /// Worked example: created Psi+, server sends |0>, Phi-kind outcome.
  double example_p_qi_one = 0.0;
  double example_p_ql_one = 0.0;

  std::size_t table1_passed() const;
  std::size_t key_rule_passed() const;
  std::size_t measurement_passed() const;
  std::size_t compose_discrepancies() const;
  /// Sections 1-3 only.
  bool passed() const;
};

ConformanceReport verify_tables();

std::string render_conformance_text(const ConformanceReport& report);
std::string render_conformance_json(const ConformanceReport& report);

}  // namespace qauth
