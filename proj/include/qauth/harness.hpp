#pragma once

// Seeded Monte Carlo scenario runner and report emitters.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qauth/attack_types.hpp"
#include "qauth/protocol.hpp"
#include "qauth/session_types.hpp"

namespace qauth {

enum class OutputFormat : std::uint8_t { Json, Csv };

std::string_view to_string(OutputFormat format);
std::optional<OutputFormat> parse_format(std::string_view name);

/// Invalid scenario document; the message names the offending field.
class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ScenarioSpec {
  std::uint64_t seed = 0;
  std::uint64_t trials = 0;
  SessionConfig session;
  AttackConfig attack;
  ChannelConfig photon;
  OutputFormat format = OutputFormat::Json;
  std::string path;  // empty: standard output

  /// Throws SpecError.
  void validate() const;
};

/// Parses the JSON scenario document. Unknown fields and unknown enumeration
/// names are rejected with a SpecError naming the field.
ScenarioSpec parse_scenario(std::string_view json_text);

struct TrialResult {
  std::uint64_t trial = 0;
  SessionStatus status = SessionStatus::AuthReject;
  double alice_tamper_error_rate = 0.0;
  std::optional<double> bob_tamper_error_rate;
  /// Alice/Bob per-key-slot agreement; unset when Bob never measured.
  std::optional<double> key_match_fraction;
  bool token_accepted = false;
  double eve_key_knowledge = 0.0;
  std::optional<double> server_copy_match;
  std::uint64_t event_log_digest = 0;
};

/// Trial `index` draws from RandomSource(spec.seed, index) only.
TrialResult run_trial(const ScenarioSpec& spec, std::uint64_t index);

/// Reference implementation: one trial after another.
std::vector<TrialResult> run_trials_serial(const ScenarioSpec& spec);

/// OpenMP fan-out over trials. Results are stored by trial index, so the
/// output equals run_trials_serial for any thread count. threads <= 0 uses
/// the OpenMP default. Falls back to the serial loop without OpenMP.
std::vector<TrialResult> run_trials_parallel(const ScenarioSpec& spec, int threads = 0);

struct MetricSummary {
  std::string name;
  std::uint64_t n = 0;
  double mean = 0.0;
  double ci99_low = 0.0;
  double ci99_high = 0.0;
  std::optional<double> analytic;
  std::string analytic_source;
  std::optional<double> abs_diff;
  std::optional<double> sigma_distance;
  std::optional<bool> pass;  // |empirical - analytic| <= 4 sigma
};

struct AggregateReport {
  std::uint64_t seed = 0;
  std::uint64_t trials = 0;
  std::string mode;
  std::string belief_rule;  // "NONE" in BASE mode without a rule
  std::string attack;
  std::vector<MetricSummary> metrics;
  std::vector<std::string> notes;
  bool all_pass = true;

  const MetricSummary* metric(std::string_view name) const;
};

struct Prediction {
  double value = 0.0;
  std::string source;
};

/// Analytic counterparts of the aggregate metrics, where one exists.
std::vector<std::pair<std::string, Prediction>> analytic_predictions(const ScenarioSpec& spec);

AggregateReport aggregate(const ScenarioSpec& spec, std::span<const TrialResult> trials);

struct ScenarioReport {
  std::vector<TrialResult> trials;
  AggregateReport aggregate;
};

ScenarioReport run_scenario(const ScenarioSpec& spec, int threads = 0);

/// "%.17g"; non-finite values render as an empty string.
std::string format_number(double value);
std::string csv_quote(std::string_view field);

/// CSV: header row plus one row per trial (CRLF line ends, RFC 4180
/// quoting). JSON: one object per trial per line, then one aggregate object.
void write_report(std::ostream& out, const ScenarioReport& report, OutputFormat format);
/// Writes to `path`, or standard output when it is empty or "-". Throws
/// std::runtime_error naming the path on I/O failure.
void emit_report(const ScenarioReport& report, OutputFormat format, const std::string& path);

/// Human-readable aggregate table.
std::string render_aggregate_text(const AggregateReport& report);

}  // namespace qauth
