#include <set>
#include <string>

#include <json.hpp>

#include "qauth/harness.hpp"

namespace qauth {

using nlohmann::json;

std::string_view to_string(OutputFormat format) {
  return format == OutputFormat::Json ? "JSON" : "CSV";
}

std::optional<OutputFormat> parse_format(std::string_view name) {
  if (name == "JSON" || name == "json") return OutputFormat::Json;
  if (name == "CSV" || name == "csv") return OutputFormat::Csv;
  return std::nullopt;
}

namespace {

void reject_unknown(const json& obj, const std::string& where,
                    std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw SpecError(where + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (std::string_view a : allowed) ok = ok || key == a;
    if (!ok) throw SpecError("unknown field '" + where + "." + key + "'");
  }
}

std::string join(const std::string& where, std::string_view key) {
  return where.empty() ? std::string(key) : where + "." + std::string(key);
}

std::uint64_t get_count(const json& obj, const std::string& where, std::string_view key) {
  const json& v = obj.at(std::string(key));
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
    throw SpecError(join(where, key) + ": expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

double get_real(const json& obj, const std::string& where, std::string_view key) {
  const json& v = obj.at(std::string(key));
  if (!v.is_number()) throw SpecError(join(where, key) + ": expected a number");
  return v.get<double>();
}

template <typename Parse>
auto get_enum(const json& obj, const std::string& where, std::string_view key, Parse parse) {
  const json& v = obj.at(std::string(key));
  if (!v.is_string()) throw SpecError(join(where, key) + ": expected a string");
  const std::string text = v.get<std::string>();
  auto parsed = parse(text);
  if (!parsed) throw SpecError(join(where, key) + ": unknown value '" + text + "'");
  return *parsed;
}

bool has(const json& obj, std::string_view key) { return obj.contains(std::string(key)); }

void require(const json& obj, const std::string& where, std::string_view key) {
  if (!has(obj, key)) throw SpecError("missing field '" + join(where, key) + "'");
}

}  // namespace

void ScenarioSpec::validate() const {
  const auto wrap = [](auto&& fn) {
    try {
      fn();
    } catch (const SpecError&) {
      throw;
    } catch (const std::invalid_argument& e) {
      throw SpecError(e.what());
    }
  };
  wrap([&] { session.validate(); });
  wrap([&] { attack.validate(session.length()); });
  wrap([&] { photon.photons.validate(); });
  if (!(photon.p_loss >= 0.0 && photon.p_loss < 1.0)) {
    throw SpecError("photon.p_loss must lie in [0, 1)");
  }
  if (attack.kind == AttackKind::SubsetGuess && attack.g == 0) {
    throw SpecError("attack.g must be positive for SUBSET_GUESS");
  }
}

ScenarioSpec parse_scenario(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SpecError(std::string("scenario is not valid JSON: ") + e.what());
  }
  reject_unknown(doc, "scenario", {"seed", "trials", "session", "attack", "photon", "outputs"});

  ScenarioSpec spec;
  try {
    if (has(doc, "seed")) spec.seed = get_count(doc, "", "seed");
    if (has(doc, "trials")) spec.trials = get_count(doc, "", "trials");

    require(doc, "", "session");
    const json& s = doc.at("session");
    reject_unknown(s, "session",
                   {"k", "d", "error_threshold", "reveal_count", "mode", "belief_rule", "key_basis"});
    for (auto key : {"k", "d", "reveal_count", "mode"}) require(s, "session", key);
    spec.session.k = get_count(s, "session", "k");
    spec.session.d = get_count(s, "session", "d");
    spec.session.reveal_count = get_count(s, "session", "reveal_count");
    spec.session.mode = get_enum(s, "session", "mode", parse_mode);
    if (has(s, "error_threshold")) {
      spec.session.error_threshold = get_real(s, "session", "error_threshold");
    }
    if (has(s, "belief_rule")) {
      spec.session.belief_rule = get_enum(s, "session", "belief_rule", parse_belief_rule);
    }
    if (has(s, "key_basis")) spec.session.key_basis = get_enum(s, "session", "key_basis", parse_basis);

    if (has(doc, "attack")) {
      const json& a = doc.at("attack");
      reject_unknown(a, "attack",
                     {"kind", "g", "path", "basis_strategy", "fixed_basis", "location_knowledge"});
      if (has(a, "kind")) spec.attack.kind = get_enum(a, "attack", "kind", parse_attack_kind);
      if (has(a, "g")) spec.attack.g = get_count(a, "attack", "g");
      if (has(a, "path")) spec.attack.path = get_enum(a, "attack", "path", parse_path);
      if (has(a, "basis_strategy")) {
        spec.attack.basis_strategy = get_enum(a, "attack", "basis_strategy", parse_basis_strategy);
      }
      if (has(a, "fixed_basis")) {
        spec.attack.fixed_basis = get_enum(a, "attack", "fixed_basis", parse_basis);
      }
      if (has(a, "location_knowledge")) {
        spec.attack.location_knowledge =
            get_enum(a, "attack", "location_knowledge", parse_location_knowledge);
      }
    }

    if (has(doc, "photon")) {
      const json& p = doc.at("photon");
      reject_unknown(p, "photon", {"p1", "p_loss"});
      if (has(p, "p1")) spec.photon.photons.p1 = get_real(p, "photon", "p1");
      if (has(p, "p_loss")) spec.photon.p_loss = get_real(p, "photon", "p_loss");
    }

    if (has(doc, "outputs")) {
      const json& o = doc.at("outputs");
      reject_unknown(o, "outputs", {"format", "path"});
      if (has(o, "format")) spec.format = get_enum(o, "outputs", "format", parse_format);
      if (has(o, "path")) {
        if (!o.at("path").is_string()) throw SpecError("outputs.path: expected a string");
        spec.path = o.at("path").get<std::string>();
      }
    }
  } catch (const json::exception& e) {
    throw SpecError(std::string("scenario: ") + e.what());
  }

  spec.validate();
  return spec;
}

}  // namespace qauth
