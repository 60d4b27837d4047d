#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "symbolact/system.hpp"

namespace symbolact {

using ordered_json = nlohmann::ordered_json;

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write file: " + path);
  out << content;
}

inline ordered_json parse_json(const std::string& text, const std::string& what) {
  ordered_json j = ordered_json::parse(text, nullptr, false);
  if (j.is_discarded()) throw FormatError("invalid JSON in " + what);
  return j;
}

// System file, version 1. Symbols and rules are emitted in id order and
// premise arrays sorted by id, so equal systems serialize to equal bytes.
inline std::string serialize_system(const SymbolicSystem& system) {
  ordered_json j;
  j["version"] = 1;
  j["symbols"] = ordered_json::array();
  for (const auto& [id, s] : system.symbols()) {
    ordered_json js;
    js["id"] = s.id;
    js["text"] = s.text;
    js["raw_text"] = s.raw_text;
    js["is_conclusion"] = s.is_conclusion;
    j["symbols"].push_back(std::move(js));
  }
  j["rules"] = ordered_json::array();
  for (const auto& [id, r] : system.rules()) {
    ordered_json jr;
    jr["id"] = r.id;
    jr["premises"] = r.premises;
    jr["conclusion"] = r.conclusion;
    if (r.entailment_score)
      jr["entailment_score"] = *r.entailment_score;
    else
      jr["entailment_score"] = nullptr;
    jr["round"] = r.round;
    jr["trace"] = r.trace;
    j["rules"].push_back(std::move(jr));
  }
  return j.dump(2) + "\n";
}

inline SymbolicSystem parse_system(const std::string& text) {
  ordered_json j = parse_json(text, "system file");
  if (!j.is_object() || !j.contains("version"))
    throw FormatError("system file lacks a version field");
  if (j["version"] != 1)
    throw FormatError("unsupported system file version " + j["version"].dump());
  SymbolicSystem sys;
  for (const auto& js : j.value("symbols", ordered_json::array())) {
    Symbol s;
    s.id = js.at("id").get<SymbolId>();
    s.text = js.at("text").get<std::string>();
    s.raw_text = js.value("raw_text", s.text);
    s.is_conclusion = js.value("is_conclusion", false);
    if (s.text != canonicalize_symbol_text(s.text))
      throw FormatError("symbol " + std::to_string(s.id) + " text is not canonical: \"" +
                        s.text + "\"");
    sys.raw_insert(s);
  }
  for (const auto& jr : j.value("rules", ordered_json::array())) {
    Rule r;
    r.id = jr.at("id").get<RuleId>();
    r.premises = jr.at("premises").get<std::vector<SymbolId>>();
    r.conclusion = jr.at("conclusion").get<SymbolId>();
    if (jr.contains("entailment_score") && !jr["entailment_score"].is_null())
      r.entailment_score = jr["entailment_score"].get<double>();
    r.round = jr.value("round", 0);
    r.trace = jr.value("trace", std::vector<SymbolId>{});
    if (!std::is_sorted(r.premises.begin(), r.premises.end()))
      throw FormatError("rule " + std::to_string(r.id) + " premises not sorted by id");
    sys.raw_insert(r);
  }
  ValidationReport report = validate(sys);
  if (!report.ok()) {
    std::string msg = "system file failed validation:";
    for (const auto& f : report.findings) msg += "\n  [" + f.kind + "] " + f.message;
    throw FormatError(msg);
  }
  return sys;
}

inline void write_system_file(const std::string& path, const SymbolicSystem& system) {
  write_file(path, serialize_system(system));
}

inline SymbolicSystem read_system_file(const std::string& path) {
  return parse_system(read_file(path));
}

// Activities file: JSON list of {"activity": str, "object": str|null}.
struct ActivitySpec {
  std::string activity;
  std::optional<std::string> object;
};

inline std::string serialize_activities(const std::vector<ActivitySpec>& specs) {
  ordered_json j = ordered_json::array();
  for (const auto& a : specs) {
    ordered_json ja;
    ja["activity"] = a.activity;
    if (a.object)
      ja["object"] = *a.object;
    else
      ja["object"] = nullptr;
    j.push_back(std::move(ja));
  }
  return j.dump(2) + "\n";
}

inline std::vector<ActivitySpec> parse_activities(const std::string& text) {
  ordered_json j = parse_json(text, "activities file");
  if (!j.is_array()) throw FormatError("activities file must be a JSON list");
  std::vector<ActivitySpec> out;
  for (const auto& ja : j) {
    ActivitySpec a;
    a.activity = ja.at("activity").get<std::string>();
    if (ja.contains("object") && !ja["object"].is_null())
      a.object = ja["object"].get<std::string>();
    if (trim(a.activity).empty()) throw FormatError("activity text must be non-empty");
    out.push_back(std::move(a));
  }
  return out;
}

inline std::vector<ActivitySpec> read_activities_file(const std::string& path) {
  return parse_activities(read_file(path));
}

}  // namespace symbolact
