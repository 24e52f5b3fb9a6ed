#include "uisbench/engine_json.hpp"

#include <string>

namespace uisbench {

using nlohmann::json;

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

[[noreturn]] void structural(const std::string& path, const std::string& what) {
  throw Error("validation_error", what, path);
}

const json& member(const json& j, const char* key, const std::string& path) {
  if (!j.is_object()) structural(path, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) structural(path.empty() ? key : path + "." + key, "missing field");
  return *it;
}

std::string join(const std::string& path, const char* key) {
  return path.empty() ? std::string(key) : path + "." + key;
}

double number(const json& j, const char* key, const std::string& path) {
  const json& v = member(j, key, path);
  if (!v.is_number()) structural(join(path, key), "expected a number");
  return v.get<double>();
}

std::string text(const json& j, const char* key, const std::string& path) {
  const json& v = member(j, key, path);
  if (!v.is_string()) structural(join(path, key), "expected a string");
  return v.get<std::string>();
}

const json& array(const json& j, const char* key, const std::string& path) {
  const json& v = member(j, key, path);
  if (!v.is_array()) structural(join(path, key), "expected an array");
  return v;
}

Antecedent antecedent_at(const json& j, const std::string& path) {
  const std::string tag = text(j, "antecedent", path);
  try {
    return antecedent_from_string(tag);
  } catch (const Error& e) {
    throw Error(e.code(), e.what(), join(path, "antecedent"));
  }
}

json ramps_to_json(const EvidenceRamps& r) {
  return {{"temperature", {{"lo", r.temperature.lo}, {"hi", r.temperature.hi}}},
          {"pressure", {{"lo", r.pressure.lo}, {"hi", r.pressure.hi}}}};
}

EvidenceRamps ramps_from_json(const json& j) {
  const json& r = member(j, "ramps", "");
  EvidenceRamps out;
  const json& t = member(r, "temperature", "ramps");
  out.temperature = {number(t, "lo", "ramps.temperature"), number(t, "hi", "ramps.temperature")};
  const json& p = member(r, "pressure", "ramps");
  out.pressure = {number(p, "lo", "ramps.pressure"), number(p, "hi", "ramps.pressure")};
  return out;
}

json interval_to_json(const Interval& iv) { return {{"lo", iv.lo}, {"hi", iv.hi}}; }

Interval interval_from_json(const json& j, const char* key, const std::string& path) {
  const json& iv = member(j, key, path);
  const std::string p = join(path, key);
  return {number(iv, "lo", p), number(iv, "hi", p)};
}

json membership_to_json(const FuzzyMembership& m) {
  return {{"absent", interval_to_json(m.absent)},
          {"present", interval_to_json(m.present)},
          {"uncertain1", interval_to_json(m.uncertain1)},
          {"uncertain2", interval_to_json(m.uncertain2)}};
}

FuzzyMembership membership_from_json(const json& j, const char* key) {
  const json& m = member(j, key, "");
  return {interval_from_json(m, "absent", key), interval_from_json(m, "present", key),
          interval_from_json(m, "uncertain1", key), interval_from_json(m, "uncertain2", key)};
}

SupportFunction support_from_json(const json& j, const char* key) {
  const json& f = member(j, key, "");
  const std::string path = join(key, "anchors");
  const json& a = array(f, "anchors", key);
  if (a.size() != 5) structural(path, "expected exactly five anchors");
  SupportFunction out;
  for (std::size_t i = 0; i < 5; ++i) {
    if (!a[i].is_number()) structural(path + "[" + std::to_string(i) + "]", "expected a number");
    out.anchors[i] = a[i].get<double>();
  }
  return out;
}

std::string rule_path(std::size_t i) { return "rules[" + std::to_string(i) + "]"; }

}  // namespace

json system_to_json(const UisSystem& sys) {
  json j;
  j["kind"] = std::string(to_string(kind_of(sys)));
  std::visit(
      Overloaded{
          [&](const EmycinSystem& s) {
            j["rules"] = json::array();
            for (const auto& r : s.rules) {
              j["rules"].push_back({{"antecedent", to_string(r.antecedent)}, {"cf", r.cf}});
            }
            j["ramps"] = ramps_to_json(s.ramps);
            j["activation_threshold"] = s.activation_threshold;
          },
          [&](const ProspectorSystem& s) {
            j["rules"] = json::array();
            for (const auto& r : s.rules) {
              j["rules"].push_back({{"antecedent", to_string(r.antecedent)},
                                    {"ls_scale", r.ls_scale},
                                    {"ln_scale", r.ln_scale},
                                    {"prior_evidence_scale", r.prior_evidence_scale}});
            }
            j["conclusion_prior_scale"] = s.conclusion_prior_scale;
            j["ramps"] = ramps_to_json(s.ramps);
          },
          [&](const IndependenceSystem& s) {
            j["params"] = {{"p_nn", s.params.p_nn},
                           {"p_nh", s.params.p_nh},
                           {"p_hn", s.params.p_hn},
                           {"p_hh", s.params.p_hh}};
            j["ramps"] = ramps_to_json(s.ramps);
          },
          [&](const RegressionSystem& s) {
            j["params"] = {{"a", s.params.a}, {"b1", s.params.b1}, {"b2", s.params.b2}};
            j["ramps"] = ramps_to_json(s.ramps);
          },
          [&](const FuzzySystem& s) {
            j["temperature"] = membership_to_json(s.temperature);
            j["pressure"] = membership_to_json(s.pressure);
            j["rules"] = json::array();
            for (const auto& r : s.rules) {
              j["rules"].push_back(
                  {{"antecedent", to_string(r.antecedent)}, {"strength", r.strength}});
            }
          },
          [&](const DsSystem& s) {
            j["temperature"] = {{"anchors", s.temperature.anchors}};
            j["pressure"] = {{"anchors", s.pressure.anchors}};
          },
      },
      sys);
  return j;
}

UisSystem system_from_json(const json& j) {
  const EngineKind kind = engine_kind_from_string(text(j, "kind", ""));
  switch (kind) {
    case EngineKind::kEmycin: {
      EmycinSystem s;
      const json& rules = array(j, "rules", "");
      for (std::size_t i = 0; i < rules.size(); ++i) {
        s.rules.push_back({antecedent_at(rules[i], rule_path(i)), number(rules[i], "cf", rule_path(i))});
      }
      s.ramps = ramps_from_json(j);
      if (j.contains("activation_threshold")) {
        s.activation_threshold = number(j, "activation_threshold", "");
      }
      return s;
    }
    case EngineKind::kProspector: {
      ProspectorSystem s;
      const json& rules = array(j, "rules", "");
      for (std::size_t i = 0; i < rules.size(); ++i) {
        const std::string p = rule_path(i);
        s.rules.push_back({antecedent_at(rules[i], p), number(rules[i], "ls_scale", p),
                           number(rules[i], "ln_scale", p),
                           number(rules[i], "prior_evidence_scale", p)});
      }
      s.conclusion_prior_scale = number(j, "conclusion_prior_scale", "");
      s.ramps = ramps_from_json(j);
      return s;
    }
    case EngineKind::kIndependence: {
      IndependenceSystem s;
      const json& p = member(j, "params", "");
      s.params = {number(p, "p_nn", "params"), number(p, "p_nh", "params"),
                  number(p, "p_hn", "params"), number(p, "p_hh", "params")};
      s.ramps = ramps_from_json(j);
      return s;
    }
    case EngineKind::kRegression: {
      RegressionSystem s;
      const json& p = member(j, "params", "");
      s.params = {number(p, "a", "params"), number(p, "b1", "params"), number(p, "b2", "params")};
      s.ramps = ramps_from_json(j);
      return s;
    }
    case EngineKind::kFuzzy: {
      FuzzySystem s;
      s.temperature = membership_from_json(j, "temperature");
      s.pressure = membership_from_json(j, "pressure");
      const json& rules = array(j, "rules", "");
      for (std::size_t i = 0; i < rules.size(); ++i) {
        s.rules.push_back(
            {antecedent_at(rules[i], rule_path(i)), number(rules[i], "strength", rule_path(i))});
      }
      return s;
    }
    case EngineKind::kDempsterShafer: {
      DsSystem s;
      s.temperature = support_from_json(j, "temperature");
      s.pressure = support_from_json(j, "pressure");
      return s;
    }
  }
  structural("kind", "unknown engine kind");
}

json report_to_json(const BeliefReport& r) {
  json j = {{"scale", to_string(r.scale)},
            {"value", r.value},
            {"verdict", std::string(1, to_char(r.verdict))}};
  if (r.prior) j["prior"] = *r.prior;
  if (r.raw) j["raw"] = *r.raw;
  if (r.belief_working) {
    j["belief_working"] = *r.belief_working;
    j["belief_malfunction"] = r.value;
  }
  return j;
}

BeliefReport report_from_json(const json& j) {
  BeliefReport r;
  const std::string scale = text(j, "scale", "");
  bool known = false;
  for (Scale s : {Scale::kCf, Scale::kProbability, Scale::kPosteriorWithPrior, Scale::kBeliefPair,
                  Scale::kMembershipDegree}) {
    if (to_string(s) == scale) {
      r.scale = s;
      known = true;
    }
  }
  if (!known) structural("scale", "unknown scale");
  r.value = number(j, "value", "");
  if (j.contains("prior")) r.prior = number(j, "prior", "");
  if (j.contains("raw")) r.raw = number(j, "raw", "");
  if (j.contains("belief_working")) r.belief_working = number(j, "belief_working", "");
  r.verdict = verdict_from_string(text(j, "verdict", ""));
  return r;
}

json engine_schema() {
  const json ramps = {{"temperature", {{"lo", "reading"}, {"hi", "reading"}}},
                      {"pressure", {{"lo", "reading"}, {"hi", "reading"}}},
                      {"constraint", "lo < hi"}};
  const json rule_forms = {"E1", "E2", "E1_AND_E2", "E1_OR_E2"};
  json s;
  s["emycin"] = {{"rules", {{"antecedent", rule_forms}, {"cf", {{"min", -1.0}, {"max", 1.0}}}}},
                 {"activation_threshold", {{"min", 0.0}, {"max", 1.0}, {"default", 0.0}}},
                 {"ramps", ramps}};
  s["prospector"] = {
      {"rules",
       {{"antecedent", rule_forms},
        {"ls_scale", {{"min", -kProspectorRatioScale}, {"max", kProspectorRatioScale}}},
        {"ln_scale", {{"min", -kProspectorRatioScale}, {"max", kProspectorRatioScale}}},
        {"prior_evidence_scale", {{"min", -kProspectorPriorScale}, {"max", kProspectorPriorScale}}}}},
      {"conclusion_prior_scale", {{"min", -kProspectorPriorScale}, {"max", kProspectorPriorScale}}},
      {"ramps", ramps}};
  const json prob = {{"min", 0.0}, {"max", 1.0}};
  s["independence"] = {{"params", {{"p_nn", prob}, {"p_nh", prob}, {"p_hn", prob}, {"p_hh", prob}}},
                       {"ramps", ramps}};
  s["regression"] = {{"params",
                      {{"a", prob},
                       {"b1", {{"min", -1.0}, {"max", 1.0}}},
                       {"b2", {{"min", -1.0}, {"max", 1.0}}}}},
                     {"ramps", ramps}};
  const json membership = {{"absent", {{"lo", "reading"}, {"hi", "reading"}}},
                           {"present", {{"lo", "reading"}, {"hi", "reading"}}},
                           {"uncertain1", {{"lo", "reading"}, {"hi", "reading"}}},
                           {"uncertain2", {{"lo", "reading"}, {"hi", "reading"}}},
                           {"constraint", "intervals ordered and pairwise non-overlapping"}};
  s["fuzzy"] = {{"temperature", membership},
                {"pressure", membership},
                {"rules", {{"antecedent", {"E1", "E2", "E1_AND_E2"}}, {"strength", prob}}}};
  const json anchors = {{"anchors", "five readings, strictly increasing"},
                        {"beliefs",
                         {{{"working", 0.999}, {"malfunction", 0.0}},
                          {{"working", 0.5}, {"malfunction", 0.0}},
                          {{"working", 0.0}, {"malfunction", 0.0}},
                          {{"working", 0.0}, {"malfunction", 0.5}},
                          {{"working", 0.0}, {"malfunction", 0.999}}}}};
  s["dempster_shafer"] = {{"temperature", anchors}, {"pressure", anchors}};
  return s;
}

}  // namespace uisbench
