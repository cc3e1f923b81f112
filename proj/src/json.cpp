#include "sla/json.hpp"

namespace sla {

nlohmann::json to_json(const SubtypeStep &s) {
  nlohmann::json j;
  j["rule"] = rule_name(s.rule);
  j["source"] = to_string(s.source);
  j["target"] = to_string(s.target);
  if (s.frame)
    j["frame"] = to_string(s.frame);
  if (s.reversed)
    j["reversed"] = true;
  if (!s.children.empty()) {
    j["children"] = nlohmann::json::array();
    for (auto &c : s.children)
      j["children"].push_back(to_json(c));
  }
  return j;
}

nlohmann::json to_json(const Derivation &d) {
  nlohmann::json j;
  j["rule"] = d.rule;
  nlohmann::json ctx = nlohmann::json::array();
  for (auto &[x, t] : d.ctx->entries())
    ctx.push_back(x);
  j["ctx"] = ctx;
  j["delta"] = nlohmann::json(std::vector<std::string>(d.delta.begin(), d.delta.end()));
  j["term"] = to_string(d.term);
  j["type"] = to_string(d.type);
  if (!d.side_conditions.empty())
    j["side"] = d.side_conditions;
  if (d.subtype)
    j["subtype"] = to_json(*d.subtype);
  j["children"] = nlohmann::json::array();
  for (auto &c : d.children)
    j["children"].push_back(to_json(c));
  return j;
}

nlohmann::json to_json(const Env &env) {
  nlohmann::json j = nlohmann::json::object();
  for (auto &[k, v] : env)
    j[k] = v;
  return j;
}

} // namespace sla
