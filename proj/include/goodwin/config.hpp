#pragma once

// Model definitions as JSON documents:
//
//   {
//     "b1": 0.1, "b2": 0.015, "b3": 0.023, "g1": 5, "g2": 0.01,
//     "f1": {"kind": "hill", "K": 20, "beta": 20, "n": 20},
//     "f2": {"kind": "hill", "K": 20, "beta": 10, "n": 20},   // or {"kind": "constant", "c": 0}
//     "rate_unit": "1/min",
//     "concentration_unit": "ng/ml",
//     "initial_state": {"R": 1, "L": 6, "T": 2},
//     "r_unit": "ng"                                           // unit of initial_state.R: "ng" or "pg"
//   }
//
// Units are recorded and echoed, never converted, except that an initial R
// declared in pg/ml is divided by 1000.

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "json.hpp"

#include "goodwin/errors.hpp"
#include "goodwin/model.hpp"

namespace goodwin {

using json = nlohmann::ordered_json;

struct ModelConfig {
  ModelInstance model;
  std::string rate_unit = "1/min";
  std::string concentration_unit = "ng/ml";
  std::optional<State> initial_state;  // as written in the document
  std::string r_unit = "ng";

  /// initial_state with R converted to the model's concentration unit.
  std::optional<State> initial_state_model_units() const {
    if (!initial_state) return std::nullopt;
    State s = *initial_state;
    if (r_unit == "pg") s.R *= 1e-3;
    return s;
  }
};

namespace detail {

inline double number_field(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ParseError(where + ": missing field '" + key + "'");
  const auto& v = j.at(key);
  if (!v.is_number()) throw ParseError(where + ": field '" + key + "' must be a number");
  return v.get<double>();
}

inline FeedbackSpec parse_feedback(const json& j, const std::string& where) {
  if (j.is_null()) return FeedbackSpec::zero();
  if (!j.is_object()) throw ParseError(where + " must be an object");
  const std::string kind = j.value("kind", "");
  try {
    if (kind == "hill") {
      return FeedbackSpec::hill(number_field(j, "K", where), number_field(j, "beta", where),
                                number_field(j, "n", where));
    }
    if (kind == "constant") return FeedbackSpec::constant(number_field(j, "c", where));
    if (kind == "zero" || kind == "none") return FeedbackSpec::zero();
  } catch (const DomainError& e) {
    throw ParseError(where + ": " + e.what());
  }
  if (kind == "custom") throw ParseError(where + ": custom feedbacks cannot be loaded from a document");
  throw ParseError(where + ": unknown feedback kind '" + kind + "'");
}

}  // namespace detail

inline json to_json(const FeedbackSpec& f) {
  switch (f.kind()) {
    case FeedbackKind::hill: {
      const auto& h = *f.hill_parameters();
      return json{{"kind", "hill"}, {"K", h.K}, {"beta", h.beta}, {"n", h.n}};
    }
    case FeedbackKind::constant: return json{{"kind", "constant"}, {"c", f.constant_value()}};
    case FeedbackKind::custom: return json{{"kind", "custom"}};
  }
  return json{};
}

inline json to_json(const State& s) { return json{{"R", s.R}, {"L", s.L}, {"T", s.T}}; }

inline json to_json(const ModelInstance& m) {
  const auto& p = m.params();
  return json{{"b1", p.b1}, {"b2", p.b2}, {"b3", p.b3}, {"g1", p.g1},
              {"g2", p.g2}, {"f1", to_json(m.f1())}, {"f2", to_json(m.f2())}};
}

inline json to_json(const ModelConfig& c) {
  json j = to_json(c.model);
  j["rate_unit"] = c.rate_unit;
  j["concentration_unit"] = c.concentration_unit;
  if (c.initial_state) j["initial_state"] = to_json(*c.initial_state);
  j["r_unit"] = c.r_unit;
  return j;
}

inline ModelConfig parse_model_config(const json& j) {
  if (!j.is_object()) throw ParseError("model config must be a JSON object");
  const std::string where = "model config";
  ModelParameters p{detail::number_field(j, "b1", where), detail::number_field(j, "b2", where),
                    detail::number_field(j, "b3", where), detail::number_field(j, "g1", where),
                    detail::number_field(j, "g2", where)};
  if (!j.contains("f1")) throw ParseError("model config: missing field 'f1'");
  FeedbackSpec f1 = detail::parse_feedback(j.at("f1"), "f1");
  FeedbackSpec f2 = j.contains("f2") ? detail::parse_feedback(j.at("f2"), "f2") : FeedbackSpec::zero();

  std::optional<ModelInstance> model;
  try {
    model.emplace(p, std::move(f1), std::move(f2));
  } catch (const DomainError& e) {
    throw ParseError(std::string("model config: ") + e.what());
  }
  ModelConfig cfg{*model};
  if (j.contains("rate_unit")) cfg.rate_unit = j.at("rate_unit").get<std::string>();
  if (j.contains("concentration_unit")) cfg.concentration_unit = j.at("concentration_unit").get<std::string>();
  if (j.contains("r_unit")) {
    cfg.r_unit = j.at("r_unit").get<std::string>();
    if (cfg.r_unit != "ng" && cfg.r_unit != "pg") throw ParseError("model config: r_unit must be 'ng' or 'pg'");
  }
  if (j.contains("initial_state")) {
    const auto& s = j.at("initial_state");
    if (!s.is_object()) throw ParseError("initial_state must be an object");
    cfg.initial_state = State{detail::number_field(s, "R", "initial_state"),
                              detail::number_field(s, "L", "initial_state"),
                              detail::number_field(s, "T", "initial_state")};
  }
  return cfg;
}

inline ModelConfig parse_model_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  try {
    return parse_model_config(j);
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid model config: ") + e.what());
  }
}

inline ModelConfig load_model_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model_config(ss.str());
}

}  // namespace goodwin
