#pragma once

// JSON schema (version 1) for manifold models. Rationals are "p/q" strings.
//
//   {"schema": 1, "name": ..., "n": 2, "basis": ["a", "b"],
//    "tensor": [{"idx": [0, 1], "value": "1"}, ...],
//    "c1twopi": ["3", "-1"],
//    "cone": [{"label": ..., "degree": 1, "coeffs": [...]},
//             {"label": ..., "degree": 2, "entries": [{"idx": [...], "value": ...}]}],
//    "catalogue": [{"label": "E", "dim": 1, "coeffs": [...]}],
//    "kodaira": 1 | "-inf", "notes": ...}
//
// A catalogue file is {"schema": 1, "models": [model, ...]}.

#include "krflab/cohomology.hpp"

#include <json.hpp>

#include <fstream>
#include <string>
#include <vector>

namespace krflab::cohomology {

using json = nlohmann::json;

namespace detail {

inline json rationals_to_json(const std::vector<Rational>& v) {
  json out = json::array();
  for (const auto& x : v) out.push_back(to_string(x));
  return out;
}

inline Rational rational_from_json(const json& j) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(j.get<long long>());
  throw std::invalid_argument("rationals must be integers or \"p/q\" strings, got " + j.dump());
}

inline std::vector<Rational> rationals_from_json(const json& j) {
  std::vector<Rational> out;
  for (const auto& x : j) out.push_back(rational_from_json(x));
  return out;
}

inline json form_to_json(const SymmetricForm& f, json base) {
  base["degree"] = f.degree();
  if (f.degree() == 1) {
    base["coeffs"] = rationals_to_json(f.raw());
  } else {
    json entries = json::array();
    for (const auto& [idx, value] : f.canonical_entries()) entries.push_back({{"idx", idx}, {"value", to_string(value)}});
    base["entries"] = entries;
  }
  return base;
}

inline SymmetricForm form_from_json(const json& j, int degree, std::size_t dim) {
  if (j.contains("coeffs")) {
    if (degree != 1) throw std::invalid_argument("'coeffs' only valid for degree-1 forms");
    auto c = rationals_from_json(j.at("coeffs"));
    if (c.size() != dim) throw std::invalid_argument("coefficient list has wrong length");
    return SymmetricForm::linear(std::move(c));
  }
  SymmetricForm f(degree, dim);
  for (const auto& e : j.at("entries")) f.set(e.at("idx").get<std::vector<std::size_t>>(), rational_from_json(e.at("value")));
  return f;
}

}  // namespace detail

inline json to_json(const ManifoldModel& m) {
  json j;
  j["schema"] = 1;
  j["name"] = m.name;
  j["n"] = m.n;
  j["basis"] = m.basis;
  json tensor = json::array();
  for (const auto& [idx, value] : m.tensor.canonical_entries()) tensor.push_back({{"idx", idx}, {"value", to_string(value)}});
  j["tensor"] = tensor;
  j["c1twopi"] = detail::rationals_to_json(m.c1twopi.coords());
  json cone = json::array();
  for (const auto& c : m.cone.constraints) cone.push_back(detail::form_to_json(c.form, {{"label", c.label}}));
  j["cone"] = cone;
  json cat = json::array();
  for (const auto& v : m.catalogue) {
    json e = detail::form_to_json(v.restriction, {{"label", v.label}, {"dim", v.dim}});
    e.erase("degree");
    cat.push_back(e);
  }
  j["catalogue"] = cat;
  if (m.kodaira)
    j["kodaira"] = *m.kodaira;
  else
    j["kodaira"] = "-inf";
  j["notes"] = m.notes;
  return j;
}

inline ManifoldModel model_from_json(const json& j) {
  if (j.value("schema", 1) != 1) throw std::invalid_argument("unsupported model schema version");
  ManifoldModel m;
  m.name = j.at("name").get<std::string>();
  m.n = j.at("n").get<int>();
  m.basis = j.at("basis").get<std::vector<std::string>>();
  const std::size_t dim = m.basis.size();
  m.tensor = SymmetricForm(m.n, dim);
  for (const auto& e : j.at("tensor"))
    m.tensor.set(e.at("idx").get<std::vector<std::size_t>>(), detail::rational_from_json(e.at("value")));
  m.c1twopi = ClassVector(detail::rationals_from_json(j.at("c1twopi")));
  for (const auto& c : j.at("cone"))
    m.cone.constraints.push_back({c.at("label").get<std::string>(), detail::form_from_json(c, c.at("degree").get<int>(), dim)});
  if (j.contains("catalogue")) {
    for (const auto& v : j.at("catalogue")) {
      int k = v.at("dim").get<int>();
      m.catalogue.push_back({v.at("label").get<std::string>(), k, detail::form_from_json(v, k, dim)});
    }
  }
  const auto& kod = j.at("kodaira");
  if (kod.is_string()) {
    if (kod.get<std::string>() != "-inf") throw std::invalid_argument("kodaira must be an integer or \"-inf\"");
    m.kodaira = std::nullopt;
  } else {
    m.kodaira = kod.get<int>();
  }
  m.notes = j.value("notes", "");
  validate(m);
  return m;
}

inline json catalogue_to_json(const std::vector<ManifoldModel>& models) {
  json arr = json::array();
  for (const auto& m : models) arr.push_back(to_json(m));
  return {{"schema", 1}, {"models", arr}};
}

/// Accepts a catalogue document or a single model document.
inline std::vector<ManifoldModel> catalogue_from_json(const json& j) {
  std::vector<ManifoldModel> out;
  if (j.contains("models")) {
    for (const auto& m : j.at("models")) out.push_back(model_from_json(m));
  } else {
    out.push_back(model_from_json(j));
  }
  return out;
}

inline std::vector<ManifoldModel> load_catalogue(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open model file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("model file '" + path + "': " + e.what());
  }
  return catalogue_from_json(j);
}

}  // namespace krflab::cohomology
