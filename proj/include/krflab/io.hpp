#pragma once

// Artifact I/O shared by the CLI: tables as CSV or JSON, run manifests,
// binary field dumps with a JSON sidecar, and the flow run config (schema 1):
//
//   {"schema": 1, "n": 1, "N": 64, "g0": 1.0 | [[..]], "g0_im": [[..]],
//    "f": [{"k": [1, 0], "cos": 0.05, "sin": 0.0}], "phi0": [...same...],
//    "mode": "normalized", "dt": "cfl" | 1e-5, "t_end": 1.0,
//    "record_every": 10, "eps_pos": 1e-8, "output": "out/dir"}

#include "krflab/ansatz.hpp"
#include "krflab/ghmetric.hpp"
#include "krflab/maflow.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace krflab::io {

using json = nlohmann::json;
namespace fs = std::filesystem;

enum class Format { csv, json };

inline Format parse_format(const std::string& s) {
  if (s == "csv") return Format::csv;
  if (s == "json") return Format::json;
  throw std::invalid_argument("unknown format '" + s + "' (expected csv or json)");
}

inline const char* extension(Format f) { return f == Format::csv ? ".csv" : ".json"; }

/// Column-oriented table; cells are JSON numbers, strings or booleans.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;

  void add(std::vector<json> row) {
    if (row.size() != columns.size()) throw std::logic_error("table row has the wrong number of cells");
    rows.push_back(std::move(row));
  }
};

inline std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x == 0.0 ? 0.0 : x);  // no "-0"
  return buf;
}

inline std::string format_cell(const json& c) {
  if (c.is_number_float()) return format_number(c.get<double>());
  if (c.is_number()) return c.dump();
  if (c.is_boolean()) return c.get<bool>() ? "1" : "0";
  if (c.is_null()) return "";
  return c.get<std::string>();
}

inline std::string to_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + t.columns[i];
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + format_cell(row[i]);
    out += '\n';
  }
  return out;
}

/// {"schema": 1, "columns": [...], "rows": [{col: value, ...}, ...]}
inline json to_json(const Table& t) {
  json rows = json::array();
  for (const auto& row : t.rows) {
    json r = json::object();
    for (std::size_t i = 0; i < row.size(); ++i) r[t.columns[i]] = row[i];
    rows.push_back(std::move(r));
  }
  return {{"schema", 1}, {"columns", t.columns}, {"rows", std::move(rows)}};
}

inline void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

inline void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

inline json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

/// Writes `stem` + extension into `dir`; returns the path written.
inline fs::path write_table(const fs::path& dir, const std::string& stem, const Table& t, Format f) {
  fs::path p = dir / (stem + extension(f));
  if (f == Format::csv)
    write_text(p, to_csv(t));
  else
    write_json(p, to_json(t));
  return p;
}

// ---------------------------------------------------------------------------
// Manifest

struct Manifest {
  std::string command;
  std::string config;  // input config path, empty when the command takes none
  std::string output_dir;
  std::uint64_t seed = 0;
  json arguments = json::object();
};

inline std::string utc_timestamp() {
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

#ifndef KRFLAB_VERSION
#define KRFLAB_VERSION "0.0.0"
#endif

inline json to_json(const Manifest& m) {
  return {{"schema", 1},           {"command", m.command}, {"config", m.config},     {"output_dir", m.output_dir},
          {"seed", m.seed},        {"version", KRFLAB_VERSION}, {"timestamp", utc_timestamp()}, {"arguments", m.arguments}};
}

inline void write_manifest(const fs::path& dir, const Manifest& m) { write_json(dir / "manifest.json", to_json(m)); }

// ---------------------------------------------------------------------------
// Series

inline Table series_table(const maflow::DiagnosticsSeries& s) {
  Table t{{"t", "sup_phi", "sup_phidot", "min_eig", "inf_R", "sup_R", "sup_trace", "volume", "energy"}, {}};
  for (const auto& r : s.records)
    t.add({r.t, r.sup_phi, r.sup_phidot, r.min_eig, r.inf_R, r.sup_R, r.sup_trace, r.volume, r.energy});
  return t;
}

/// Trajectory table: t, the kind's coefficients, volume, fiber diameter, and
/// for normalized product-ec the Einstein residual and its bound.
inline Table trajectory_table(const ansatz::AnsatzTrajectory& tr) {
  Table t;
  t.columns = {"t"};
  for (const auto& c : ansatz::coefficient_names(tr.model.kind)) t.columns.push_back(c);
  t.columns.insert(t.columns.end(), {"volume", "fiber_diameter"});
  const bool ec = tr.model.kind == ansatz::Kind::ProductEC && tr.model.mode == FlowMode::normalized;
  if (ec) t.columns.insert(t.columns.end(), {"fiber_rescaled", "einstein_residual", "residual_bound"});
  std::vector<ansatz::CollapseRow> profile;
  if (ec) profile = ansatz::collapse_profile(tr);
  for (std::size_t i = 0; i < tr.samples.size(); ++i) {
    const auto& s = tr.samples[i];
    std::vector<json> row{s.t};
    for (double y : s.y) row.emplace_back(y);
    row.emplace_back(ansatz::volume(s.y));
    row.emplace_back(ansatz::fiber_diameter(s.y));
    if (ec) {
      row.emplace_back(profile[i].fiber_rescaled);
      row.emplace_back(profile[i].residual);
      row.emplace_back(profile[i].rate_bound);
    }
    t.add(std::move(row));
  }
  return t;
}

inline Table collapse_table(const gh::CollapseSeries& s) {
  Table t{{"t", "epsilon", "flag"}, {}};
  for (std::size_t k = 0; k < s.t.size(); ++k) t.add({s.t[k], s.epsilon[k], "upper_bound"});
  return t;
}

// ---------------------------------------------------------------------------
// Field dumps

struct FieldHeader {
  int n = 1;
  int N = 0;
  maflow::HermitianMatrix g0;
};

inline json g0_to_json(const maflow::HermitianMatrix& g0) {
  json re = json::array(), im = json::array();
  for (Eigen::Index i = 0; i < g0.rows(); ++i) {
    json rr = json::array(), ii = json::array();
    for (Eigen::Index j = 0; j < g0.cols(); ++j) {
      rr.push_back(g0(i, j).real());
      ii.push_back(g0(i, j).imag());
    }
    re.push_back(rr);
    im.push_back(ii);
  }
  return {{"re", re}, {"im", im}};
}

/// Row-major little-endian doubles in `stem`.bin, sidecar `stem`.json.
inline void write_field(const fs::path& dir, const std::string& stem, const FieldHeader& h, const std::vector<double>& values) {
  fs::create_directories(dir);
  std::ofstream out(dir / (stem + ".bin"), std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + (dir / (stem + ".bin")).string());
  out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
  write_json(dir / (stem + ".json"),
             {{"schema", 1}, {"n", h.n}, {"N", h.N}, {"g0", g0_to_json(h.g0)}, {"points", values.size()}, {"dtype", "float64"}});
}

inline std::vector<double> read_field(const fs::path& bin, std::size_t points) {
  std::ifstream in(bin, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot read " + bin.string());
  std::vector<double> v(points);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(points * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(points * sizeof(double)))
    throw std::invalid_argument(bin.string() + " is shorter than " + std::to_string(points) + " doubles");
  return v;
}

// ---------------------------------------------------------------------------
// Flow config

struct FlowConfig {
  int n = 1;
  int N = 64;
  maflow::HermitianMatrix g0;
  std::vector<maflow::FourierTerm> f;
  std::vector<maflow::FourierTerm> phi0;
  maflow::RunConfig run;
  std::string output;
};

inline std::vector<maflow::FourierTerm> terms_from_json(const json& j, int n, const char* what) {
  std::vector<maflow::FourierTerm> out;
  if (j.is_null()) return out;
  if (!j.is_array()) throw std::invalid_argument(std::string(what) + " must be a list of Fourier terms");
  for (const auto& t : j) {
    maflow::FourierTerm term;
    term.k = t.at("k").get<std::vector<int>>();
    if (static_cast<int>(term.k.size()) != 2 * n)
      throw std::invalid_argument(std::string(what) + ": wavevector must have " + std::to_string(2 * n) + " entries");
    term.cos_coef = t.value("cos", 0.0);
    term.sin_coef = t.value("sin", 0.0);
    out.push_back(std::move(term));
  }
  return out;
}

inline json terms_to_json(const std::vector<maflow::FourierTerm>& terms) {
  json out = json::array();
  for (const auto& t : terms) out.push_back({{"k", t.k}, {"cos", t.cos_coef}, {"sin", t.sin_coef}});
  return out;
}

inline maflow::HermitianMatrix g0_from_json(const json& re, const json& im, int n) {
  maflow::HermitianMatrix g = maflow::HermitianMatrix::Zero(n, n);
  if (re.is_number()) {
    if (!im.is_null()) throw std::invalid_argument("g0_im requires g0 as a matrix");
    for (int i = 0; i < n; ++i) g(i, i) = re.get<double>();
    return g;
  }
  auto rows = re.get<std::vector<std::vector<double>>>();
  if (static_cast<int>(rows.size()) != n) throw std::invalid_argument("g0 must be " + std::to_string(n) + " x " + std::to_string(n));
  std::vector<std::vector<double>> irows(n, std::vector<double>(n, 0.0));
  if (!im.is_null()) irows = im.get<std::vector<std::vector<double>>>();
  if (static_cast<int>(irows.size()) != n) throw std::invalid_argument("g0_im must match g0");
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(rows[i].size()) != n || static_cast<int>(irows[i].size()) != n)
      throw std::invalid_argument("g0 rows must have " + std::to_string(n) + " entries");
    for (int j = 0; j < n; ++j) g(i, j) = {rows[i][j], irows[i][j]};
  }
  return g;
}

inline FlowConfig flow_config_from_json(const json& j) {
  if (j.value("schema", 1) != 1) throw std::invalid_argument("unsupported flow config schema");
  FlowConfig c;
  try {
    c.n = j.at("n").get<int>();
    if (c.n != 1 && c.n != 2) throw std::invalid_argument("n must be 1 or 2");
    c.N = j.at("N").get<int>();
    c.g0 = g0_from_json(j.at("g0"), j.value("g0_im", json()), c.n);
    c.f = terms_from_json(j.value("f", json()), c.n, "f");
    c.phi0 = terms_from_json(j.value("phi0", json()), c.n, "phi0");
    c.run.mode = parse_mode(j.value("mode", std::string("unnormalized")));
    const json dt = j.value("dt", json("cfl"));
    if (dt.is_string()) {
      if (dt.get<std::string>() != "cfl") throw std::invalid_argument("dt must be \"cfl\" or a number");
    } else {
      c.run.dt = dt.get<double>();
    }
    c.run.t_end = j.at("t_end").get<double>();
    c.run.record_every = j.value("record_every", 10);
    c.run.eps_pos = j.value("eps_pos", 1e-8);
    c.run.convergence_tol = j.value("convergence_tol", 1e-10);
    c.run.tail_limit = j.value("tail_limit", 1e-6);
    c.output = j.value("output", std::string());
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("flow config: ") + e.what());
  }
  return c;
}

inline json to_json(const FlowConfig& c) {
  json j{{"schema", 1},
         {"n", c.n},
         {"N", c.N},
         {"f", terms_to_json(c.f)},
         {"phi0", terms_to_json(c.phi0)},
         {"mode", mode_name(c.run.mode)},
         {"t_end", c.run.t_end},
         {"record_every", c.run.record_every},
         {"eps_pos", c.run.eps_pos},
         {"convergence_tol", c.run.convergence_tol},
         {"tail_limit", c.run.tail_limit},
         {"output", c.output}};
  auto g = g0_to_json(c.g0);
  j["g0"] = g["re"];
  j["g0_im"] = g["im"];
  j["dt"] = c.run.dt ? json(*c.run.dt) : json("cfl");
  return j;
}

}  // namespace krflab::io
