// krflab: command-line front end for the Kähler-Ricci flow laboratory.
//
// Exit codes: 0 success, 2 usage error, 3 domain error, 4 verification failure.

#include "krflab/ansatz.hpp"
#include "krflab/cohomology.hpp"
#include "krflab/estimates.hpp"
#include "krflab/ghmetric.hpp"
#include "krflab/io.hpp"
#include "krflab/maflow.hpp"
#include "krflab/model_io.hpp"
#include "krflab/models.hpp"
#include "krflab/verify/criteria.hpp"
#include "krflab/verify/oracles.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace krflab;
using json = nlohmann::json;
namespace fs = std::filesystem;

constexpr int kUsage = 2;
constexpr int kDomain = 3;
constexpr int kVerify = 4;

class VerificationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::string output_dir;
  std::string format = "csv";
  std::uint64_t seed = 1;
};

fs::path output_dir(const Globals& g, const std::string& fallback) {
  if (!g.output_dir.empty()) return g.output_dir;
  return fallback.empty() ? fs::path("krflab-out") : fs::path(fallback);
}

void write_manifest(const Globals& g, const fs::path& dir, const std::string& command, const std::string& config,
                    json arguments) {
  io::Manifest m{command, config, dir.string(), g.seed, std::move(arguments)};
  io::write_manifest(dir, m);
}

// ---------------------------------------------------------------------------
// models / maxtime

std::vector<cohomology::ManifoldModel> catalogue(const std::string& models_file) {
  return models_file.empty() ? cohomology::builtin_catalogue() : cohomology::load_catalogue(models_file);
}

cohomology::ManifoldModel find_model(const std::string& name, const std::string& models_file) {
  if (!models_file.empty()) {
    for (auto& m : cohomology::load_catalogue(models_file))
      if (m.name == name) return m;
  }
  return cohomology::builtin_model(name);
}

std::string format_number(double x) { return io::format_number(x); }

std::string kodaira_str(const std::optional<int>& k) { return k ? std::to_string(*k) : "-inf"; }

void print_model(const cohomology::ManifoldModel& m) {
  std::cout << m.name << "  (n = " << m.n << ", kappa = " << kodaira_str(m.kodaira) << ")\n";
  std::cout << "  basis:   ";
  for (std::size_t i = 0; i < m.basis.size(); ++i) std::cout << (i ? ", " : "") << m.basis[i];
  std::cout << "\n  2pi c1:  " << m.c1twopi.str() << "\n  cone:    ";
  for (std::size_t i = 0; i < m.cone.constraints.size(); ++i)
    std::cout << (i ? ", " : "") << m.cone.constraints[i].label;
  std::cout << "\n";
  if (!m.catalogue.empty()) {
    std::cout << "  subvarieties: ";
    for (std::size_t i = 0; i < m.catalogue.size(); ++i) std::cout << (i ? ", " : "") << m.catalogue[i].label;
    std::cout << "\n";
  }
  if (!m.notes.empty()) std::cout << "  notes:   " << m.notes << "\n";
}

int cmd_models(const Globals& g, bool as_json, const std::string& name, const std::string& models_file) {
  std::vector<cohomology::ManifoldModel> models;
  if (name.empty())
    models = catalogue(models_file);
  else
    models.push_back(find_model(name, models_file));
  if (as_json) {
    std::cout << cohomology::catalogue_to_json(models).dump(2) << "\n";
  } else {
    for (const auto& m : models) print_model(m);
  }
  if (!g.output_dir.empty()) {
    fs::path dir = g.output_dir;
    io::write_json(dir / "models.json", cohomology::catalogue_to_json(models));
    write_manifest(g, dir, "models", models_file, {{"name", name}});
  }
  return 0;
}

int cmd_maxtime(const Globals& g, const std::string& name, const std::string& cls, const std::string& models_file) {
  const auto m = find_model(name, models_file);
  cohomology::ClassVector a(parse_rational_list(cls));
  if (a.size() != m.dim())
    throw std::invalid_argument("class has " + std::to_string(a.size()) + " coordinates; " + m.name + " needs " +
                                std::to_string(m.dim()));
  auto T = cohomology::max_existence_time(m, a);
  json report{{"schema", 1}, {"model", m.name}, {"class", json::array()}};
  for (const auto& c : a.coords()) report["class"].push_back(to_string(c));

  std::cout << "model:          " << m.name << "\n";
  std::cout << "initial class:  " << a.str() << "\n";
  if (T.infinite) {
    auto regime = cohomology::long_time_regime(m);
    std::cout << "T = infinity\n";
    std::cout << "regime:         " << cohomology::regime_name(regime.regime) << " (kappa = " << kodaira_str(regime.kodaira)
              << ")\n";
    report["T"] = "infinity";
    report["regime"] = cohomology::regime_name(regime.regime);
  } else {
    if (T.exact()) {
      std::cout << "T = " << to_string(T.value()) << "  (exact)\n";
      report["T"] = to_string(T.value());
    } else {
      std::cout << "T ~ " << format_number(to_double(T.value())) << "  (approximate, isolated in [" << to_string(T.time.lo)
                << ", " << to_string(T.time.hi) << "])\n";
      report["T"] = to_string(T.value());
      report["T_interval"] = {to_string(T.time.lo), to_string(T.time.hi)};
    }
    report["exact"] = T.exact();
    std::cout << "binding:        ";
    for (std::size_t i = 0; i < T.binding.size(); ++i) std::cout << (i ? ", " : "") << T.binding[i];
    std::cout << "\n";
    auto lim = cohomology::limiting_class(m, a);
    auto vol = cohomology::volume(m, lim);
    bool noncollapsed = vol > 0;
    std::cout << "limiting class: " << lim.str() << "\n";
    std::cout << "volume at T:    " << to_string(vol) << "\n";
    std::cout << "singularity:    " << (noncollapsed ? "noncollapsed" : "collapsed") << "\n";
    report["limiting_class"] = json::array();
    for (const auto& c : lim.coords()) report["limiting_class"].push_back(to_string(c));
    report["volume"] = to_string(vol);
    report["noncollapsed"] = noncollapsed;
    auto nl = cohomology::null_locus(m, lim);
    std::cout << "null locus:     ";
    if (nl.whole_space) {
      std::cout << "X";
    } else if (nl.labels.empty()) {
      std::cout << "(empty)";
    } else {
      for (std::size_t i = 0; i < nl.labels.size(); ++i) std::cout << (i ? ", " : "") << nl.labels[i];
    }
    std::cout << "  (relative to the model's subvariety catalogue)\n";
    report["null_locus"] = nl.whole_space ? json(std::vector<std::string>{"X"}) : json(nl.labels);
    std::cout << "regime:         finite-time singularity\n";
    report["regime"] = "finite-time singularity";
  }
  if (!g.output_dir.empty()) {
    fs::path dir = g.output_dir;
    io::write_json(dir / "maxtime.json", report);
    write_manifest(g, dir, "maxtime", models_file, {{"model", name}, {"class", cls}});
  }
  return 0;
}

// ---------------------------------------------------------------------------
// flow

std::string short_num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

int cmd_flow(const Globals& g, const std::string& config_path) {
  const auto cfg = io::flow_config_from_json(io::read_json(config_path));
  maflow::TorusBackground bg(cfg.n, cfg.N, cfg.g0, cfg.f);
  const bool unnormalized = cfg.run.mode == FlowMode::unnormalized;

  if (unnormalized && std::abs(bg.mean_f()) > 1e-12) {
    std::cout << "warning: mean(f) = " << short_num(bg.mean_f()) << " != 0: the volume of Omega is "
              << short_num(bg.omega_volume_ratio()) << " times the volume of omega0, so omega^n cannot approach Omega;"
              << " volumes drift and phi moves linearly with slope about " << short_num(-std::log(bg.omega_volume_ratio()))
              << "\n";
  } else if (unnormalized && bg.twisted()) {
    std::cout << "note: mean(f) = 0 but mean(e^f) = " << short_num(bg.omega_volume_ratio()) << "; phi drifts at rate "
              << short_num(-std::log(bg.omega_volume_ratio())) << "\n";
  }

  maflow::FlowState initial(bg, maflow::synthesize(bg.grid(), cfg.phi0), cfg.run.mode, 0.0, cfg.run.eps_pos);
  auto res = maflow::run(bg, initial, cfg.run);
  const auto& recs = res.series.records;

  const fs::path dir = output_dir(g, cfg.output);
  const auto fmt = io::parse_format(g.format);
  io::write_table(dir, "series", io::series_table(res.series), fmt);
  io::write_field(dir, "phi", {cfg.n, cfg.N, cfg.g0}, res.final_state.phi());
  write_manifest(g, dir, "flow", config_path, io::to_json(cfg));

  std::cout << "run: n = " << cfg.n << ", N = " << cfg.N << ", mode = " << mode_name(cfg.run.mode) << ", " << res.steps
            << " steps to t = " << short_num(res.final_state.t()) << "\n";
  const auto report = estimates::estimate_report(res.series, {1e-4, cfg.run.eps_pos});
  for (const auto& v : report.verdicts)
    std::cout << "  " << (v.applicable ? (v.pass ? "PASS" : "FAIL") : "n/a ") << "  " << v.name << ": " << v.detail << "\n";

  if (!unnormalized) {
    std::cout << "convergence: " << (res.converged ? "converged" : "not converged") << ", sup|phidot| = "
              << short_num(recs.back().sup_phidot);
    if (report.mu) std::cout << ", fitted rate mu = " << short_num(*report.mu) << " (C = " << short_num(*report.c_fit) << ")";
    if (cfg.n == 1) {
      // Linearized oracle on a coarse dense grid; only the lowest modes matter.
      const int Nc = std::min(cfg.N, 16);
      const double g0 = cfg.g0(0, 0).real();
      oracles::DenseCalculus calc(1, Nc);
      auto phi_inf = oracles::solve_stationary(calc, g0, calc.sample(cfg.f)).phi;
      auto spec = oracles::linearized_spectrum(calc, g0, phi_inf, calc.sample(cfg.phi0));
      std::cout << ", linearized rate = " << short_num(spec.slowest_excited);
    }
    std::cout << "\n";
  } else if (!bg.twisted() && recs.size() >= 4) {
    std::vector<double> t, e;
    for (std::size_t i = recs.size() / 2; i < recs.size(); ++i)
      if (recs[i].energy > 1e-13) {
        t.push_back(recs[i].t);
        e.push_back(recs[i].energy);
      }
    std::cout << "energy: " << short_num(recs.front().energy) << " -> " << short_num(recs.back().energy);
    if (t.size() >= 2) std::cout << ", late decay rate = " << short_num(estimates::fit_exponential(t, e).first);
    std::cout << ", slowest heat rate = " << short_num(oracles::heat_rate(cfg.g0, cfg.N)) << "\n";
  }
  std::cout << "wrote " << dir.string() << "\n";
  if (!report.all_pass()) throw VerificationFailure("estimate verdicts failed");
  return 0;
}

// ---------------------------------------------------------------------------
// ansatz

int cmd_ansatz(const Globals& g, const std::string& kind, const std::string& scales, const std::string& mode, double t_end,
               double dt, int record_every) {
  ansatz::AnsatzModel m{ansatz::parse_kind(kind), parse_rational_list(scales), parse_mode(mode)};
  ansatz::validate(m);
  auto tr = ansatz::integrate(m, t_end, dt, record_every);
  const fs::path dir = output_dir(g, "");
  io::write_table(dir, "trajectory", io::trajectory_table(tr), io::parse_format(g.format));
  write_manifest(g, dir, "ansatz", "",
                 {{"kind", kind}, {"scales", scales}, {"mode", mode}, {"t_end", t_end}, {"dt", dt}, {"record_every", record_every}});

  std::cout << "ansatz " << ansatz::kind_name(m.kind) << " " << mode_name(m.mode) << ", scales " << scales << "\n";
  std::optional<Rational> exact_T;
  if (m.mode == FlowMode::unnormalized) exact_T = ansatz::exact_extinction_time(m);
  if (exact_T)
    std::cout << "extinction time (exact): " << to_string(*exact_T) << "\n";
  else if (auto Td = ansatz::extinction_time(m))
    std::cout << "extinction time: " << short_num(*Td) << "\n";
  else
    std::cout << "extinction time: infinity\n";
  if (tr.extinction) std::cout << "extinction (RK4 + bisection): " << format_number(*tr.extinction) << "\n";
  std::cout << "max |RK4 - closed form| = " << short_num(tr.max_closed_form_error) << "\n";
  if (m.kind == ansatz::Kind::ProductEC && m.mode == FlowMode::normalized) {
    std::cout << "Einstein residual |b - 2| vs |lC - 2| e^(-t/8):\n";
    auto prof = ansatz::collapse_profile(tr);
    const std::size_t stride = std::max<std::size_t>(1, prof.size() / 10);
    for (std::size_t i = 0; i < prof.size(); i += stride)
      std::cout << "  t = " << short_num(prof[i].t) << "  residual " << short_num(prof[i].residual) << "  bound "
                << short_num(prof[i].rate_bound) << "  e^t a = " << short_num(prof[i].fiber_rescaled) << "\n";
  }
  std::cout << "wrote " << dir.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// gh

int cmd_gh_collapse(const Globals& g, int nb, int nf, double t_max, double t_step) {
  if (!(t_step > 0) || !(t_max >= 0)) throw std::invalid_argument("need t-step > 0 and t-max >= 0");
  std::vector<double> ts;
  for (int k = 0; k * t_step <= t_max + 1e-12; ++k) ts.push_back(k * t_step);
  auto s = gh::collapse_series(ts, nb, nf);
  const fs::path dir = output_dir(g, "");
  io::write_table(dir, "collapse", io::collapse_table(s), io::parse_format(g.format));
  write_manifest(g, dir, "gh collapse", "", {{"nb", nb}, {"nf", nf}, {"t_max", t_max}, {"t_step", t_step}});
  bool monotone = true;
  for (std::size_t k = 1; k < s.epsilon.size(); ++k) monotone = monotone && s.epsilon[k] <= s.epsilon[k - 1] + 1e-9;
  std::cout << "warped torus " << nb << " x " << nf << ": eps(0) = " << short_num(s.epsilon.front()) << ", eps("
            << short_num(ts.back()) << ") = " << short_num(s.epsilon.back()) << ", " << (monotone ? "nonincreasing" : "NOT monotone")
            << "\nfloor = " << short_num(s.floor) << ", c1 = " << short_num(s.c1) << ", c2 = " << short_num(s.c2)
            << " (upper bounds on the GH distance to the base circle)\nwrote " << dir.string() << "\n";
  return 0;
}

int cmd_gh_distance(const Globals& g, const std::string& x_path, const std::string& y_path, int restarts, int exhaustive) {
  auto X = gh::space_from_json(io::read_json(x_path));
  auto Y = gh::space_from_json(io::read_json(y_path));
  gh::SearchOptions opt;
  opt.restarts = restarts;
  opt.exhaustive_limit = static_cast<std::size_t>(exhaustive);
  opt.seed = g.seed;
  auto b = gh::gh_upper_bound(X, Y, opt);
  json out{{"schema", 1}, {"epsilon", b.epsilon}, {"exact", b.exact}, {"F", b.maps.F}, {"G", b.maps.G}};
  std::cout << "epsilon = " << format_number(b.epsilon) << (b.exact ? "  (exact optimum over map pairs)" : "  (upper bound only)")
            << "\n";
  if (!g.output_dir.empty()) {
    fs::path dir = g.output_dir;
    io::write_json(dir / "distance.json", out);
    write_manifest(g, dir, "gh distance", x_path + "," + y_path, {{"restarts", restarts}, {"exhaustive_limit", exhaustive}});
  }
  return 0;
}

int cmd_gh_sample(const Globals& g, double t, int nb, int nf) {
  auto X = gh::sample_warped_torus(t, nb, nf);
  const fs::path dir = output_dir(g, "");
  io::write_json(dir / "space.json", gh::to_json(X));
  write_manifest(g, dir, "gh sample", "", {{"t", t}, {"nb", nb}, {"nf", nf}});
  std::cout << "warped torus t = " << short_num(t) << ", " << X.size() << " points, diameter " << short_num(X.diameter())
            << "\nwrote " << (dir / "space.json").string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// verify

int cmd_verify(const Globals& g, int grid, const std::string& models_file) {
  verify::VerifyOptions opt;
  opt.seed = g.seed;
  if (grid > 0) {
    if (grid < 8 || grid % 2) throw std::invalid_argument("--grid must be even and at least 8");
    opt.grid = grid;
    opt.grid_2d = std::min(opt.grid_2d, grid);
  }
  if (!models_file.empty()) opt.models = cohomology::load_catalogue(models_file);

  io::Table table{{"criterion", "name", "expected", "got", "tolerance", "pass", "seconds"}, {}};
  int failed = 0;
  for (const auto& c : verify::all_criteria()) {
    auto r = c(opt);
    if (!r.pass) ++failed;
    std::printf("%-4s %d  %-44s %s\n      expected: %s\n      tolerance: %s   (%.2f s)\n", r.pass ? "PASS" : "FAIL", r.id,
                r.name.c_str(), r.got.c_str(), r.expected.c_str(), r.tolerance.c_str(), r.seconds);
    std::fflush(stdout);
    table.add({r.id, r.name, r.expected, r.got, r.tolerance, r.pass, r.seconds});
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(table.rows.size()) - failed, table.rows.size());
  if (!g.output_dir.empty()) {
    fs::path dir = g.output_dir;
    io::write_table(dir, "verify", table, io::parse_format(g.format));
    write_manifest(g, dir, "verify", models_file, {{"grid", opt.grid}, {"grid_2d", opt.grid_2d}});
  }
  if (failed) throw VerificationFailure(std::to_string(failed) + " criteria failed");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"krflab: Kähler-Ricci flow laboratory"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--output-dir", g.output_dir, "Directory for artifacts and manifest.json");
  app.add_option("--format", g.format, "Table format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--seed", g.seed, "Seed for randomized searches and samplers");

  std::function<int()> action;

  auto* models = app.add_subcommand("models", "List the manifold model catalogue");
  bool as_json = false;
  std::string model_name, models_file;
  models->add_flag("--json", as_json, "Print the catalogue as JSON (model schema 1)");
  models->add_option("--name", model_name, "Show one model");
  models->add_option("--models", models_file, "Model catalogue file instead of the built-ins")->check(CLI::ExistingFile);
  models->callback([&] { action = [&] { return cmd_models(g, as_json, model_name, models_file); }; });

  auto* maxtime = app.add_subcommand("maxtime", "Maximal existence time, limiting class and null locus");
  std::string cls;
  maxtime->add_option("model", model_name, "Model name, e.g. blowup-p2, torus:1, riemann-surface:0")->required();
  maxtime->add_option("class", cls, "Initial class as comma-separated rationals, e.g. 4,-1")->required();
  maxtime->add_option("--models", models_file, "Model catalogue file")->check(CLI::ExistingFile);
  maxtime->callback([&] { action = [&] { return cmd_maxtime(g, model_name, cls, models_file); }; });

  auto* flow = app.add_subcommand("flow", "Run the torus Monge-Ampère flow from a JSON config");
  std::string config;
  flow->add_option("config", config, "Flow config (schema 1)")->required()->check(CLI::ExistingFile);
  flow->callback([&] { action = [&] { return cmd_flow(g, config); }; });

  auto* ans = app.add_subcommand("ansatz", "Integrate a homogeneous ansatz model");
  std::string kind, scales, mode = "unnormalized";
  double t_end = 1.0, dt = 1e-3;
  int record_every = 10;
  ans->add_option("kind", kind, "round-p1, p1xp1 or product-ec")->required();
  ans->add_option("scales", scales, "Initial scales as comma-separated rationals")->required();
  ans->add_option("--mode", mode, "unnormalized or normalized")->check(CLI::IsMember({"unnormalized", "normalized"}));
  ans->add_option("--t-end", t_end, "Final time");
  ans->add_option("--dt", dt, "RK4 step");
  ans->add_option("--record-every", record_every, "Steps between samples");
  ans->callback([&] { action = [&] { return cmd_ansatz(g, kind, scales, mode, t_end, dt, record_every); }; });

  auto* ghc = app.add_subcommand("gh", "Gromov-Hausdorff experiments");
  ghc->require_subcommand(1);
  int nb = 8, nf = 8, restarts = 64, exhaustive = 36;
  double t_max = 10.0, t_step = 0.25, t = 0.0;
  auto* collapse = ghc->add_subcommand("collapse", "Epsilon series of a collapsing warped torus");
  collapse->add_option("--nb", nb, "Base samples")->check(CLI::PositiveNumber);
  collapse->add_option("--nf", nf, "Fiber samples")->check(CLI::PositiveNumber);
  collapse->add_option("--t-max", t_max, "Last time");
  collapse->add_option("--t-step", t_step, "Time spacing");
  collapse->callback([&] { action = [&] { return cmd_gh_collapse(g, nb, nf, t_max, t_step); }; });
  auto* distance = ghc->add_subcommand("distance", "Upper bound on the GH distance between two metric spaces");
  std::string x_path, y_path;
  distance->add_option("X", x_path, "Metric space JSON")->required()->check(CLI::ExistingFile);
  distance->add_option("Y", y_path, "Metric space JSON")->required()->check(CLI::ExistingFile);
  distance->add_option("--restarts", restarts, "Heuristic restarts");
  distance->add_option("--exhaustive-limit", exhaustive, "Largest N_X*N_Y searched exactly");
  distance->callback([&] { action = [&] { return cmd_gh_distance(g, x_path, y_path, restarts, exhaustive); }; });
  auto* sample = ghc->add_subcommand("sample", "Write a warped torus sample as a metric space");
  sample->add_option("--t", t, "Collapse time");
  sample->add_option("--nb", nb, "Base samples")->check(CLI::PositiveNumber);
  sample->add_option("--nf", nf, "Fiber samples")->check(CLI::PositiveNumber);
  sample->callback([&] { action = [&] { return cmd_gh_sample(g, t, nb, nf); }; });

  auto* ver = app.add_subcommand("verify", "Run the acceptance suite");
  int grid = 0;
  ver->add_option("--grid", grid, "Resolution of the flow criteria (default 64)");
  ver->add_option("--models", models_file, "Model catalogue overriding built-ins by name")->check(CLI::ExistingFile);
  ver->callback([&] { action = [&] { return cmd_verify(g, grid, models_file); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kUsage;
  }
  try {
    return action();
  } catch (const VerificationFailure& e) {
    std::cerr << "verification failure: " << e.what() << "\n";
    return kVerify;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kDomain;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
