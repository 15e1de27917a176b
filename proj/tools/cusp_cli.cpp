#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cusp/cycles.hpp"
#include "cusp/geometry.hpp"
#include "cusp/integrate.hpp"
#include "cusp/io.hpp"
#include "cusp/sao.hpp"

using namespace cusp;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "cusp 1.0.0";

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flags bound to typed storage; only flags given on the command line
// override the resolved configuration.
class Flags {
 public:
  template <class T>
  void add(CLI::App* app, const std::string& key, const std::string& help) {
    auto store = std::make_shared<T>();
    CLI::Option* opt = app->add_option("--" + key, *store, help);
    entries_.push_back({app, opt, [store] { return json(*store); }, key});
  }
  void apply(const CLI::App* active, json& cfg) const {
    for (const auto& e : entries_)
      if (e.app == active && e.opt->count() > 0) cfg[e.key] = e.get();
  }

 private:
  struct Entry {
    CLI::App* app;
    CLI::Option* opt;
    std::function<json()> get;
    std::string key;
  };
  std::vector<Entry> entries_;
};

template <class T>
T need(const json& cfg, const std::string& key, T fallback) {
  try {
    return cfg.contains(key) ? cfg.at(key).get<T>() : fallback;
  } catch (const json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

Params resolve_params(const json& cfg) {
  Params p;
  p.g = need(cfg, "g", -1.0);
  p.eps = need(cfg, "eps", 0.01);
  if (cfg.contains("c") && cfg.contains("c2")) throw ConfigError("give either c or c2, not both");
  if (cfg.contains("c2")) {
    p = Params::saddle_node(p.g, need(cfg, "c2", 0.0), p.eps);
  } else {
    p.c = need(cfg, "c", 1.24);
  }
  if (!(p.eps >= 0.0)) throw ConfigError("eps must be non-negative");
  return p;
}

std::vector<double> make_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(lo <= hi)) throw ConfigError("grid must be non-empty and sorted");
  std::vector<double> g;
  const long n = std::lround(std::floor((hi - lo) / step + 1e-9));
  for (long i = 0; i <= n; ++i) g.push_back(lo + step * i);
  return g;
}

std::vector<double> make_linspace(double lo, double hi, int n) {
  if (n < 1 || !(lo <= hi)) throw ConfigError("grid must be non-empty and sorted");
  std::vector<double> g;
  for (int i = 0; i < n; ++i) g.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
  return g;
}

std::string num(double v) { return format_cell(Cell{v}); }

class Emitter {
 public:
  Emitter(const json& cfg, const std::string& sub, const Params* p = nullptr) : cfg_(cfg) {
    dir_ = need<std::string>(cfg, "out", ".");
    format_ = need<std::string>(cfg, "format", "csv");
    if (format_ != "csv" && format_ != "json" && format_ != "both")
      throw ConfigError("format must be csv, json or both");
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw ConfigError("cannot create output directory " + dir_);
    prov_ = {{"tool", kVersion}, {"command", sub}, {"config", cfg.dump()}};
    if (p) {
      prov_.push_back({"g", num(p->g)});
      prov_.push_back({"c", num(p->c)});
      prov_.push_back({"eps", num(p->eps)});
      if (p->c2) prov_.push_back({"c2", num(*p->c2)});
      prov_.push_back({"v_s", num(p->vs())});
    }
  }
  void emit(const std::string& stem, const Table& t, Provenance extra = {}) const {
    Provenance prov = prov_;
    prov.insert(prov.end(), extra.begin(), extra.end());
    if (format_ != "json") {
      std::ofstream f(dir_ + "/" + stem + ".csv");
      if (!f) throw ConfigError("cannot write " + stem + ".csv");
      write_csv(f, t, prov);
    }
    if (format_ != "csv") {
      std::ofstream f(dir_ + "/" + stem + ".json");
      if (!f) throw ConfigError("cannot write " + stem + ".json");
      f << to_json(t, prov).dump(1) << '\n';
    }
  }

 private:
  json cfg_;
  std::string dir_, format_;
  Provenance prov_;
};

PassageSpec passage_spec(const json& cfg, const Params& p) {
  PassageSpec s;
  s.p = p;
  s.u0 = need(cfg, "u0", s.u0);
  s.y0 = need(cfg, "y0", s.y0);
  s.delta = need(cfg, "delta", s.delta);
  s.z_guard = need(cfg, "z-guard", s.z_guard);
  s.u_leave = need(cfg, "u-leave", s.u_leave);
  s.rtol = need(cfg, "rtol", s.rtol);
  s.atol = need(cfg, "atol", s.atol);
  s.horizon = need(cfg, "horizon", 0.0);
  return s;
}

std::vector<Cell> sao_row(double key, double eps, const SaoReport& r, const std::string& error) {
  std::string flags = r.flags;
  if (!error.empty()) flags += (flags.empty() ? "" : ";") + std::string("error: ") + error;
  return {key,
          eps,
          static_cast<long long>(r.predicted),
          static_cast<long long>(r.zeros),
          static_cast<long long>(r.rotations),
          r.u_exit,
          r.z_exit,
          r.last_amplitude,
          std::string(error.empty() ? to_string(r.verdict) : "error"),
          flags};
}

const std::vector<std::string> kSaoColumns{"c",      "eps",    "predicted",      "zeros",
                                           "rotations", "u_exit", "z_exit", "last_amplitude",
                                           "verdict", "flags"};

int cmd_simulate(const json& cfg) {
  const Params p = resolve_params(cfg);
  const Emitter out(cfg, "simulate", &p);
  StateFull s0;
  if (cfg.contains("v1") || cfg.contains("v2") || cfg.contains("w1") || cfg.contains("w2")) {
    s0 = {need(cfg, "v1", 0.0), need(cfg, "v2", 0.0), need(cfg, "w1", 0.0), need(cfg, "w2", 0.0)};
  } else {
    s0 = seed_on_attracting_sheet(passage_spec(cfg, p));
  }
  IntegratorConfig ic;
  ic.rtol = need(cfg, "rtol", 1e-9);
  ic.atol = need(cfg, "atol", 1e-12);
  ic.t_max = need(cfg, "horizon", 400.0);
  EventSpec<4> zero{[](double, const Vec4& s) { return s[0] - s[1]; }, Crossing::any, {}, false, 0};
  const auto tr = integrate<4>([&](double, const Vec4& s) { return rhs_full(StateFull::of(s), p).arr(); },
                               0.0, s0.arr(), ic, {zero});
  out.emit("trajectory", trajectory_table(tr, {"v1", "v2", "w1", "w2"}));
  Table proj{{"t", "u", "y", "z"}, {}};
  for (std::size_t k = 0; k < tr.t.size(); ++k) {
    const StateSym s = to_sym(StateFull::of(tr.y[k]), p);
    proj.rows.push_back({tr.t[k], s.u, s.y, s.z});
  }
  out.emit("projection", proj);
  const Vec4& f = tr.y_final;
  std::cout << "final state " << num(f[0]) << ' ' << num(f[1]) << ' ' << num(f[2]) << ' '
            << num(f[3]) << " after " << tr.accepted << " steps\n";
  return 0;
}

int cmd_sao(const json& cfg) {
  Params p = resolve_params(cfg);
  const Emitter out(cfg, "sao", &p);
  const PassageSpec spec = passage_spec(cfg, p);
  const unsigned workers = need(cfg, "workers", 0u);
  const Provenance band{{"saddle_node_band_start", num(saddle_node_band_start(p))}};
  if (cfg.contains("c2")) {
    const Passage ps = saddle_node_passage(spec, *p.c2);
    Table t{kSaoColumns, {sao_row(*p.c2, p.eps, ps.report, "")}};
    t.columns[0] = "c2";
    t.columns.push_back("o1_oscillations");
    t.columns.push_back("spiral_exit");
    t.rows[0].emplace_back(static_cast<long long>(ps.report.o1_oscillations));
    t.rows[0].emplace_back(static_cast<long long>(ps.report.spiral_exit));
    out.emit("sao_saddle_node", t, band);
    write_csv(std::cout, t);
    return 0;
  }
  const auto grid = make_grid(need(cfg, "c-min", 1.17), need(cfg, "c-max", 1.29),
                              need(cfg, "c-step", 0.005));
  const auto rows = sweep_counts(spec, grid, workers);
  Table t{kSaoColumns, {}};
  for (const auto& r : rows) t.rows.push_back(sao_row(r.c, r.eps, r.report, r.error));
  out.emit("sao_sweep", t, band);
  write_csv(std::cout, t);
  return 0;
}

std::vector<double> parse_list(const json& cfg, const std::string& key, std::vector<double> dflt) {
  if (!cfg.contains(key)) return dflt;
  try {
    return cfg.at(key).get<std::vector<double>>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + key + "' must be a list of numbers");
  }
}

int cmd_scaling(const json& cfg) {
  json c = cfg;
  if (!c.contains("c") && !c.contains("c2")) c["c"] = 1.22;
  const Params p = resolve_params(c);
  const Emitter out(c, "scaling", &p);
  const auto eps = parse_list(c, "eps-list", {1e-4, 3e-4, 1e-3, 3e-3, 1e-2});
  if (eps.empty()) throw ConfigError("empty eps list");
  const auto fit = amplitude_scaling(passage_spec(c, p), eps, need(c, "workers", 0u));
  Table t{{"eps", "u_exit", "z_exit", "zeros", "rotations", "used", "flags"}, {}};
  for (const auto& r : fit.rows)
    t.rows.push_back({r.eps, r.report.u_exit, r.report.z_exit,
                      static_cast<long long>(r.report.zeros),
                      static_cast<long long>(r.report.rotations), static_cast<long long>(r.used),
                      r.error.empty() ? r.report.flags : "error: " + r.error});
  const Provenance slopes{{"u_slope", num(fit.u_slope)},
                          {"z_slope", num(fit.z_slope)},
                          {"predicted_u_slope", num(0.5 * p.mu())}};
  out.emit("scaling", t, slopes);
  std::cout << "u_slope " << num(fit.u_slope) << "  z_slope " << num(fit.z_slope)
            << "  gap " << num(fit.z_slope - fit.u_slope) << "  predicted " << num(0.5 * p.mu())
            << '\n';
  return 0;
}

int cmd_geometry(const json& cfg) {
  const Params p = resolve_params(cfg);
  const Emitter out(cfg, "geometry", &p);
  Table sing{{"kind", "v1", "v2", "u", "y", "z", "eig1_re", "eig1_im", "eig2_re", "eig2_im",
              "classification", "region", "det_Dh", "field_residual"},
             {}};
  auto add = [&](const SingularityReport& r) {
    sing.rows.push_back({std::string(to_string(r.kind)), r.v[0], r.v[1], r.u, r.y, r.z,
                         r.eig[0].real(), r.eig[0].imag(), r.eig[1].real(), r.eig[1].imag(),
                         r.classification, std::string(to_string(r.region)), r.det,
                         r.field_residual});
  };
  add(regular_equilibrium(p));
  for (const auto& r : folded_singularities(p)) add(r);
  out.emit("singularities", sing);

  const auto diag = bifurcation_scan(p, need(cfg, "c-min", 0.5), need(cfg, "c-max", 1.6),
                                     need(cfg, "n", 1101));
  Table bt{{"c", "branch", "x", "u", "eig1_re", "eig1_im", "eig2_re", "eig2_im", "stability"}, {}};
  for (const auto& r : diag.rows)
    bt.rows.push_back({r.c, r.branch, r.x, r.u, r.e1.real(), r.e1.imag(), r.e2.real(),
                       r.e2.imag(), r.stability});
  out.emit("bifurcation", bt);
  Table pts{{"label", "c", "branches"}, {}};
  for (const auto& b : diag.points) {
    std::string br = b.branch;
    std::replace(br.begin(), br.end(), ',', ';');
    pts.rows.push_back({b.label, b.c, br});
  }
  out.emit("bifurcation_points", pts);
  write_csv(std::cout, pts);
  return 0;
}

int cmd_cycles(const json& cfg) {
  const Params p = resolve_params(cfg);
  const Emitter out(cfg, "cycles", &p);
  const unsigned workers = need(cfg, "workers", 0u);
  const auto y2 = make_linspace(need(cfg, "y2-min", -3.0), need(cfg, "y2-max", -0.005),
                                need(cfg, "y2-n", 60));
  for (double v : y2)
    if (!(v < 0.0)) throw ConfigError("y2 grid must be negative");
  const auto curve = averaged_curve(p, y2, workers);
  Table ct{{"y2", "T", "mean_u2_sq", "g_avg", "melnikov_line"}, {}};
  for (const auto& pt : curve.points)
    ct.rows.push_back({pt.y2, pt.period, pt.mean_u2_sq, pt.g_avg, pt.melnikov});
  out.emit("averaged_curve", ct,
           {{"strictly_decreasing", curve.strictly_decreasing ? "yes" : "no"},
            {"melnikov_slope", num(melnikov_slope(p))}});

  const auto c2 = make_linspace(need(cfg, "c2-min", -0.8), need(cfg, "c2-max", -0.01),
                                need(cfg, "c2-n", 80));
  for (double v : c2)
    if (!(v < 0.0)) throw ConfigError("c2 grid must be negative");
  const auto rows = exit_point_curve(p, c2, workers);
  Table et{{"c2", "y_exit", "regime"}, {}};
  double crossing = std::nan("");
  const double lim = gamma2_focus_limit(p);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    et.rows.push_back({rows[i].c2, rows[i].y_exit, rows[i].error.empty() ? rows[i].regime : "error"});
    if (i > 0 && (rows[i - 1].y_exit - lim) * (rows[i].y_exit - lim) < 0.0) {
      const double a = rows[i - 1].y_exit - lim, b = rows[i].y_exit - lim;
      crossing = rows[i - 1].c2 + (rows[i].c2 - rows[i - 1].c2) * a / (a - b);
    }
  }
  out.emit("exit_points", et, {{"focus_limit", num(lim)}, {"crossing_c2", num(crossing)}});
  std::cout << "averaged curve strictly decreasing: " << (curve.strictly_decreasing ? "yes" : "no")
            << "\nexit-point crossing of " << num(lim) << " at c2 = " << num(crossing) << '\n';
  return 0;
}

int cmd_weber(const json& cfg) {
  const auto mus = parse_list(cfg, "mu", {0.5, 1.5, 2.7, 4.06, 6.3});
  if (mus.empty()) throw ConfigError("empty mu list");
  const double L = need(cfg, "L", 8.0);
  Table t{{"mu", "zeros"}, {}};
  for (double mu : mus) t.rows.push_back({mu, static_cast<long long>(weber_zero_count(mu, L))});
  if (cfg.contains("out")) Emitter(cfg, "weber").emit("weber", t);
  write_csv(std::cout, t);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cusped-singularity toolkit for two repulsively coupled FitzHugh-Nagumo units"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  Flags flags;
  std::string config_path;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file; flags override it");
    flags.add<double>(sub, "g", "coupling strength (g < 0)");
    flags.add<double>(sub, "c", "slow-nullcline parameter");
    flags.add<double>(sub, "c2", "saddle-node offset, c = v_s + sqrt(eps) c2");
    flags.add<double>(sub, "eps", "time-scale ratio");
    flags.add<std::string>(sub, "out", "output directory");
    flags.add<std::string>(sub, "format", "csv, json or both");
    flags.add<unsigned>(sub, "workers", "worker threads (0 = logical cores)");
    flags.add<double>(sub, "rtol", "relative tolerance");
    flags.add<double>(sub, "atol", "absolute tolerance");
    flags.add<long long>(sub, "seed", "random seed, echoed in provenance");
  };
  auto passage = [&](CLI::App* sub) {
    for (const char* k : {"u0", "y0", "delta", "z-guard", "u-leave", "horizon"})
      flags.add<double>(sub, k, "passage setting");
  };

  auto* sim = app.add_subcommand("simulate", "integrate the full system");
  common(sim);
  passage(sim);
  for (const char* k : {"v1", "v2", "w1", "w2"}) flags.add<double>(sim, k, "initial state");

  auto* sao = app.add_subcommand("sao", "count SAOs over a c grid, or one saddle-node passage with --c2");
  common(sao);
  passage(sao);
  flags.add<double>(sao, "c-min", "grid start");
  flags.add<double>(sao, "c-max", "grid end");
  flags.add<double>(sao, "c-step", "grid step");

  auto* scal = app.add_subcommand("scaling", "fit amplitude exponents against eps");
  common(scal);
  passage(scal);
  flags.add<std::vector<double>>(scal, "eps-list", "eps values");

  auto* geo = app.add_subcommand("geometry", "singularities and bifurcation diagram");
  common(geo);
  flags.add<double>(geo, "c-min", "scan start");
  flags.add<double>(geo, "c-max", "scan end");
  flags.add<int>(geo, "n", "scan points");

  auto* cyc = app.add_subcommand("cycles", "averaged curve and exit points");
  common(cyc);
  flags.add<double>(cyc, "y2-min", "averaged-curve grid start");
  flags.add<double>(cyc, "y2-max", "averaged-curve grid end");
  flags.add<int>(cyc, "y2-n", "averaged-curve grid points");
  flags.add<double>(cyc, "c2-min", "exit-point grid start");
  flags.add<double>(cyc, "c2-max", "exit-point grid end");
  flags.add<int>(cyc, "c2-n", "exit-point grid points");

  auto* web = app.add_subcommand("weber", "zero counts of the Weber equation");
  common(web);
  flags.add<std::vector<double>>(web, "mu", "eigenvalue ratios");
  flags.add<double>(web, "L", "half-width of the integration window");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  const CLI::App* active = app.get_subcommands().front();
  try {
    json cfg = json::object();
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f) throw ConfigError("cannot read config " + config_path);
      try {
        cfg = json::parse(f);
      } catch (const json::exception& e) {
        throw ConfigError(std::string("bad config file: ") + e.what());
      }
      if (!cfg.is_object()) throw ConfigError("config file must hold a JSON object");
    }
    flags.apply(active, cfg);
    const std::string name = active->get_name();
    if (name == "simulate") return cmd_simulate(cfg);
    if (name == "sao") return cmd_sao(cfg);
    if (name == "scaling") return cmd_scaling(cfg);
    if (name == "geometry") return cmd_geometry(cfg);
    if (name == "cycles") return cmd_cycles(cfg);
    return cmd_weber(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  }
}
