// Copyright The hallhom Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef HALLHOM_CLI_HPP
#define HALLHOM_CLI_HPP

// Command-line front end. Exit codes: 0 ok, 2 configuration error,
// 3 solver non-convergence, 4 I/O error.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hallhom/experiments.hpp"
#include "hallhom/mask_io.hpp"
#include "hallhom/report.hpp"
#include "hallhom/run_config.hpp"

namespace hallhom
{

enum ExitCode : int
{
  kExitOk = 0,
  kExitConfig = 2,
  kExitNonConvergence = 3,
  kExitIo = 4,
};

namespace cli_detail
{

inline std::string fmt(const char *f, double v)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

template <int D>
void print_matrix(std::ostream &os, const Mat<D> &m, const std::string &indent = "  ")
{
  for (int i = 0; i < D; ++i) {
    os << indent << '[';
    for (int j = 0; j < D; ++j)
      os << (j ? " " : "") << fmt("%12.6f", m(i, j));
    os << " ]\n";
  }
}

inline std::filesystem::path output_dir(const RunConfig &cfg)
{
  std::filesystem::path dir(cfg.out);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw IoError("cannot create output directory '" + cfg.out + "': " + ec.message());
  return dir;
}

inline void write_text(const std::filesystem::path &path, const std::string &text)
{
  std::ofstream os(path, std::ios::binary);
  if (!os)
    throw IoError("cannot open '" + path.string() + "' for writing");
  os << text;
  if (!os)
    throw IoError("write to '" + path.string() + "' failed");
}

inline void write_json(const std::filesystem::path &path, const Json &j)
{
  write_text(path, j.dump(2) + "\n");
}

inline int default_resolution(const RunConfig &cfg)
{
  if (cfg.resolution > 0)
    return cfg.resolution;
  return cfg.dim == 3 ? 32 : 64;
}

inline PhaseMask make_mask(const RunConfig &cfg)
{
  const int res = default_resolution(cfg);
  const std::string &g = cfg.geometry;
  if (g == "file") {
    PhaseMask m = read_mask_file(cfg.mask_path);
    if (cfg.dim_given && m.geometry.dim != cfg.dim)
      throw ConfigError("mask file is " + std::to_string(m.geometry.dim) + "D but the run is " +
                        std::to_string(cfg.dim) + "D");
    return m;
  }
  if (g == "constant")
    return PhaseMask(CellGeometry::UnitCell(cfg.dim, res));
  if (g == "laminate")
    return build_laminate(cfg.axis, cfg.fraction, res, cfg.dim);
  if (g == "checkerboard")
    return build_checkerboard(res);
  if (g == "cross")
    return build_cross_cell(cfg.t, cfg.ell, res);
  if (g == "fiber")
    return build_fiber_cell_3d(cfg.r, res);
  return build_triaxial_fiber_cell(cfg.r, res);
}

inline Json run_header(const RunConfig &cfg)
{
  return Json{{"command", cfg.command},
              {"seed", cfg.seed},
              {"tolerance", cfg.solver.tolerance},
              {"method", to_string(cfg.solver.method)},
              {"preconditioner", to_string(cfg.solver.preconditioner)}};
}

template <int D>
int cell_solve(const RunConfig &cfg, const PhaseMask &mask, std::ostream &out)
{
  const PerturbedPhase p1(cfg.phases.alpha1, cfg.phases.beta1), p2(cfg.phases.alpha2, cfg.phases.beta2);
  HallVector<D> h{};
  if constexpr (D == 2)
    h = cfg.h2d();
  else
    h = cfg.h3d();
  const auto field = assemble_conductivity<D>(mask, p1, p2, h);
  const auto dir = output_dir(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const auto eff = effective_tensor(field, cfg.solver, cfg.threads);
    const double wall = cfg.no_timing ? 0.0 : std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    Json j = effective_tensor_json(eff, cfg.h, {p1, p2}, wall);
    j["geometry"] = cfg.geometry;
    j["volume_fraction"] = mask.volume_fraction();
    j["run"] = run_header(cfg);
    write_json(dir / "effective_tensor.json", j);
    out << "cell-solve  geometry=" << cfg.geometry << "  grid=" << mask.geometry.n[0] << 'x' << mask.geometry.n[1];
    if (D == 3)
      out << 'x' << mask.geometry.n[2];
    out << "  theta=" << fmt("%.6f", mask.volume_fraction()) << "  solver=" << to_string(eff.method) << '\n';
    out << "effective tensor:\n";
    print_matrix<D>(out, eff.matrix);
    out << "iterations:";
    for (auto it : eff.iterations)
      out << ' ' << it;
    out << "  residuals:";
    for (auto r : eff.residuals)
      out << ' ' << fmt("%.2e", r);
    out << "\nwrote " << (dir / "effective_tensor.json").string() << '\n';
    return kExitOk;
  } catch (const NonConvergenceError &e) {
    Json j;
    j["status"] = "nonconvergence";
    j["error"] = e.what();
    j["best_residual"] = e.best_residual();
    j["iterations"] = e.iterations();
    j["run"] = run_header(cfg);
    write_json(dir / "effective_tensor.json", j);
    throw;
  }
}

inline int sweep_exit_code(const SweepResult &res)
{
  if (res.any_nonconvergence())
    return kExitNonConvergence;
  return res.all_ok() ? kExitOk : kExitConfig;
}

inline void print_sweep(std::ostream &out, const SweepResult &res)
{
  out << "  n  feature   theta      res   max_rel_err  iters";
  if (res.dim == 3)
    out << "   xi1/xi3   xi2/xi3";
  out << '\n';
  for (const auto &r : res.records) {
    out << fmt("%3.0f", r.n) << "  " << fmt("%-8.4g", r.feature) << "  " << fmt("%-9.5f", r.theta) << "  "
        << fmt("%-5.0f", r.resolution) << " ";
    if (!r.ok) {
      out << " FAILED: " << r.error << '\n';
      continue;
    }
    out << fmt("%11.4e", r.max_rel_error()) << "  ";
    std::size_t it = 0;
    for (auto i : r.iterations)
      it = std::max(it, i);
    out << fmt("%5.0f", static_cast<double>(it));
    if (r.has_xi)
      out << "  " << fmt("%8.4f", r.xi_ratio[0]) << "  " << fmt("%8.4f", r.xi_ratio[1]);
    out << (r.pre_asymptotic ? "  (pre-asymptotic)" : "") << '\n';
  }
}

inline void write_sweep(const RunConfig &cfg, const SweepResult &res, const std::string &stem, std::ostream &out)
{
  const auto dir = output_dir(cfg);
  std::ostringstream csv;
  write_sweep_csv(csv, res, !cfg.no_timing);
  write_text(dir / (stem + ".csv"), csv.str());
  Json j = sweep_json(res, !cfg.no_timing);
  j["run"] = run_header(cfg);
  write_json(dir / (stem + ".json"), j);
  out << "wrote " << (dir / (stem + ".csv")).string() << " and " << (dir / (stem + ".json")).string() << '\n';
}

inline int dispatch(const RunConfig &cfg, std::ostream &out)
{
  const std::string &cmd = cfg.command;
  if (cmd == "cell-solve") {
    const PhaseMask mask = make_mask(cfg);
    if (mask.geometry.dim == 2)
      return cell_solve<2>(cfg, mask, out);
    RunConfig cfg3 = cfg;
    if (cfg3.dim != 3) {
      // 3D mask file without an explicit dim: a scalar h is taken along e3
      cfg3.dim = 3;
      if (cfg3.h.size() == 1)
        cfg3.h = {0.0, 0.0, cfg3.h[0]};
    }
    return cell_solve<3>(cfg3, mask, out);
  }
  if (cmd == "sweep-cross") {
    const SweepPlan plan = make_cross_plan(cfg.phases, cfg.ell, cfg.t_list, cfg.resolution, cfg.fixed_beta);
    const SweepResult res = run_cross_sweep(cfg.phases, cfg.ell, cfg.h2d(), plan, cfg.solver, cfg.threads);
    const Mat2 pred = cross_formula(cfg.phases, cfg.ell, cfg.h2d());
    out << "sweep-cross  ell=" << format_double(cfg.ell) << "  h=" << format_double(cfg.h2d())
        << (cfg.fixed_beta ? "  [fixed beta2n: outside the strong-field theory]" : "") << "\npredicted limit:\n";
    print_matrix<2>(out, pred);
    print_sweep(out, res);
    write_sweep(cfg, res, "sweep_cross", out);
    return sweep_exit_code(res);
  }
  if (cmd == "sweep-fiber3d") {
    const SweepPlan plan = make_fiber_plan(cfg.phases, cfg.r_list, cfg.resolution, cfg.fixed_beta, cfg.epsilon_list);
    const SweepResult res = run_fiber_sweep_3d(cfg.phases, cfg.h3d(), plan, cfg.solver, cfg.threads);
    out << "sweep-fiber3d  h=(" << format_double(cfg.h[0]) << ", " << format_double(cfg.h[1]) << ", "
        << format_double(cfg.h[2]) << ")" << (cfg.fixed_beta ? "  [fixed beta2n: outside the strong-field theory]" : "")
        << "\npredicted limit:\n";
    print_matrix<3>(out, fiber_formula_3d(cfg.phases, cfg.h3d()));
    const auto [c1, c2] = fiber_xi_coefficients(cfg.phases, cfg.h3d());
    out << "predicted xi ratios: " << fmt("%.6f", c1) << ' ' << fmt("%.6f", c2) << '\n';
    print_sweep(out, res);
    if (res.epsilon_warning)
      out << "warning: eps^2 |ln r| is not decreasing along the plan\n";
    write_sweep(cfg, res, "sweep_fiber3d", out);
    return sweep_exit_code(res);
  }
  if (cmd == "duality-check") {
    const PhaseMask mask = make_mask(cfg);
    const DualityReport rep =
      run_duality_harness(mask, {cfg.phases.alpha1, cfg.phases.beta1}, {cfg.phases.alpha2, cfg.phases.beta2},
                          cfg.h2d(), cfg.solver, cfg.threads);
    Json j = duality_json(rep);
    j["geometry"] = cfg.geometry;
    j["run"] = run_header(cfg);
    const auto dir = output_dir(cfg);
    write_json(dir / "duality.json", j);
    out << "duality-check  geometry=" << cfg.geometry << "  grid=" << mask.geometry.n[0] << 'x' << mask.geometry.n[1]
        << "\neffective tensor:\n";
    print_matrix<2>(out, rep.sigma_star);
    out << "keller duality deviation:   " << fmt("%.3e", rep.keller_deviation) << '\n';
    if (rep.dykhne)
      out << "dykhne stability deviation: " << fmt("%.3e", rep.dykhne->deviation)
          << "  (transformed phases asymmetry " << fmt("%.1e", rep.dykhne->pointwise_asymmetry) << ")\n";
    else
      out << "dykhne stability: skipped (" << rep.dykhne_skipped << ")\n";
    out << "wrote " << (dir / "duality.json").string() << '\n';
    return kExitOk;
  }
  if (cmd == "dykhne") {
    const AsymptoticTable tab = run_dykhne_asymptotics(cfg.phases, cfg.h2d(), cfg.theta_list);
    const auto dir = output_dir(cfg);
    std::ostringstream csv;
    write_asymptotic_csv(csv, tab);
    write_text(dir / "dykhne.csv", csv.str());
    Json j = asymptotic_json(tab);
    j["run"] = run_header(cfg);
    write_json(dir / "dykhne.json", j);
    out << "dykhne  limits: alpha1'=" << format_double(tab.lim_alpha1)
        << "  theta*alpha2'=" << format_double(tab.lim_theta_alpha2) << "  p=1  q=" << format_double(tab.lim_q)
        << "  r=0\n      theta   alpha1'        theta*alpha2'  p              q              r\n";
    for (const auto &r : tab.rows)
      out << fmt("%11.3e", r.theta) << "  " << fmt("%-13.8f", r.alpha1_prime) << "  "
          << fmt("%-13.8f", r.theta_alpha2_prime) << "  " << fmt("%-13.8f", r.p) << "  " << fmt("%-13.8f", r.q)
          << "  " << fmt("%-13.6e", r.r) << '\n';
    out << "wrote " << (dir / "dykhne.csv").string() << '\n';
    return kExitOk;
  }
  // mask
  if (!cfg.mask_path.empty() && cfg.geometry != "file") {
    const PhaseMask m = read_mask_file(cfg.mask_path);
    out << "mask " << cfg.mask_path << ": d=" << m.geometry.dim << " grid=" << m.geometry.n[0] << 'x'
        << m.geometry.n[1];
    if (m.geometry.dim == 3)
      out << 'x' << m.geometry.n[2];
    out << " ell=" << format_double(m.geometry.extents[0]) << " phase2_elements=" << m.count()
        << " theta=" << fmt("%.6f", m.volume_fraction()) << '\n';
    return kExitOk;
  }
  const PhaseMask m = make_mask(cfg);
  const auto dir = output_dir(cfg);
  write_mask_file((dir / "mask.txt").string(), m);
  out << "mask geometry=" << cfg.geometry << " grid=" << m.geometry.n[0] << 'x' << m.geometry.n[1];
  if (m.geometry.dim == 3)
    out << 'x' << m.geometry.n[2];
  out << " theta=" << fmt("%.6f", m.volume_fraction()) << "\nwrote " << (dir / "mask.txt").string() << '\n';
  return kExitOk;
}

} // namespace cli_detail

/// Parses argv, runs the subcommand and returns the process exit code.
inline int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err)
{
  CLI::App app{"hallhom: periodic homogenization of Hall-perturbed two-phase conductivities"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "print help and exit");

  struct SubOptions
  {
    std::string config;
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option *> options;
  };
  std::map<std::string, SubOptions> subs;
  static const std::map<std::string, std::string> descriptions{
    {"cell-solve", "effective tensor of one generated or loaded cell"},
    {"sweep-cross", "cross-structure sweep against the closed-form limit"},
    {"sweep-fiber3d", "3D fiber sweep against the closed-form limit"},
    {"duality-check", "Keller duality and Dykhne stability on one 2D field"},
    {"dykhne", "transformed-phase asymptotics table"},
    {"mask", "generate a mask file, or inspect one with --mask PATH"},
  };
  static const std::map<std::string, std::string> key_help{
    {"out", "output directory (default hallhom_out)"},
    {"res", "elements per unit length"},
    {"tol", "relative residual tolerance (default 1e-9)"},
    {"max-iter", "Krylov iteration cap"},
    {"precond", "none | diagonal"},
    {"method", "auto | cg | bicgstab | gmres"},
    {"restart", "GMRES restart length"},
    {"threads", "worker threads"},
    {"no-timing", "write 0 for wall times (byte-stable output)"},
    {"seed", "recorded in the run header"},
    {"geometry", "constant | laminate | checkerboard | cross | fiber | triaxial | file"},
    {"dim", "2 or 3"},
    {"alpha1", "matrix phase alpha"},
    {"beta1", "matrix phase Hall coefficient"},
    {"alpha2", "inclusion phase alpha (limit constant in sweeps)"},
    {"beta2", "inclusion phase Hall coefficient"},
    {"h", "field: scalar in 2D, h1,h2,h3 in 3D"},
    {"t", "bar half-width (list for sweep-cross)"},
    {"ell", "cross cell aspect, >= 1"},
    {"r", "fiber radius (list for sweep-fiber3d)"},
    {"fraction", "laminate phase-2 fraction"},
    {"axis", "laminate normal axis, 0-based"},
    {"mask", "mask file path"},
    {"fixed-beta", "hold beta2n at beta2 instead of beta2/theta"},
    {"epsilon", "period per r, annotation only"},
    {"theta", "decreasing volume fractions"},
  };
  for (const auto &name : subcommands()) {
    CLI::App *sub = app.add_subcommand(name, descriptions.at(name));
    sub->set_help_flag("--help", "print help and exit");
    SubOptions &so = subs[name];
    sub->add_option("--config", so.config, "flat key = value config file");
    for (const auto &key : config_schema(name)) {
      const std::string help = key_help.count(key) ? key_help.at(key) : std::string();
      if (key == "no-timing" || key == "fixed-beta")
        so.options[key] = sub->add_flag("--" + key, help);
      else
        so.options[key] = sub->add_option("--" + key, so.values[key], help);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  std::string command;
  for (const auto *sub : app.get_subcommands())
    command = sub->get_name();
  SubOptions &so = subs.at(command);

  try {
    KeyValues flags;
    for (const auto &[key, opt] : so.options) {
      if (opt->count() == 0)
        continue;
      flags[key] = (key == "no-timing" || key == "fixed-beta") ? "true" : so.values[key];
    }
    const KeyValues file = so.config.empty() ? KeyValues{} : read_config_file(so.config);
    const RunConfig cfg = parse_config(command, file, flags);
    return cli_detail::dispatch(cfg, out);
  } catch (const NonConvergenceError &e) {
    err << "error: " << e.what() << '\n';
    return kExitNonConvergence;
  } catch (const IoError &e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const DegenerateTransformError &e) {
    err << "error: " << e.what() << " (no transform is needed; the medium is handled without it)\n";
    return kExitConfig;
  } catch (const Error &e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}

} // namespace hallhom

#endif // HALLHOM_CLI_HPP
