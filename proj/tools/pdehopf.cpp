#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pdehopf/commands.hpp"

using namespace pdehopf;

namespace {

struct ConfigFlags {
  std::string file;
  std::vector<std::string> sets;
  std::map<std::string, std::string> direct;

  void attach(CLI::App* app) {
    app->add_option("--config", file, "config file (key = value lines or JSON)");
    app->add_option("--set", sets, "config edit key=value, repeatable");
    static const std::vector<std::pair<std::string, std::string>> flags = {
        {"--model", "model"},         {"--out", "out"},           {"--detector", "shifts"},
        {"--neig", "neig"},           {"--mu1", "mu1"},           {"--mu2", "mu2"},
        {"--ds", "ds"},               {"--dsmax", "dsmax"},       {"--nsteps", "nsteps"},
        {"--lam-min", "lam_min"},     {"--lam-max", "lam_max"},   {"--dir", "dir"},
        {"--tol", "tol"},             {"--m", "m"},               {"--po-ds", "po_ds"},
        {"--po-dsmax", "po_dsmax"},   {"--po-nsteps", "po_nsteps"}, {"--po-tol", "po_tol"},
        {"--xi", "po_xi"},            {"--wT", "wT"},             {"--floquet", "floquet"},
        {"--parametrization", "parametrization"}, {"--natural-dlam", "natural_dlam"}, {"--seed", "seed"}};
    for (const auto& [flag, key] : flags) app->add_option(flag, direct[key], "config key " + key);
  }

  RunConfig build(RunConfig base) const {
    if (!file.empty()) {
      RunConfig f = load_config(file);
      base = f;
    }
    for (const auto& s : sets) {
      auto eq = s.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
      base.set(s.substr(0, eq), s.substr(eq + 1));
    }
    for (const auto& [k, v] : direct)
      if (!v.empty()) base.set(k, v);
    base.validate();
    return base;
  }
};

RunConfig from_point(const json& p) {
  if (!p.contains("config")) throw ConfigError("point file carries no config");
  return config_from_json(p.at("config"));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hopf bifurcation and periodic orbit continuation for reaction-diffusion systems"};
  app.require_subcommand(1);

  ConfigFlags steady_f, hopf_f, floq_f, ts_f;
  auto* steady = app.add_subcommand("steady", "stationary continuation with bifurcation detection");
  steady_f.attach(steady);

  auto* hopf = app.add_subcommand("hopf", "switch at a Hopf point and continue the orbit branch");
  std::string hopf_file, hopf_tag;
  hopf->add_option("point", hopf_file, "Hopf point file from 'steady'")->required();
  hopf->add_option("--tag", hopf_tag, "output subdirectory");
  hopf_f.attach(hopf);

  auto* floq = app.add_subcommand("floq", "Floquet multipliers of an orbit point");
  std::string floq_file, algo = "fa2";
  bool compare = false;
  floq->add_option("point", floq_file, "orbit point file")->required();
  floq->add_option("--algo", algo, "fa1 or fa2");
  floq->add_flag("--compare", compare, "run the other algorithm and report disagreement");
  floq_f.attach(floq);

  auto* plot = app.add_subcommand("plotdata", "tidy CSV and SVG from branch files");
  std::vector<std::string> plot_files;
  std::string prefix = "plot", oracle = "none";
  plot->add_option("files", plot_files, "branch CSV files");
  plot->add_option("--prefix", prefix, "output path without extension");
  plot->add_option("--oracle", oracle, "none or cgl");

  auto* ts = app.add_subcommand("timestep", "direct time integration");
  TimestepOptions topt;
  ts->add_option("--dt", topt.dt);
  ts->add_option("--steps", topt.nsteps);
  ts->add_option("--every", topt.every);
  ts->add_option("--from", topt.from, "start from a point file");
  ts->add_option("--perturb", topt.perturb, "random perturbation amplitude");
  ts->add_flag("--force", topt.force, "integrate despite backward diffusion");
  ts->add_flag("--lumped", topt.lumped, "lumped mass matrix");
  ts_f.attach(ts);

  auto* self = app.add_subcommand("selftest", "derivative and normal-form checks on all models");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*steady) {
      cmd_steady(steady_f.build(RunConfig{}), std::cout);
    } else if (*hopf) {
      json p = load_json(hopf_file);
      RunConfig cfg = hopf_f.build(from_point(p));
      if (hopf_tag.empty()) hopf_tag = std::filesystem::path(hopf_file).stem().string();
      HopfRun r = cmd_hopf(cfg, p, std::cout, hopf_tag);
      if (r.steps.empty()) {
        std::cerr << "error: no orbit point computed" << (r.stop.empty() ? "" : ": " + r.stop) << "\n";
        return 1;
      }
    } else if (*floq) {
      json p = load_json(floq_file);
      cmd_floq(floq_f.build(from_point(p)), p, algo, compare, std::cout);
    } else if (*plot) {
      cmd_plotdata(plot_files, prefix, oracle, std::cout);
    } else if (*ts) {
      cmd_timestep(ts_f.build(RunConfig{}), topt, std::cout);
    } else if (*self) {
      return cmd_selftest(std::cout) ? 0 : 1;
    }
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
