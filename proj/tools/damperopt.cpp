// damperopt: optimal single-damper placement for 1-D vibrational systems.
#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>

#include "damperopt/report.hpp"

namespace {

struct Flags {
  std::map<std::string, std::string> values;
  bool full_scale = false;
  bool s_table = false;
  std::string config;
};

void add_common(CLI::App& app, Flags& f) {
  for (const char* name : {"model", "n", "criterion", "band-offset", "band-count", "n-list", "out", "threads", "grid",
                           "a0", "k0", "table", "p", "exponent"}) {
    f.values[name];
  }
  app.add_option("--model", f.values["model"], "chain | string | rod");
  app.add_option("--n", f.values["n"], "dimension (chain masses or spectral modes)");
  app.add_option("--criterion", f.values["criterion"], "energy | displacement");
  app.add_option("--band-offset", f.values["band-offset"], "modes skipped below the weighted band");
  app.add_option("--band-count", f.values["band-count"], "number of weighted modes");
  app.add_option("--n-list", f.values["n-list"], "comma-separated dimensions");
  app.add_option("--out", f.values["out"], "CSV output path (default: stdout)");
  app.add_option("--threads", f.values["threads"], "worker threads (default: hardware)");
  app.add_option("--grid", f.values["grid"], "string/rod sweep positions y = k/(grid+1)");
  app.add_option("--a0", f.values["a0"], "rod bending coefficient");
  app.add_option("--k0", f.values["k0"], "rod foundation stiffness");
  app.add_option("--config", f.config, "flat key=value config file; flags override it");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal viscous damper position and viscosity"};
  app.require_subcommand(1);

  Flags sweep_f, tables_f, verify_f, asym_f;
  auto* sweep = app.add_subcommand("sweep", "optimal trace at every damper position");
  add_common(*sweep, sweep_f);

  auto* tables = app.add_subcommand("tables", "reproduce the optimal-position tables");
  add_common(*tables, tables_f);
  tables->add_option("--table", tables_f.values["table"], "table id 1..6 (default: all)");
  tables->add_flag("--full-scale", tables_f.full_scale, "include the large dimensions up to n = 10000");

  auto* verify = app.add_subcommand("verify", "closed form against the Lyapunov oracle");
  add_common(*verify, verify_f);

  auto* asym = app.add_subcommand("asymptotics", "trace_opt / n^e over a list of dimensions");
  add_common(*asym, asym_f);
  asym->add_option("--p", asym_f.values["p"], "normalised position (default 0.495)");
  asym->add_option("--exponent", asym_f.values["exponent"], "scaling exponent (default 1 energy, 3 displacement)");
  asym->add_flag("--s-table", asym_f.s_table, "append the S(k), T(k) table");
  asym->add_flag("--full-scale", asym_f.full_scale, "accepted for symmetry with tables");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return damperopt::ExitConfig;
  }

  CLI::App* cmd = app.get_subcommands().front();
  Flags& f = cmd == sweep ? sweep_f : cmd == tables ? tables_f : cmd == verify ? verify_f : asym_f;

  damperopt::RunConfig cfg;
  try {
    if (!f.config.empty()) damperopt::apply_config_file(cfg, f.config);
    for (const auto& [key, value] : f.values) {
      const auto* opt = cmd->get_option_no_throw("--" + key);
      if (opt != nullptr && opt->count() > 0) damperopt::apply_setting(cfg, key, value);
    }
    if (f.full_scale) cfg.full_scale = true;
    if (f.s_table) cfg.s_table = true;
  } catch (const damperopt::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return damperopt::ExitConfig;
  }

  const damperopt::Streams io{std::cout, std::cerr};
  if (cmd == sweep) return damperopt::cmd_sweep(cfg, io);
  if (cmd == tables) return damperopt::cmd_tables(cfg, io);
  if (cmd == verify) return damperopt::cmd_verify(cfg, io);
  return damperopt::cmd_asymptotics(cfg, io);
}
