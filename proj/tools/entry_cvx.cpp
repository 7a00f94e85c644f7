#include "entry_cvx/cli/commands.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace cli = entry_cvx::cli;

namespace {

struct Options {
  std::string config_path;
  std::optional<std::string> objective;
  std::optional<std::string> mode;
  std::optional<std::string> out_dir;
};

cli::RunConfig resolve(const Options& o) {
  cli::RunConfig cfg = o.config_path.empty() ? cli::RunConfig{} : cli::load_config(o.config_path);
  cli::json overrides = cli::json::object();
  if (o.objective) overrides["objective"] = *o.objective;
  if (o.mode) overrides["propagation_mode"] = *o.mode;
  if (o.out_dir) overrides["out_dir"] = *o.out_dir;
  return cli::apply_config(cfg, overrides);
}

int report_error(const std::string& kind, const std::string& message, const std::optional<std::string>& out_dir) {
  const cli::json err = cli::error_json(kind, message);
  std::cerr << err.dump() << "\n";
  if (out_dir) {
    try {
      std::filesystem::create_directories(*out_dir);
      cli::write_text_file((std::filesystem::path(*out_dir) / "error.json").string(), cli::dump_json(err));
    } catch (const std::exception&) {
    }
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mars entry trajectory planning by successive convexification over downrange"};
  app.require_subcommand(1);

  Options opt;
  auto add_common = [&opt](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "flat JSON configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out_dir, "output directory (overrides out_dir)");
  };
  auto add_objective = [&opt](CLI::App* sub) {
    sub->add_option("--objective", opt.objective, "max-altitude, min-velocity or min-time")
        ->check(CLI::IsMember({"max-altitude", "min-velocity", "min-time", "J1", "J2", "J3"}));
  };

  CLI::App* plan = app.add_subcommand("plan", "solve the entry planning problem");
  add_common(plan);
  add_objective(plan);
  CLI::App* prop = app.add_subcommand("propagate", "open-loop propagation with a prescribed bank profile");
  add_common(prop);
  prop->add_option("--mode", opt.mode, "independent variable")->check(CLI::IsMember({"time", "energy", "range"}));
  CLI::App* cmp = app.add_subcommand("compare-ivar", "time, energy and range parameterizations of one scenario");
  add_common(cmp);
  CLI::App* dump = app.add_subcommand("dump-problem", "write the first convex subproblem");
  add_common(dump);
  add_objective(dump);

  CLI::App* keys = app.add_subcommand("config-keys", "list the configuration keys with their defaults");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (keys->parsed()) {
    const cli::json defaults = cli::to_json(cli::RunConfig{});
    for (const auto& [name, doc] : cli::documented_keys())
      std::cout << name << " = " << defaults.at(name).dump() << "\n    " << doc << "\n";
    return 0;
  }

  cli::RunConfig cfg;
  try {
    cfg = resolve(opt);
  } catch (const std::exception& e) {
    return report_error("config_error", e.what(), opt.out_dir);
  }

  try {
    if (plan->parsed()) return cli::cmd_plan(cfg, std::cout);
    if (prop->parsed()) return cli::cmd_propagate(cfg, std::cout);
    if (cmp->parsed()) return cli::cmd_compare_ivar(cfg, std::cout);
    if (dump->parsed()) return cli::cmd_dump_problem(cfg, std::cout);
  } catch (const entry_cvx::DomainError& e) {
    return report_error("domain_error", e.what(), cfg.out_dir);
  } catch (const std::exception& e) {
    return report_error("runtime_error", e.what(), cfg.out_dir);
  }
  return 2;
}
