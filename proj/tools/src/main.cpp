#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"
#include "semopt/error.hpp"
#include "semopt/version.hpp"

namespace {

int exit_code(semopt::ErrorKind kind) {
  using semopt::ErrorKind;
  switch (kind) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::UnsupportedConfiguration:
    case ErrorKind::ScheduleInvalid:
    case ErrorKind::Io:
      return semopt::cli::kExitValidation;
    case ErrorKind::LineSearchFailure:
      return semopt::cli::kExitNotConverged;
    default:
      return semopt::cli::kExitNumeric;
  }
}

struct Command {
  CLI::App* app = nullptr;
  std::string config;
  std::map<std::string, std::string> flags;
  std::map<std::string, CLI::Option*> options;
};

const char* summary(const std::string& name) {
  if (name == "forward") return "integrate forward and write the step log";
  if (name == "gradcheck") return "compare adjoint gradients with central finite differences";
  if (name == "optimize") return "recover the initial state by L-BFGS";
  if (name == "convergence") return "h or p sweep of the recovered initial state error";
  if (name == "schedule") return "print a binomial checkpoint schedule";
  return "time the 3D kernels, integration and adjoint sweep";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adjoint spectral-element assimilation"};
  app.set_version_flag("--version", std::string(semopt::kVersion));
  app.require_subcommand(1);

  std::vector<std::string> names{"forward", "gradcheck", "optimize", "convergence", "schedule", "bench"};
  std::map<std::string, Command> commands;
  for (const std::string& name : names) {
    Command& c = commands[name];
    c.app = app.add_subcommand(name, summary(name));
    c.app->add_option("--config", c.config, "key = value file; flags override it");
    for (const semopt::cli::KeySpec& k : semopt::cli::keys_for(name)) {
      std::string help = k.help;
      if (!k.fallback.empty()) help += " [" + k.fallback + "]";
      c.options[k.name] = c.app->add_option("--" + k.name, c.flags[k.name], help);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : semopt::cli::kExitValidation;
  }

  for (auto& [name, c] : commands) {
    if (!c.app->parsed()) continue;
    try {
      semopt::cli::RunConfig cfg(name);
      if (!c.config.empty()) cfg.load_file(c.config);
      for (const auto& [key, opt] : c.options) {
        if (opt->count() > 0) cfg.set(key, c.flags[key]);
      }
      cfg.resolve_defaults();
      return semopt::cli::run_command(cfg);
    } catch (const semopt::Error& e) {
      std::cerr << "semopt " << name << ": " << e.what() << '\n';
      return exit_code(e.kind());
    } catch (const std::exception& e) {
      std::cerr << "semopt " << name << ": " << e.what() << '\n';
      return semopt::cli::kExitNumeric;
    }
  }
  return semopt::cli::kExitValidation;
}
