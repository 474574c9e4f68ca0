#include "run_config.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

#include "semopt/error.hpp"
#include "semopt/version.hpp"

namespace semopt::cli {

namespace {

std::vector<KeySpec> problem_keys() {
  return {
      {"problem", "burgers1d", "burgers1d, advdiff1d, burgers3d or diffusion1d"},
      {"elements", "", "elements per axis (problem default when empty)"},
      {"degree", "", "polynomial degree N (problem default when empty)"},
      {"nu", "", "viscosity"},
      {"velocity", "", "advection speed (advdiff1d)"},
      {"horizon", "", "final time T"},
      {"dt", "", "fixed time step"},
      {"seed", "0", "seed of the reference amplitudes (advdiff1d)"},
      {"guess-seed", "1", "seed of the initial-guess amplitudes (advdiff1d)"},
      {"gaussian-center", "2", "centre of the Gaussian perturbation (burgers1d)"},
      {"scheme", "rk3", "euler, rk3 or cn"},
      {"adaptive", "false", "adaptive step control (rk3 only)"},
      {"tol-a", "1e-6", "absolute local error tolerance"},
      {"tol-r", "1e-6", "relative local error tolerance"},
      {"threads", "0", "worker threads (0 = machine parallelism)"},
      {"output", "", "CSV output file (stdout when empty)"},
  };
}

std::vector<KeySpec> with(std::vector<KeySpec> base, const std::vector<KeySpec>& extra) {
  base.insert(base.end(), extra.begin(), extra.end());
  return base;
}

const std::map<std::string, std::vector<KeySpec>>& table() {
  static const std::map<std::string, std::vector<KeySpec>> t = {
      {"forward", with(problem_keys(),
                       {{"start", "auto", "initial state: auto, exact, guess or a snapshot path"},
                        {"snapshot", "", "write the final state to this snapshot file"}})},
      {"gradcheck", with(problem_keys(),
                         {{"directions", "5", "number of random unit directions"},
                          {"direction-seed", "7", "seed for the random directions"},
                          {"direction", "", "snapshot file holding one direction (replaces random ones)"},
                          {"eps", "1e-4,1e-5,1e-6", "finite-difference step sizes"},
                          {"checkpoint-slots", "0", "binomial checkpoint slots (0 = store all)"}})},
      {"optimize", with(problem_keys(),
                        {{"max-iters", "50", "L-BFGS iterations"},
                         {"gtol", "1e-6", "relative gradient tolerance"},
                         {"ftol", "0", "relative decrease tolerance"},
                         {"memory", "5", "L-BFGS memory"},
                         {"start", "guess", "initial iterate: guess, exact or a snapshot path"},
                         {"checkpoint-slots", "0", "binomial checkpoint slots (0 = store all)"},
                         {"snapshot", "", "write the recovered initial state to this snapshot file"}})},
      {"convergence", with(problem_keys(),
                           {{"mode", "h", "h (sweep elements) or p (sweep degree)"},
                            {"sweep", "4,8,16,32", "elements (h) or degrees (p) to run"},
                            {"max-iters", "200", "L-BFGS iterations per run"},
                            {"gtol", "1e-12", "relative gradient tolerance"},
                            {"memory", "10", "L-BFGS memory"}})},
      {"schedule", {{"steps", "10", "number of time steps m"},
                    {"checkpoint-slots", "3", "snapshot slots s (0 = store all)"},
                    {"output", "", "CSV output file (stdout when empty)"}}},
      {"bench", {{"elements", "2", "elements per axis of the 3D mesh"},
                 {"degrees", "4,6,8", "polynomial degrees to time"},
                 {"steps", "10", "time steps for the integration timings"},
                 {"dt", "0.005", "time step"},
                 {"nu", "0.01", "viscosity"},
                 {"reps", "3", "repetitions (the minimum is reported)"},
                 {"threads", "0", "worker threads (0 = machine parallelism)"},
                 {"output", "", "CSV output file (stdout when empty)"}}},
  };
  return t;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    fail(ErrorKind::InvalidArgument, "'" + key + "' expects a number, got '" + text + "'");
  }
  return v;
}

std::string format(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

}  // namespace

const std::vector<KeySpec>& keys_for(const std::string& command) {
  const auto it = table().find(command);
  if (it == table().end()) fail(ErrorKind::InvalidArgument, "unknown command '" + command + "'");
  return it->second;
}

RunConfig::RunConfig(std::string command) : command_(std::move(command)) {
  for (const KeySpec& k : keys_for(command_)) values_[k.name] = k.fallback;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const auto it = values_.find(key);
  if (it == values_.end()) {
    fail(ErrorKind::InvalidArgument, "unknown key '" + key + "' for command " + command_);
  }
  it->second = value;
}

void RunConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open config file " + path);
  load(in, path);
}

void RunConfig::load(std::istream& in, const std::string& origin) {
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(ErrorKind::InvalidArgument,
           origin + ":" + std::to_string(number) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key == "config") {
      fail(ErrorKind::InvalidArgument, origin + ":" + std::to_string(number) + ": nested config");
    }
    set(key, trim(line.substr(eq + 1)));
  }
}

void RunConfig::resolve_defaults() {
  if (!values_.count("problem")) return;
  const ProblemSpec d = ProblemSpec::defaults(parse_problem(str("problem")));
  const std::pair<const char*, std::string> fills[] = {
      {"elements", std::to_string(d.elements)}, {"degree", std::to_string(d.degree)},
      {"nu", format(d.nu)},                     {"velocity", format(d.velocity)},
      {"horizon", format(d.horizon)},           {"dt", format(d.dt)},
  };
  for (const auto& [key, value] : fills) {
    if (values_.at(key).empty()) values_[key] = value;
  }
}

bool RunConfig::has(const std::string& key) const { return !str(key).empty(); }

const std::string& RunConfig::str(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) fail(ErrorKind::InvalidArgument, "key '" + key + "' is not defined");
  return it->second;
}

int RunConfig::integer(const std::string& key) const { return parse_number<int>(key, str(key)); }

double RunConfig::real(const std::string& key) const { return parse_number<double>(key, str(key)); }

bool RunConfig::flag(const std::string& key) const {
  const std::string& v = str(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  fail(ErrorKind::InvalidArgument, "'" + key + "' expects true or false, got '" + v + "'");
}

std::vector<int> RunConfig::int_list(const std::string& key) const {
  std::vector<int> out;
  for (const std::string& p : split(str(key))) out.push_back(parse_number<int>(key, p));
  return out;
}

std::vector<double> RunConfig::real_list(const std::string& key) const {
  std::vector<double> out;
  for (const std::string& p : split(str(key))) out.push_back(parse_number<double>(key, p));
  return out;
}

void RunConfig::write_header(std::ostream& out) const {
  out << "# semopt " << kVersion << '\n';
  out << "# command = " << command_ << '\n';
  for (const KeySpec& k : keys_for(command_)) out << "# " << k.name << " = " << str(k.name) << '\n';
}

ProblemSpec RunConfig::problem() const {
  ProblemSpec spec = ProblemSpec::defaults(parse_problem(str("problem")));
  if (has("elements")) spec.elements = integer("elements");
  if (has("degree")) spec.degree = integer("degree");
  if (has("nu")) spec.nu = real("nu");
  if (has("velocity")) spec.velocity = real("velocity");
  if (has("horizon")) spec.horizon = real("horizon");
  if (has("dt")) spec.dt = real("dt");
  spec.seed = static_cast<std::uint64_t>(integer("seed"));
  spec.guess_seed = static_cast<std::uint64_t>(integer("guess-seed"));
  spec.gaussian_center = real("gaussian-center");
  spec.validate();
  return spec;
}

TsConfig RunConfig::time_stepping(const ProblemSpec& spec) const {
  TsConfig cfg;
  cfg.scheme = parse_scheme(str("scheme"));
  cfg.T = spec.horizon;
  cfg.dt = spec.dt;
  cfg.adaptive = flag("adaptive");
  cfg.tol_a = real("tol-a");
  cfg.tol_r = real("tol-r");
  cfg.validate();
  return cfg;
}

CheckpointPolicy RunConfig::checkpointing() const {
  const int slots = integer("checkpoint-slots");
  require(slots >= 0, "checkpoint-slots must be non-negative");
  if (slots == 0) return {Storage::StoreAll, 0};
  return {Storage::Binomial, slots};
}

OptimConfig RunConfig::optimizer() const {
  OptimConfig oc;
  oc.max_iters = integer("max-iters");
  oc.gtol = real("gtol");
  if (values_.count("ftol")) oc.ftol = real("ftol");
  oc.memory = integer("memory");
  oc.validate();
  return oc;
}

}  // namespace semopt::cli
