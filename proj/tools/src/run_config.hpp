#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "semopt/optimize.hpp"
#include "semopt/problems.hpp"

namespace semopt::cli {

struct KeySpec {
  std::string name;
  std::string fallback;
  std::string help;
};

/// Keys accepted by one subcommand, with their defaults.
const std::vector<KeySpec>& keys_for(const std::string& command);

/// Resolved key = value configuration of one command. Values come from the
/// defaults, then an optional config file, then command-line flags.
class RunConfig {
 public:
  explicit RunConfig(std::string command);

  const std::string& command() const { return command_; }

  /// Throws InvalidArgument for keys the command does not know.
  void set(const std::string& key, const std::string& value);
  /// One `key = value` per line; `#` starts a comment.
  void load_file(const std::string& path);
  void load(std::istream& in, const std::string& origin);
  /// Fills problem keys left empty with the defaults of the chosen problem.
  void resolve_defaults();

  bool has(const std::string& key) const;
  const std::string& str(const std::string& key) const;
  int integer(const std::string& key) const;
  double real(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::vector<int> int_list(const std::string& key) const;
  std::vector<double> real_list(const std::string& key) const;

  /// `#`-prefixed provenance lines: version, command and every resolved key.
  void write_header(std::ostream& out) const;

  ProblemSpec problem() const;
  TsConfig time_stepping(const ProblemSpec& spec) const;
  CheckpointPolicy checkpointing() const;
  OptimConfig optimizer() const;

 private:
  std::string command_;
  std::map<std::string, std::string> values_;
};

}  // namespace semopt::cli
