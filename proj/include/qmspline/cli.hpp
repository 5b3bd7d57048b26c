#pragma once

#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace qms {

// Flat key=value experiment configuration.  Values come from an optional
// config file ('#' starts a comment) overlaid with key=value command-line
// tokens; later assignments win.  Each command validates its key set, so
// unknown keys are rejected.
struct ExperimentConfig {
  std::map<std::string, std::string> values;

  bool has(const std::string& key) const { return values.count(key) != 0; }
  // Missing-key lookups throw ConfigError naming the key; the fallback
  // overloads never throw on absence.
  std::string get(const std::string& key) const;
  std::string get(const std::string& key, const std::string& fallback) const;
  double number(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  long integer(const std::string& key) const;
  long integer(const std::string& key, long fallback) const;
  bool flag(const std::string& key, bool fallback) const;
};

// Builds a config from subcommand tokens: at most one token without '=' (the
// config file path); every other token must be key=value.
ExperimentConfig load_config(const std::vector<std::string>& tokens);

// Dispatches `args` = {subcommand, token...}.  Reports to `out`, warnings and
// errors to `err`.  Exit codes: 0 ok, 1 reproduction verdict failed,
// 2 invalid configuration, 3 computation failed.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qms
