#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qmspline/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Exact quadratic-mean error analysis for composite Hermite spline schemes"};
  app.require_subcommand(1);

  struct Sub {
    const char* name;
    const char* desc;
  };
  const std::vector<Sub> subs = {
      {"knots", "emit quantile knots t_i = G(i/n) as CSV"},
      {"error", "norm or pointwise approximation error with diagnostics"},
      {"sweep", "error norms over a list of interval counts, CSV output"},
      {"fit", "log-log rate fit of a sweep CSV"},
      {"bconst", "universal scale constant of the limiting local error"},
      {"optimal-density", "variance-optimal generating density"},
      {"check-conditions", "admissibility thresholds for power densities"},
      {"intermediate-design", "greedy knot design with bounded local error"},
      {"reproduce", "built-in reproduction pipeline (example 4 or 5)"},
  };

  std::map<std::string, std::vector<std::string>> tokens;
  for (const Sub& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.desc);
    sub->add_option("tokens", tokens[s.name],
                    "optional config file plus key=value overrides");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;  // command-line misuse is a config error
  }

  for (const Sub& s : subs) {
    if (app.got_subcommand(s.name)) {
      std::vector<std::string> args{s.name};
      const std::vector<std::string>& extra = tokens[s.name];
      args.insert(args.end(), extra.begin(), extra.end());
      return qms::run_cli(args, std::cout, std::cerr);
    }
  }
  return 2;
}
