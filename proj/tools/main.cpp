// Command-line front end: run one convergence experiment and print/write its error table.
//
//   bdf2spde --problem heat --sigma 1 --r 5 --format markdown
//   bdf2spde --config table4.toml --out table4.csv
//
// Worker threads: --workers N, else BDF2SPDE_WORKERS, else all cores. The output
// does not depend on the worker count.

#include <iostream>

#include "bdf2spde/cli.hpp"
#include "bdf2spde/errors.hpp"

int main(int argc, char** argv) {
  using namespace bdf2spde;
  try {
    const CliOptions opts = parse_config(argc, argv);
    const ErrorReport report = run_experiment(opts.config, opts.workers);
    emit(report, opts.format, opts.out, default_caption(opts.config));
    return 0;
  } catch (const HelpRequested& help) {
    std::cout << help.what();
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "bdf2spde: invalid option --" << e.key() << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "bdf2spde: " << e.what() << "\n";
    return 1;
  }
}
