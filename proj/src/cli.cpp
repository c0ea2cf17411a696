#include "bdf2spde/cli.hpp"

#include <fmt/format.h>

#include <CLI11.hpp>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <system_error>

#include <unistd.h>

#include "bdf2spde/errors.hpp"

namespace bdf2spde {

namespace {

// CLI11 messages mention the option as --name; recover it for ConfigError::key().
std::string offending_key(const std::string& message) {
  static const std::regex flag(R"(--([A-Za-z][A-Za-z0-9\-]*))");
  std::smatch m;
  if (std::regex_search(message, m, flag)) return m[1].str();
  return "arguments";
}

}  // namespace

CliOptions parse_config(const std::vector<std::string>& args) {
  CliOptions opts;
  ExperimentConfig& c = opts.config;
  CLI::App app{"BDF2-Maruyama / backward Euler-Maruyama strong-error experiments", "bdf2spde"};
  app.set_config("--config", "", "Config file (TOML/INI) with keys named like the flags");
  app.allow_config_extras(false);

  std::string problem = to_string(c.problem);
  std::string scheme = "both";
  std::string reference = "bdf2";
  std::string format = "csv";
  std::string out;
  std::vector<std::size_t> levels = c.levels;

  app.add_option("--problem", problem, "heat | quasilinear")->capture_default_str();
  app.add_option("--sigma", c.sigma, "Noise intensity")->capture_default_str();
  app.add_option("--r", c.r, "Spatial regularity of the noise")->capture_default_str();
  app.add_option("--eps", c.eps, "Eigenvalue exponent offset, q_j = j^-(2r+1+eps)")->capture_default_str();
  app.add_option("--t-final", c.t_final, "Final time T")->capture_default_str();
  app.add_option("--nh", c.n_h, "Interior FEM nodes N_h")->capture_default_str();
  app.add_option("--j", c.modes, "Karhunen-Loeve truncation J")->capture_default_str();
  app.add_option("--levels", levels, "Comma-separated step counts N_k")->delimiter(',')->capture_default_str();
  app.add_option("--nref", c.n_ref, "Reference step count")->capture_default_str();
  app.add_option("--samples", c.samples, "Monte Carlo samples M")->capture_default_str();
  app.add_option("--seed", c.seed, "Base RNG seed")->capture_default_str();
  app.add_option("--alpha", c.alpha, "Confidence level parameter")->capture_default_str();
  app.add_option("--scheme", scheme, "bem | bdf2 | both")->capture_default_str();
  app.add_option("--reference-scheme", reference, "Scheme of the reference solution")->capture_default_str();
  app.add_option("--newton-tol", c.newton.tol, "Newton residual tolerance")->capture_default_str();
  app.add_option("--newton-min", c.newton.n_min, "Minimum Newton iterations")->capture_default_str();
  app.add_option("--newton-max", c.newton.n_max, "Maximum Newton iterations")->capture_default_str();
  app.add_option("--format", format, "csv | markdown")->capture_default_str();
  app.add_option("--out", out, "Output path (stdout when omitted)");
  app.add_option("--workers", opts.workers, "Worker threads (0: BDF2SPDE_WORKERS or all cores)")
      ->capture_default_str();
  app.add_flag("--timing", c.record_timing, "Record per-level stepper wall time in the output");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested(app.help());
  } catch (const CLI::ParseError& e) {
    throw ConfigError(offending_key(e.what()), e.what());
  }

  c.problem = parse_problem_kind(problem);
  c.levels = levels;
  if (scheme == "both") {
    c.schemes = {Scheme::bem, Scheme::bdf2};
  } else {
    try {
      c.schemes = {parse_scheme(scheme)};
    } catch (const std::invalid_argument& e) {
      throw ConfigError("scheme", e.what());
    }
  }
  try {
    c.reference = parse_scheme(reference);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("reference-scheme", e.what());
  }
  if (format == "csv") {
    opts.format = OutputFormat::csv;
  } else if (format == "markdown" || format == "md") {
    opts.format = OutputFormat::markdown;
  } else {
    throw ConfigError("format", "expected csv or markdown, got '" + format + "'");
  }
  if (!out.empty()) opts.out = out;
  if (opts.workers < 0) throw ConfigError("workers", "must be nonnegative");
  c.validate();
  return opts;
}

CliOptions parse_config(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return parse_config(args);
}

std::string format_csv(const ErrorReport& report) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const LevelResult& row : report.rows) {
    out += fmt::format("{},{},{},{},{},{},{},{}\n", to_string(row.scheme), row.n_steps, row.error, row.ci_lo,
                       row.ci_hi, row.eoc ? fmt::format("{}", *row.eoc) : std::string{}, row.argmax_n,
                       row.wall_seconds);
  }
  return out;
}

std::string default_caption(const ExperimentConfig& config) {
  const std::string what = config.problem == ProblemKind::heat ? "Stochastic heat equation" : "Quasilinear SPDE";
  if (config.sigma == 0.0) return fmt::format("{} with sigma={} (deterministic)", what, config.sigma);
  return fmt::format("{} with sigma={} and r={}", what, config.sigma, config.r);
}

std::string format_markdown(const ErrorReport& report, const std::string& caption) {
  std::vector<Scheme> schemes;
  std::set<std::size_t> levels;
  for (const auto& row : report.rows) {
    if (std::find(schemes.begin(), schemes.end(), row.scheme) == schemes.end()) schemes.push_back(row.scheme);
    levels.insert(row.n_steps);
  }
  std::string out;
  if (!caption.empty()) out += "**" + caption + "**\n\n";
  out += "| N_k |";
  std::string rule = "|---:|";
  for (Scheme s : schemes) {
    out += fmt::format(" {0} error | {0} CI ± | {0} EOC |", to_string(s));
    rule += "---:|---:|---:|";
  }
  out += "\n" + rule + "\n";
  bool clipped = false;
  for (std::size_t level : levels) {
    out += fmt::format("| {} |", level);
    for (Scheme s : schemes) {
      const LevelResult& row = report.at(s, level);
      clipped = clipped || row.ci_clipped;
      out += fmt::format(" {:.6f} | {:.6f}{} | {} |", row.error, 0.5 * (row.ci_hi - row.ci_lo),
                         row.ci_clipped ? "*" : "", row.eoc ? fmt::format("{:.2f}", *row.eoc) : std::string{});
    }
    out += "\n";
  }
  if (clipped) out += "\n\\* lower confidence bound clipped at 0\n";
  return out;
}

namespace {

double parse_double(std::string_view field, const char* what) {
  const std::string s(field);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw std::invalid_argument(std::string("parse_csv: bad ") + what);
  return v;
}

std::size_t parse_size(std::string_view field, const char* what) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw std::invalid_argument(std::string("parse_csv: bad ") + what);
  }
  return v;
}

}  // namespace

ErrorReport parse_csv(std::string_view text) {
  ErrorReport report;
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw std::invalid_argument("parse_csv: missing header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    for (std::size_t pos; (pos = rest.find(',')) != std::string_view::npos;) {
      fields.push_back(rest.substr(0, pos));
      rest.remove_prefix(pos + 1);
    }
    fields.push_back(rest);
    if (fields.size() != 8) throw std::invalid_argument("parse_csv: expected 8 fields in '" + line + "'");
    LevelResult row;
    row.scheme = parse_scheme(std::string(fields[0]));
    row.n_steps = parse_size(fields[1], "N_k");
    row.error = parse_double(fields[2], "error");
    row.ci_lo = parse_double(fields[3], "ci_lo");
    row.ci_hi = parse_double(fields[4], "ci_hi");
    if (!fields[5].empty()) row.eoc = parse_double(fields[5], "eoc");
    row.argmax_n = parse_size(fields[6], "argmax_n");
    row.wall_seconds = parse_double(fields[7], "wall_seconds");
    report.rows.push_back(row);
  }
  return report;
}

void write_atomic(const std::filesystem::path& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::current_path();
  const fs::path tmp = dir / (path.filename().string() + ".tmp." + std::to_string(::getpid()));
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    f.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    f.flush();
    if (!f) {
      std::error_code ignore;
      fs::remove(tmp, ignore);
      throw std::runtime_error("write to " + tmp.string() + " failed");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignore;
    fs::remove(tmp, ignore);
    throw std::runtime_error("cannot move output into " + path.string() + ": " + ec.message());
  }
}

void emit(const ErrorReport& report, OutputFormat format, const std::optional<std::filesystem::path>& path,
          const std::string& caption) {
  const std::string text = format == OutputFormat::csv ? format_csv(report) : format_markdown(report, caption);
  if (path) {
    write_atomic(*path, text);
  } else {
    std::cout << text << std::flush;
  }
}

}  // namespace bdf2spde
