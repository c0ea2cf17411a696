#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bdf2spde/harness.hpp"

namespace bdf2spde {

enum class OutputFormat { csv, markdown };

/// Everything the command line selects: the experiment plus output handling.
struct CliOptions {
  ExperimentConfig config;
  OutputFormat format = OutputFormat::csv;
  std::optional<std::filesystem::path> out;  // stdout when absent
  int workers = 0;                           // 0: BDF2SPDE_WORKERS / OpenMP default
};

/// Thrown by parse_config for --help; what() holds the usage text.
class HelpRequested : public std::runtime_error {
 public:
  explicit HelpRequested(const std::string& usage) : std::runtime_error(usage) {}
};

/// Parses flags (and an optional --config file whose keys equal the flag names;
/// flags override file values). Throws ConfigError naming the offending key.
CliOptions parse_config(int argc, const char* const* argv);
CliOptions parse_config(const std::vector<std::string>& args);

inline constexpr std::string_view kCsvHeader = "scheme,N_k,error,ci_lo,ci_hi,eoc,argmax_n,wall_seconds";

std::string format_csv(const ErrorReport& report);
/// Error table: N_k | error | CI +- | EOC per scheme.
std::string format_markdown(const ErrorReport& report, const std::string& caption);
std::string default_caption(const ExperimentConfig& config);

/// Parses format_csv output (round-trip for tests and downstream tools).
ErrorReport parse_csv(std::string_view text);

/// Writes `contents` atomically: temp file in the target directory, then rename.
void write_atomic(const std::filesystem::path& path, const std::string& contents);

/// Renders the report and writes it to `path` (or stdout when absent).
void emit(const ErrorReport& report, OutputFormat format, const std::optional<std::filesystem::path>& path,
          const std::string& caption = {});

}  // namespace bdf2spde
