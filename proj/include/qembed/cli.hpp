#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace qembed::cli {

enum class Command { singular, even_variant, piecewise, hsquare, verify, sweep };

const char* to_string(Command c);

struct RunConfig {
    Command command = Command::piecewise;
    double k0 = 1.0;
    double a = -3.0;
    double A = 1.0;
    std::optional<double> X;  // per-command default when empty
    std::optional<int> n;
    double grid_step = 1e-3;
    int sweep_points = 200;
    std::filesystem::path out_dir = ".";
    std::filesystem::path spec_path;  // verify
    bool skip_spectral = false;
};

// Thrown by parse_args for --help; carries the formatted usage text.
struct HelpRequested {
    std::string text;
};

enum ExitCode : int { ok = 0, validation_failure = 2, numerical_failure = 3 };

// Environment variable naming the default output directory.
inline constexpr const char* kOutDirEnv = "QEMBED_OUT_DIR";

// Throws DomainError on invalid flags or parameter ranges.
RunConfig parse_args(const std::vector<std::string>& args);
void validate(const RunConfig& cfg);

// Runs one command. Progress goes to `log`, the one-line failure reason to
// `diag` as "qembed: error=<validation|numerical> reason=<text>".
int run(const RunConfig& cfg, std::ostream& log, std::ostream& diag);

// parse_args + run with the exit-code mapping; what main() calls.
int main_entry(const std::vector<std::string>& args, std::ostream& log, std::ostream& diag);

}  // namespace qembed::cli
