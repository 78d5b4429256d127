#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "netctrl/design.hpp"
#include "netctrl/document.hpp"
#include "netctrl/verify.hpp"

namespace netctrl {

enum class Command { Check, Design, Realize, Graph, Feasible };
enum class Format { Json, Text };

std::optional<Command> parse_command(const std::string& name);
std::string command_name(Command c);

struct CommandRequest {
  Command command = Command::Check;
  std::string path;
  ModeFilter modes = ModeFilter::All;
  std::optional<std::uint64_t> seed;  // overrides the document's seed
  std::size_t trials = 10;
  std::optional<double> rank_tol;     // --tol
  std::optional<double> eig_tol;
  std::size_t jobs = 1;
  ControllabilityTest test = ControllabilityTest::Pbh;
  Format format = Format::Json;
  bool timing = false;
};

constexpr int kExitPositive = 0;
constexpr int kExitNegative = 1;
constexpr int kExitError = 2;

struct CommandOutput {
  int exit_code = kExitError;
  std::string body;                 // report (json or text) or DOT
  std::vector<std::string> diagnostics;  // warnings and errors for stderr
};

// Loads req.path and runs the command. Never throws; failures give exit code 2.
CommandOutput run_command(const CommandRequest& req);
// Same, on an already parsed document (path is only echoed).
CommandOutput run_command(const CommandRequest& req, const NdsDocument& doc);

nlohmann::ordered_json eigenvalue_to_json(const Eigenvalue& e);
nlohmann::ordered_json verdict_to_json(const Verdict& v);
nlohmann::ordered_json design_to_json(const DesignResult& d);
nlohmann::ordered_json feasibility_to_json(const FeasibilityReport& f);
nlohmann::ordered_json realization_to_json(const RealizationResult& r);

// Rows of '*' and '0'.
std::vector<std::string> pattern_grid(const StructuredPattern& p);

}  // namespace netctrl
