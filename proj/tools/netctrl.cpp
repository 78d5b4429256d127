#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "netctrl/report.hpp"

int main(int argc, char** argv) {
  using namespace netctrl;

  CLI::App app{"Structural controllability analysis and topology design for networked LFT systems"};
  app.require_subcommand(1);

  CommandRequest req;
  std::string out_path;
  std::map<std::string, ModeFilter> modes{{"all", ModeFilter::All}, {"unstable", ModeFilter::Unstable}};
  std::map<std::string, Format> formats{{"json", Format::Json}, {"text", Format::Text}};
  std::map<std::string, ControllabilityTest> tests{{"pbh", ControllabilityTest::Pbh},
                                                   {"stacked", ControllabilityTest::Stacked}};

  const std::vector<std::pair<Command, std::string>> commands = {
      {Command::Check, "Decide structural controllability of the network"},
      {Command::Design, "Design a minimal interconnection topology for the subsystems"},
      {Command::Realize, "Search for a controllable random realization"},
      {Command::Graph, "Write the networked auxiliary graph in DOT"},
      {Command::Feasible, "Check whether any topology can make the network controllable"},
  };
  for (const auto& [cmd, help] : commands) {
    CLI::App* sub = app.add_subcommand(command_name(cmd), help);
    sub->add_option("file", req.path, "NDS document (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--modes", req.modes, "Modes to consider: all or unstable")
        ->transform(CLI::CheckedTransformer(modes, CLI::ignore_case));
    sub->add_option("--seed", req.seed, "Random seed (overrides the document)");
    sub->add_option("--trials", req.trials, "Realization trials")->check(CLI::PositiveNumber);
    sub->add_option("--tol", req.rank_tol, "Relative rank tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--eig-tol", req.eig_tol, "Eigenvalue clustering tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--jobs", req.jobs, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", out_path, "Write the report (or DOT) to this file");
    sub->add_option("--format", req.format, "Report format: json or text")
        ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
    sub->add_option("--test", req.test, "Realization test: pbh or stacked")
        ->transform(CLI::CheckedTransformer(tests, CLI::ignore_case));
    sub->add_flag("--timing", req.timing, "Include wall time in the report");
    sub->callback([&req, c = cmd] { req.command = c; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitError;
  }

  CommandOutput out = run_command(req);
  for (const auto& d : out.diagnostics) std::cerr << d << "\n";
  if (out.body.empty()) return out.exit_code;
  if (out_path.empty()) {
    std::cout << out.body;
    return out.exit_code;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!(f << out.body) || !f.flush()) {
    std::cerr << "error: cannot write " << out_path << "\n";
    return kExitError;
  }
  return out.exit_code;
}
