#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "adasparse/training.hpp"

namespace adasparse {

struct GenDataArgs {
  std::string spec_path;
  std::uint64_t seed = 1;
  std::string out_dir;
};

struct TrainArgs {
  std::string data_dir;
  std::string out_dir;
  TrainConfig config;
};

struct EvalArgs {
  std::string checkpoint;
  std::string data_path;
  std::string out_dir;
};

struct InspectArgs {
  std::string checkpoint;
  std::string data_path;
  std::vector<std::string> domains;
  std::string out_dir;
};

// Handlers throw on failure; run_cli turns that into a nonzero exit with the
// message on stderr. Every command echoes its effective configuration into
// the output directory.
int cmd_gen_data(const GenDataArgs& args);
int cmd_train(const TrainArgs& args);
int cmd_eval(const EvalArgs& args);
int cmd_inspect_masks(const InspectArgs& args);

/// Parsed command line; `command` is one of gen-data|train|eval|inspect-masks.
struct CliState {
  std::string command;
  GenDataArgs gen;
  TrainArgs train;
  EvalArgs eval;
  InspectArgs inspect;
};

// Parse-only entry used by tests; throws SpecError on bad flags.
CliState parse_cli(const std::vector<std::string>& args);

int run_cli(int argc, const char* const* argv);

}  // namespace adasparse
