#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "kgtk/errors.hpp"

namespace kgtk {

// One pipeline stage: a subcommand plus its own argument vector.
struct StageSpec {
    std::string name;
    std::vector<std::string> args;
};

struct PipelinePlan {
    std::vector<StageSpec> stages;
    bool progress = false;  // any stage passed --progress
};

// Streams the process talks to; tests substitute string streams.
struct CliStreams {
    std::istream* in = nullptr;
    std::ostream* out = nullptr;
    std::ostream* err = nullptr;
};

// Carries the failing stage and the exit code its cause maps to.
class StageFailure : public KgtkError {
public:
    StageFailure(std::size_t stage_index, int exit_code, const std::string& message)
        : KgtkError(message), stage_index_(stage_index), exit_code_(exit_code) {}

    std::size_t stage_index() const { return stage_index_; }
    int exit_code() const { return exit_code_; }

private:
    std::size_t stage_index_;
    int exit_code_;
};

const std::vector<std::string>& subcommand_names();

// Splits argv on bare "/" tokens, checks every stage against its subcommand
// schema, and rebinds an input file named by a later stage to the first one.
// Throws UnknownSubcommand, EmptyStage, BadStageArgs, or UsageError before
// anything runs.
PipelinePlan parse_pipeline(const std::vector<std::string>& args);

// Executes the plan. A single stage runs inline and propagates its own
// errors; multiple stages run as one thread each, linked by bounded record
// channels, and the first root failure is rethrown as StageFailure.
void run_pipeline(const PipelinePlan& plan, CliStreams io);

// 0 success, 1 usage error, 2 data error, 3 runtime failure.
int exit_code_for(const std::exception& error);

// Full entry point: parse, run, map exceptions to exit codes and stderr.
int run_cli(const std::vector<std::string>& args, CliStreams io);

}  // namespace kgtk
