#pragma once

#include <iosfwd>

#include "loopsim/measures.hpp"

namespace loopsim::cli {

// exit codes: 0 success, 1 runtime failure, 2 bad configuration or input
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// serialized LoopJoint exchange format for the `measures` subcommand
std::string loop_joint_to_json(const measures::LoopJoint& j);
measures::LoopJoint loop_joint_from_json(const std::string& text);

}  // namespace loopsim::cli
