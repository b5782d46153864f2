#pragma once

#include <vector>

#include "gradcalc/report.hpp"
#include "gradcalc/workspace.hpp"

namespace gradcalc {

struct RunOptions {
    uint64_t seed = 0;
    SignConvention signs = SignConvention::trivial;
    int degree_bound = 2;
    bool strict_tuples = false;
};

// Executes one workspace command. Unknown commands, bad arities, unresolved
// names and library failures all come back as status error; this function
// never throws.
CheckReport run_command(const Workspace& ws, const Command& cmd, const RunOptions& opts);

// All commands of the workspace, in file order.
std::vector<CheckReport> run_workspace(const Workspace& ws, const RunOptions& opts);

} // namespace gradcalc
