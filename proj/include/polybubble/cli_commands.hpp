#pragma once

#include <string>

#include "polybubble/report.hpp"
#include "polybubble/run_config.hpp"

namespace polybubble {

// Each command aggregates one slice of the library into a checked Report:
//   constants     dual-route values of P, the bubble integrals and B1..B4
//   lattice       exact interaction sums against their asymptotic forms
//   residual-scan ansatz error norm decay across the (k, t) sweep
//   solve         reduced-system trajectory across the k sweep
//   pohozaev      identity, locality and concentration battery
//   norms         nonlinear remainder band and shell-mass scaling
Report cmd_constants(const RunConfig& cfg);
Report cmd_lattice(const RunConfig& cfg);
Report cmd_residual_scan(const RunConfig& cfg);
Report cmd_solve(const RunConfig& cfg);
Report cmd_pohozaev(const RunConfig& cfg);
Report cmd_norms(const RunConfig& cfg);

// Dispatch by subcommand name; throws ConfigError on an unknown name.
Report run_command(const std::string& name, const RunConfig& cfg);

}  // namespace polybubble
