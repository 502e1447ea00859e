#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ftt {

/// Entry point behind the `ftt` binary. Subcommands: synth, embed, cluster,
/// trends, reweight, train, eval, rolling. Returns 0 on success, 1 on a
/// pipeline error (one line "error: <category>: <message>" on `err`), 2 on a
/// usage error.
int command_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace ftt
