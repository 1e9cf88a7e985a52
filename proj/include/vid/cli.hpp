#ifndef VID_CLI_HPP
#define VID_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace vid {

/// Command surface. Subcommands: simulate <cfg>, derive-kernel <variant>
/// <params...>, validate-kernel <cfg>, fit-decay <trace.csv> <column>
/// <power|exp> [--window t0 t1], check-lemma <y0> <M2> <M3> <q>.
/// Exit codes: 0 ok, 1 certification failure, 2 config error, 3 numerical
/// failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace vid

#endif
