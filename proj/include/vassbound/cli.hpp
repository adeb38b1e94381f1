#pragma once

#include <iosfwd>

namespace vassbound
{

namespace exit_code
{
constexpr int ok = 0;
constexpr int parse_error = 1;
constexpr int not_connected = 2;
constexpr int internal_error = 3;
constexpr int exponential_input = 4;
constexpr int oracle_budget = 5;
constexpr int check_failed = 6;
} // namespace exit_code

/// Runs the command line front end; usage errors return CLI11's codes.
int run_cli( int argc, const char* const* argv, std::ostream& out, std::ostream& err );

} // namespace vassbound
