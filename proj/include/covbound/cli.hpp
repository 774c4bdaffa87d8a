#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace covbound::cli
{

enum ExitCode : int
{
    kSuccess = 0,
    kIoError = 1,
    kInvalidInput = 2,
    kVerifyFailed = 3,
};

/// Entry point of the covbound executable; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Shortest decimal string that parses back to the same double.
std::string format_number(double x);

/// "lo:step:hi" inclusive of hi up to rounding. Empty when hi < lo.
std::vector<double> parse_grid(std::string_view spec);

/// Comma-separated residual degrees of freedom; "inf" maps to nullopt.
std::vector<std::optional<int>> parse_m_list(std::string_view spec);

/// Comma-separated reals.
std::vector<double> parse_real_list(std::string_view spec);

} // namespace covbound::cli
