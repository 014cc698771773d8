#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace signbridge::pipeline {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitRemote = 3;

inline constexpr int kReportSchemaVersion = 1;

// args excludes the program name: {"train-rfc", "--config", "x.cfg", ...}.
int run_subcommand(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace signbridge::pipeline
