#ifndef GWL_CLI_HPP
#define GWL_CLI_HPP

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace gwl::cli {

// Stable process exit codes.
enum ExitCode : int {
  kOk = 0,
  kFailed = 1,    // tolerance exceeded or nothing to report
  kUsage = 2,     // bad flags or unparsable input
  kTimeout = 3,   // an iteration hit the step guard
  kBudget = 4,    // enumeration larger than the budget
  kIoError = 5,
};

// Runs `gwl <command> [flags]`; argv[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Git blob hash: sha1("blob <size>\0" + content), lowercase hex.
std::string git_blob_hash(std::string_view content);

// Current UTC time as ISO 8601.
std::string utc_timestamp();

}  // namespace gwl::cli

#endif  // GWL_CLI_HPP
