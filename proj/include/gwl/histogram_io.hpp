#ifndef GWL_HISTOGRAM_IO_HPP
#define GWL_HISTOGRAM_IO_HPP

#include <filesystem>
#include <string>
#include <string_view>

#include "gwl/dos_histogram.hpp"
#include "gwl/oracle.hpp"

namespace gwl {

// CSV: header "bin_lo,s,h,visited", one row per bin, reals as %.17g, LF
// line endings. bin_lo is the bin's grid value lo + b * width.
std::string histogram_csv(const DosHistogram& hist);
std::string histogram_csv(const ExactDos& exact);

// Parses a histogram CSV back into a table. The bin grid is recovered from
// the bin_lo column (width 1 for a single row). Throws FormatError naming
// the offending line.
EntropyTable parse_histogram_csv(std::string_view text);
EntropyTable read_histogram_csv(const std::filesystem::path& path);

// Same fields as the CSV plus the bin spec and modification schedule.
std::string histogram_json(const DosHistogram& hist, const ModificationSchedule& sched);

std::string read_text(const std::filesystem::path& path);
// Throws IoError on failure.
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace gwl

#endif  // GWL_HISTOGRAM_IO_HPP
