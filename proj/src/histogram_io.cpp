#include "gwl/histogram_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

namespace gwl {

namespace {

std::string real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_rows(const BinSpec& spec, const std::vector<double>& s, const std::vector<std::uint64_t>& h,
                     const std::vector<bool>& visited) {
  std::string out = "bin_lo,s,h,visited\n";
  for (std::size_t b = 0; b < s.size(); ++b) {
    out += real(spec.center(b));
    out += ',';
    out += real(s[b]);
    out += ',';
    out += std::to_string(h[b]);
    out += visited[b] ? ",1\n" : ",0\n";
  }
  return out;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  for (;;) {
    const std::size_t end = line.find(sep, pos);
    parts.push_back(line.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos));
    if (end == std::string_view::npos) break;
    pos = end + 1;
  }
  return parts;
}

double parse_real(std::string_view field, std::size_t line_no) {
  // from_chars for double is available in libstdc++ 11.
  double v = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw FormatError("line " + std::to_string(line_no) + ": bad number '" + std::string(field) + "'");
  return v;
}

std::uint64_t parse_count(std::string_view field, std::size_t line_no) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw FormatError("line " + std::to_string(line_no) + ": bad count '" + std::string(field) + "'");
  return v;
}

}  // namespace

std::string histogram_csv(const DosHistogram& hist) { return csv_rows(hist.spec, hist.s, hist.h, hist.visited); }

std::string histogram_csv(const ExactDos& exact) { return histogram_csv(exact_as_histogram(exact)); }

EntropyTable parse_histogram_csv(std::string_view text) {
  EntropyTable table;
  std::vector<double> bin_lo;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool header = false;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (!header) {
      if (line != "bin_lo,s,h,visited")
        throw FormatError("line " + std::to_string(line_no) + ": expected header 'bin_lo,s,h,visited'");
      header = true;
      continue;
    }
    const auto f = split(line, ',');
    if (f.size() != 4)
      throw FormatError("line " + std::to_string(line_no) + ": expected 4 fields, got " + std::to_string(f.size()));
    bin_lo.push_back(parse_real(f[0], line_no));
    table.s.push_back(parse_real(f[1], line_no));
    table.counts.push_back(parse_count(f[2], line_no));
    if (f[3] != "0" && f[3] != "1")
      throw FormatError("line " + std::to_string(line_no) + ": visited must be 0 or 1");
    table.present.push_back(f[3] == "1");
  }
  if (!header) throw FormatError("line 1: missing header 'bin_lo,s,h,visited'");
  if (bin_lo.empty()) throw FormatError("histogram CSV has no rows");
  const std::size_t n = bin_lo.size();
  const double width = n > 1 ? (bin_lo.back() - bin_lo.front()) / static_cast<double>(n - 1) : 1.0;
  if (!(width > 0)) throw FormatError("histogram CSV bins are not ascending");
  for (std::size_t b = 1; b < n; ++b) {
    const double expect = bin_lo.front() + static_cast<double>(b) * width;
    if (std::abs(bin_lo[b] - expect) > 1e-6 * std::max(1.0, width))
      throw FormatError("line " + std::to_string(b + 2) + ": bins are not evenly spaced");
  }
  try {
    table.spec = BinSpec::make(bin_lo.front(), bin_lo.front() + static_cast<double>(n) * width, width);
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("histogram CSV has an invalid bin grid: ") + e.what());
  }
  return table;
}

EntropyTable read_histogram_csv(const std::filesystem::path& path) { return parse_histogram_csv(read_text(path)); }

std::string histogram_json(const DosHistogram& hist, const ModificationSchedule& sched) {
  nlohmann::ordered_json doc;
  doc["bins"] = {{"lo", hist.spec.lo}, {"hi", hist.spec.hi}, {"width", hist.spec.width}};
  doc["schedule"] = {{"ln_f0", sched.ln_f0}, {"iteration", sched.iteration}, {"ln_f", sched.ln_f()}};
  std::vector<double> lo(hist.size());
  for (std::size_t b = 0; b < lo.size(); ++b) lo[b] = hist.spec.center(b);
  doc["bin_lo"] = lo;
  doc["s"] = hist.s;
  doc["h"] = hist.h;
  nlohmann::ordered_json visited = nlohmann::ordered_json::array();
  for (bool v : hist.visited) visited.push_back(v ? 1 : 0);
  doc["visited"] = std::move(visited);
  doc["overflow_low"] = hist.overflow_low;
  doc["overflow_high"] = hist.overflow_high;
  return doc.dump() + "\n";
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace gwl
