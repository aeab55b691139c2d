#include <charconv>
#include <fstream>
#include <string>

#include "psadmm/errors.hpp"
#include "psadmm/experiment.hpp"

namespace psadmm {
namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) return fields;
    start = comma + 1;
  }
}

template <typename T>
T field(std::string_view text, int line, const char* name) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParseError("bad value '" + std::string(text) + "'", line, name);
  }
  return value;
}

}  // namespace

void emit_csv(const std::vector<BerRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << format_csv(records);
  if (!out) throw IoError("failed writing '" + path + "'");
}

std::vector<BerRecord> parse_csv(std::string_view text) {
  std::vector<BerRecord> records;
  int line_no = 0;
  bool header = true;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (header) {
      if (line != kCsvHeader) throw ParseError("unexpected header", line_no, "");
      header = false;
      continue;
    }
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 8) throw ParseError("expected 8 fields", line_no, "");
    BerRecord r;
    r.detector = std::string(f[0]);
    r.snr_db = field<double>(f[1], line_no, "snr_db");
    r.bit_errors = field<std::uint64_t>(f[2], line_no, "bit_errors");
    r.bits_total = field<std::uint64_t>(f[3], line_no, "bits_total");
    r.ber = field<double>(f[4], line_no, "ber");
    r.mean_iters = field<double>(f[5], line_no, "mean_iters");
    r.mean_residual_final = field<double>(f[6], line_no, "mean_residual_final");
    r.certificate_failures = field<std::uint64_t>(f[7], line_no, "certificate_failures");
    records.push_back(std::move(r));
  }
  if (header) throw ParseError("missing header", 1, "");
  return records;
}

}  // namespace psadmm
