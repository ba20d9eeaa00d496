// SPDX-License-Identifier: Apache-2.0
#include "qilens/trace_io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "qilens/errors.hpp"

namespace qilens {

std::string format_seconds(double t) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9f", t);
  std::string s(buf);
  // trim trailing zeros but keep one digit after the point
  const auto dot = s.find('.');
  std::size_t last = s.size();
  while (last > dot + 2 && s[last - 1] == '0') --last;
  s.resize(last);
  return s;
}

namespace {

[[noreturn]] void row_error(const std::filesystem::path& path, std::size_t line,
                            const std::string& what) {
  std::ostringstream os;
  os << path.string() << ":" << line << ": " << what;
  throw ValidationError(os.str());
}

std::uint64_t parse_count(const std::filesystem::path& path, std::size_t line,
                          std::string_view field, const char* name) {
  if (field.empty()) row_error(path, line, std::string("empty ") + name + " field");
  if (field.front() == '-') {
    row_error(path, line, std::string(name) + " count is negative");
  }
  std::uint64_t value = 0;
  const auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    row_error(path, line, std::string("malformed ") + name + " count '" +
                              std::string(field) + "'");
  }
  return value;
}

double parse_time(const std::filesystem::path& path, std::size_t line,
                  std::string_view field) {
  if (field.empty()) row_error(path, line, "empty t_s field");
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(value)) {
    row_error(path, line, "malformed t_s value '" + std::string(field) + "'");
  }
  return value;
}

}  // namespace

TimeTrace load_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trace file: " + path.string());

  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ValidationError(path.string() + ": empty file");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "t_s,s_i,s_s,c") {
    row_error(path, line_no, "expected header 't_s,s_i,s_s,c', got '" + line + "'");
  }

  TimeTrace trace;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    std::array<std::string_view, 4> fields;
    std::string_view rest(line);
    for (int f = 0; f < 4; ++f) {
      const auto comma = rest.find(',');
      if (f < 3) {
        if (comma == std::string_view::npos) {
          row_error(path, line_no, "expected 4 comma-separated fields");
        }
        fields[f] = rest.substr(0, comma);
        rest = rest.substr(comma + 1);
      } else {
        if (comma != std::string_view::npos) {
          row_error(path, line_no, "expected 4 comma-separated fields");
        }
        fields[f] = rest;
      }
    }
    trace.t.push_back(parse_time(path, line_no, fields[0]));
    trace.s_i.push_back(parse_count(path, line_no, fields[1], "s_i"));
    trace.s_s.push_back(parse_count(path, line_no, fields[2], "s_s"));
    trace.c.push_back(parse_count(path, line_no, fields[3], "c"));
  }
  if (trace.t.empty()) throw ValidationError(path.string() + ": no data rows");

  trace.bin_width = trace.t.size() > 1 ? trace.t[1] - trace.t[0] : 1.0;
  try {
    trace.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return trace;
}

void save_trace(const TimeTrace& trace, const std::filesystem::path& path) {
  trace.validate();
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write trace file: " + path.string());
  out << "t_s,s_i,s_s,c\n";
  for (std::size_t j = 0; j < trace.size(); ++j) {
    out << format_seconds(trace.t[j]) << ',' << trace.s_i[j] << ',' << trace.s_s[j]
        << ',' << trace.c[j] << '\n';
  }
  if (!out) throw IoError("short write to trace file: " + path.string());
}

}  // namespace qilens
