// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>

#include "qilens/counting.hpp"

namespace qilens {

// Trace CSV format: header `t_s,s_i,s_s,c`, one row per bin, decimal
// seconds, integer counts, newline-terminated UTF-8.

TimeTrace load_trace(const std::filesystem::path& path);
void save_trace(const TimeTrace& trace, const std::filesystem::path& path);

// Shared numeric formatting: shortest decimal form that survives a
// round trip at nanosecond resolution.
std::string format_seconds(double t);

}  // namespace qilens
