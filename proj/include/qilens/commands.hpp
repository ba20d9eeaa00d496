// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "qilens/run_config.hpp"

namespace qilens {

// CLI verb implementations, shared between the tool and tests. Each writes
// its artifacts under io.out_dir and reports to `log`. Exit codes: 0 ok,
// 2 validation, 3 numerical, 4 I/O.
struct CommandIo {
  std::filesystem::path out_dir;
  bool csv_only = false;
  std::ostream* log = nullptr;
};

int cmd_simulate(const RunConfig& config, const CommandIo& io);
int cmd_fit(const RunConfig& config, const std::filesystem::path& trace_path,
            const CommandIo& io);
int cmd_gsi(const RunConfig& config, const std::filesystem::path& trace_path,
            const CommandIo& io);
int cmd_denoise(const RunConfig& config, const std::filesystem::path& trace_path,
                const CommandIo& io);

// runs a callable and maps escaping exceptions to the exit-code contract
template <typename F>
int guarded(F&& body, std::ostream& err);

}  // namespace qilens

#include "qilens/detail/commands_guard.hpp"
