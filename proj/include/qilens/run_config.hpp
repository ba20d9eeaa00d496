// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qilens/counting.hpp"
#include "qilens/fitting.hpp"
#include "qilens/lens_model.hpp"

namespace qilens {

// Run configuration, read from a sectioned key=value file. Sections:
// [source] (counting chain), [lens], [scenario], [fit], [output]. Unknown
// keys are rejected. Environment variables QILENS_<SECTION>_<KEY> override
// file values; CLI flags override both.
struct RunConfig {
  CountingConfig source;
  LensParams lens;
  Scenario scenario;
  std::optional<BeamGeometry> beams;  // validated against lens.m when present

  // [fit]
  std::vector<FitParam> fit_free;
  FitSpec::Weights fit_weights = FitSpec::Weights::poisson;
  int fit_max_evals = 20000;
  bool fit_profiles = false;

  // [output]
  std::filesystem::path out_dir = "out";
  bool csv_only = false;
  std::size_t gsi_window = 10;

  void validate() const;
  std::vector<std::string> warnings() const;
};

RunConfig load_config(const std::filesystem::path& path);

// Parse from text (file contents); `origin` names the source in errors.
RunConfig parse_config(const std::string& text, const std::string& origin);

}  // namespace qilens
