#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "skel/config.hpp"

namespace skel {

const std::vector<std::string>& command_names();

struct RunOptions {
  std::filesystem::path out;  ///< empty: use the config's output directory
  std::ostream* log = nullptr;
};

/// Runs one command and writes its artifacts. Returns 0 on success and 2 when a
/// check or audit fails; module errors propagate as exceptions (see exit_code).
/// Throws ErrorKind::io when another run holds the output directory.
int run_command(const std::string& command, const ExperimentConfig& config,
                const RunOptions& options = {});

}  // namespace skel
