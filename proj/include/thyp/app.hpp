#pragma once

#include "thyp/config.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace thyp::cli {

enum ExitCode : int {
    kOk = 0,
    kConfig = 2,
    kHyperbolicity = 3,   ///< scan failure, inadmissible data, symbol breakdown
    kHalted = 4,          ///< continuation stopped short of the horizon
    kInternal = 5,
    kIo = 6,
};

struct RunReport {
    int exit_code = kOk;
    std::string message;
    std::vector<std::string> artifacts;  ///< relative to the output directory
};

/// Runs `cfg.command`, writing artifacts and manifest.json into `out`.
/// Never throws for domain errors; they are mapped to exit codes.
RunReport run(const RunConfig& cfg, const std::filesystem::path& out);

}  // namespace thyp::cli
