#pragma once

#include <string>
#include <vector>

#include "hjh/config.hpp"

namespace hjh {

/** Outcome of one CLI experiment run. */
struct RunResult {
    int exit_code = 0;
    std::vector<std::string> files;  // paths written (CSV, manifest, timings)
    std::string error;               // nonempty on failure
};

/**
 * Dispatches a subcommand with a resolved configuration: runs the named
 * module operation, writes the CSV artifacts plus (optionally) a manifest
 * with the resolved config, and removes partial outputs on failure. The
 * manifest re-runs the experiment byte-identically; wall-clock goes to a
 * timing sidecar outside the determinism contract.
 */
RunResult run_experiment(const std::string& subcommand, Config cfg, const std::string& out_dir,
                         int threads, bool write_manifest);

/** The subcommands run_experiment understands. */
const std::vector<std::string>& known_subcommands();

/** One-paragraph CSV schema documentation per subcommand (for --help). */
std::string subcommand_help(const std::string& subcommand);

}  // namespace hjh
