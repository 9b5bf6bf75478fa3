#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace ranksim::cli {

enum ExitCode : int {
    exit_ok = 0,
    exit_config = 1,
    exit_invalid = 2,
    exit_statistical = 3,
};

struct Options {
    std::string command; // validate, simulate-ctmc, simulate-diffusion, stationary, metrics, compare, unstable
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    bool quiet = false;
};

/// Runs one subcommand. Writes summary.json (kind, params, results, manifest,
/// seed) and metadata.json (timestamps) into out_dir next to the CSV artifacts.
int run(const Options& opts, std::ostream& out, std::ostream& err);

/// argv front end for run().
int main(int argc, char** argv);

} // namespace ranksim::cli
