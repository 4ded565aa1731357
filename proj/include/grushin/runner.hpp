#pragma once
// Command dispatch: builds the lab objects from a config, runs one of the
// experiment commands and writes deterministic artifacts plus a manifest.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "grushin/config.hpp"
#include "grushin/spectral.hpp"
#include "grushin/stability.hpp"

namespace grushin {

enum class Command { Forward, EigenScaling, Reconstruct, StabilitySweep, CheckClass, Harnack };

Command command_from_string(const std::string& name);
std::string command_to_string(Command cmd);

struct RunOptions {
    std::string out_dir;                // empty: use the config's output directory
    std::optional<std::uint64_t> seed;  // overrides ensemble.master_seed
    int threads = 1;
};

// Runs the command and returns the paths of the written artifacts.
std::vector<std::string> run_command(const ExperimentConfig& cfg, Command cmd,
                                     const RunOptions& opts = {});

// Shared lab assembly (also used by tests): grid, basis, both coefficient
// fields and the initial-data stack.
struct Lab {
    std::shared_ptr<const Grid1D> grid;
    std::shared_ptr<const SpectralBasisY> basis;
    std::shared_ptr<const CoefficientField> b;
    std::shared_ptr<const CoefficientField> btilde;
    ModeStack data;
};

Lab make_lab(const ExperimentConfig& cfg);

// Initial-data stack from per-mode profiles.
ModeStack make_stack(std::shared_ptr<const Grid1D> grid, std::shared_ptr<const SpectralBasisY> basis,
                     const std::vector<ModeInitConfig>& modes);

// Uniform storage stride giving about `target` stored steps while keeping
// round(T1/dt) a stored step.
int pick_store_stride(long n_steps, long j_snapshot, int requested, int target = 256);

StabilityProblem stability_problem_from(const ExperimentConfig& cfg, const Lab& lab);

} // namespace grushin
