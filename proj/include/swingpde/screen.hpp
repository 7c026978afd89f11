#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "swingpde/fields.hpp"
#include "swingpde/network.hpp"
#include "swingpde/stepper.hpp"

namespace swingpde {

/// One nested key/value document driving the pipeline; every CLI flag has a
/// counterpart here and flags override. Unknown keys are rejected.
struct RunConfig {
    struct Paths {
        std::string network;
        std::string grid;
        std::string fields_dir;
        std::string out_dir = ".";
    } paths;

    struct Grid {
        double delta = 50.0;
        double dilation = 75.0;
        bool tight = false;
    } grid;

    struct Fields {
        double kappa = 0.2;
        double smooth_tol = 1e-4;
        long max_iterations = 200000;
        double cutoff = 0.0;      ///< 0 disables the low-pass stage
        std::string pad = "mirror";
    } fields;

    SimParams sim{1e-3, 20.0, 10};

    std::vector<int> probes;
    std::vector<FaultScenario> scenarios;
    int workers = 1;

    static RunConfig from_file(const std::filesystem::path& path);
    static RunConfig from_json_text(const std::string& text);
};

struct ScenarioOutcome {
    FaultScenario scenario;
    double terminal_global_omega = 0.0;
    double max_abs_omega = 0.0;       ///< over probes and samples
    double wall_seconds = 0.0;
    std::string trajectory_file;
};

struct ScreenResult {
    double setup_seconds = 0.0;       ///< load/build + assembly + factorisation + steady state
    std::vector<ScenarioOutcome> outcomes;
    std::string summary_file;
};

/// Run every scenario in the config against one cached factorisation and
/// shared pre-fault steady state; scenarios run concurrently on `workers`
/// threads. Emits one trajectory per scenario plus a ranked summary
/// (by |terminal frequency|, then max deviation). Output files are
/// byte-identical across worker counts.
ScreenResult run_screen(const RunConfig& config);

}  // namespace swingpde
