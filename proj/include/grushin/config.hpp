#pragma once
// Declarative experiment configuration: a strict JSON document with defaults
// for every key, unknown-key rejection and exhaustive violation reporting.

#include <cstdint>
#include <string>
#include <vector>

#include "grushin/grid.hpp"
#include "grushin/mode_pde.hpp"

namespace grushin {

struct GeometryConfig {
    double x_min = -1.0;
    double x_max = 1.0;
    SubdomainSpec support{0.3, 0.9, 0.3};
    Interval omega1{-0.9, -0.4};
    double L2 = 3.14159265358979323846;
};

struct DiscretizationConfig {
    int n_cells = 512;
    double dt = 5e-4;
    int N_max = 16;
    int n_y_quad = 64;
    int store_stride = 0; // 0 = choose automatically (about 256 stored steps)
    int heat_steps = 2048;
};

struct PhysicsConfig {
    double gamma = 0.5;
    double s = 2.0;
    double m = 0.5;
    double M = 2.0;
    double L_b = 50.0;
};

struct ProtocolConfig {
    double T = 1.0;
    double T1 = 0.25;
    double t1 = 0.05;
    double K1 = 1e-9;
    int N = 1;
    Scheme scheme = Scheme::CrankNicolson;
};

struct ModeInitConfig {
    int n = 1;
    double scale = 1.0;
    ProfileSpec profile; // interpreted as the data profile (bump has no 1+ baseline)
};

struct EnsembleConfig {
    int count = 10;
    std::uint64_t master_seed = 12345;
    double noise_level = 0.0;
    double jitter = 0.05; // relative jitter of the twin-coefficient parameters
};

struct SweepsConfig {
    int n_lo = 8;
    int n_hi = 64;
    std::vector<int> N_list{1, 2, 4, 8, 16};
    std::vector<double> T1_list{0.2, 0.5, 1.0, 2.0};
};

struct OutputConfig {
    std::string directory = "out";
    bool write_csv = true;
    bool write_trajectories = false;
};

struct ExperimentConfig {
    GeometryConfig geometry;
    DiscretizationConfig discretization;
    PhysicsConfig physics;
    ProtocolConfig protocol;
    ProfileSpec coeff_b = ProfileSpec::constant_profile(1.0);
    ProfileSpec coeff_btilde = ProfileSpec::constant_profile(1.0);
    std::vector<ModeInitConfig> initial_modes; // default set in parse/make_default
    EnsembleConfig ensemble;
    SweepsConfig sweeps;
    OutputConfig output;

    static ExperimentConfig defaults();
};

// Parse and validate; throws ConfigError listing every violation, not just
// the first. Unknown keys anywhere in the document are violations.
ExperimentConfig parse_config_text(const std::string& json_text);
ExperimentConfig parse_config_file(const std::string& path);

// The fully resolved document (defaults filled in), as written next to outputs.
std::string resolved_config_json(const ExperimentConfig& cfg);

// Value of an initial-data profile: unlike coefficient profiles there is no
// baseline of 1; a bump is amplitude * mollifier and a table is 0 off-range.
double evaluate_initial_profile(const ProfileSpec& profile, double x);

Scheme scheme_from_string(const std::string& name);
std::string scheme_to_string(Scheme scheme);

} // namespace grushin
