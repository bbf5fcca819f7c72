#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cgolab/cgo.hpp"
#include "cgolab/geometry.hpp"

namespace cgolab {

struct Tolerances {
    double slope_max = -0.05;       // residual decay slope bound
    double uniform_factor = 1.1;    // ||u_app|| <= factor C0 for s >= 8
    double uniform_s_min = 8.0;
    double support_leak = 1e-10;
    double green_rel = 0.05;        // |I_boundary - I_volume| relative
    double conj_rel = 0.005;        // |I_conjugated - I_boundary| relative at s = conj_s
    double conj_s = 8.0;
    double identity_rel = 0.15;     // |I(s_max) - oracle| / |oracle|
    double offsupport_rel = 0.10;   // |I(s_max)| / |on-center oracle|
    double zero_scale = 1e-3;       // q1 = q2 and zero-phantom floors
    double fbp_rel = 0.10;
    double e2e_rel = 0.25;
    double peak_h = 2.0;            // peak location, grid steps
    double dilate_h = 3.0;          // localization containment, grid steps
    double depth_h = 3.0;           // certified depth, grid steps
    double trace_tol = 1e-6;        // cauchy_equal_on
    double deriv_tol = 1e-6;
};

struct ExperimentConfig {
    // domain
    int n = 128;
    double half_width = 2.5;
    double radius = 1.0;
    Vec3 center{};
    // cgo
    double beta = 0.15;
    double eps0 = 0.1;
    std::vector<double> s_list{6, 8, 12, 16, 24};
    double tau = -1.0;  // negative: 1e-3 s
    int u2_iters = 50;
    double u2_tol = 1e-6;
    int u2_restart = 10;
    // cutoffs
    double r_cut_factor = 1.1;
    double width_factor = 0.3;
    // sampling and boundary mesh
    int dirs = 200;
    int offsets = 41;
    double margin = 0.1;
    int mesh_theta = 48;
    int mesh_phi = 96;
    int interp_order = 8;
    // phantoms by name
    std::map<std::string, Phantom> phantoms;
    // E1
    std::vector<std::string> est_phantoms{"zero", "centered", "offset"};
    Vec3 est_normal{0, 0, 1};
    std::vector<double> est_offsets{0.0};
    bool est_u2 = false;
    // E2
    std::string id_q1 = "zero";
    std::string id_q2 = "centered";
    Vec3 id_normal{0, 0, 1};
    std::vector<double> id_offsets{0.0, 0.9};
    bool id_u2 = true;
    // E3
    std::string rec_phantom = "fbp_gauss";
    std::string rec_shifted = "shifted";
    bool rec_e2e = true;
    int rec_e2e_dirs = 200;
    int rec_e2e_offsets = 41;
    bool rec_e2e_u2 = false;
    bool apodize = true;
    // E4
    std::string loc_phantom = "contained";
    std::string loc_touching = "touching";
    double loc_c_radius = 0.4;
    double loc_r = 0.6;
    int loc_dirs = 50;
    int loc_offsets = 41;
    double loc_vanish_rel = 1e-3;
    std::string loc_route = "both";  // direct | boundary | both
    // transform utilities
    std::string tr_phantom = "fbp_gauss";
    // run
    std::uint64_t seed = 0;
    int workers = 1;
    Tolerances tol;

    ExperimentConfig();

    BallDomain domain() const { return BallDomain(center, radius, half_width, n); }
    CutoffParams cutoffs() const { return {r_cut_factor, width_factor, {}}; }
    const Phantom& phantom(const std::string& name) const;
    double s_max() const;

    /// Validates every module precondition; throws std::invalid_argument with an actionable message.
    void validate() const;
    /// Drops s values violating 2 pi / s >= 3 h or s^-beta >= 8 h; returns warnings.
    std::vector<std::string> restrict_sweep();
};

/// Default phantom table used by the experiments.
std::map<std::string, Phantom> default_phantoms();

/// Canonical INI text (shortest round-trip doubles). `workers` is a runtime setting and is not written.
std::string to_ini(const ExperimentConfig& cfg);
ExperimentConfig parse_ini(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// SHA-256 hex digest of the canonical INI text.
std::string config_hash(const ExperimentConfig& cfg);

/// Shortest text that parses back to the same double.
std::string format_double(double v);

}  // namespace cgolab
