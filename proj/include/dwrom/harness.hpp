#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dwrom/artifacts.hpp"
#include "dwrom/eim.hpp"
#include "dwrom/rom.hpp"

namespace dwrom {

// Per-benchmark experimental protocol: online test horizons, offline
// parameter ranges, and the out-of-training presets, with provenance notes.
struct CatalogEntry {
    std::string model;
    std::string benchmark;
    double online_t_end = 0.0;       // in-training online horizon
    double offline_t_end = 0.0;      // horizon snapshots are collected over
    double h0_lo = 1.0, h0_hi = 1.0;  // offline h0 range (absolute)
    double a0_lo = 0.0, a0_hi = 0.0;  // offline a0 range; equal bounds = fixed
    json out_of_training;             // named override preset
    std::string provenance;
};

const CatalogEntry& catalog_lookup(const std::string& model, const std::string& benchmark);
std::vector<CatalogEntry> catalog_all();

struct RunConfig {
    std::string model = "bbm";        // bbm | eb
    std::string benchmark = "monochromatic";
    std::string reduction = "fom";    // fom | pdrom | eimrom | phi_only
    BenchmarkOverrides overrides;

    double tol_pod = -1.0;
    int n_rb = -1;
    double tol_eim = -1.0;  // relative to the max training-flux sup norm
    int n_eim = -1;

    int n_snapshots = 1000;
    int n_params = 1;
    uint64_t seed = 0;

    std::string out_dir = "out";
    std::string basis_path;   // required for reduced runs unless offline_inline
    std::string eim_path;
    std::string snapshots_path;  // flux snapshots, used by the compare study
    bool offline_inline = false;  // build basis/EIM on the fly before the run
    bool write_snapshots = true;

    std::string eb_variant = "psi";  // psi | fused
    int n_profile_times = 5;
    int n_error_samples = 101;
    int timing_reps = 1;
    std::optional<double> online_t_end;  // defaults to the catalog horizon

    json raw;  // original document, echoed into reports
};

RunConfig run_config_from_json(const json& doc);

struct RunReport {
    std::string model, benchmark, reduction;
    int nh = 0;
    int n_rb = 0, n_eim = 0;
    long n_steps = 0;

    double wall_total = 0.0;
    double wall_solver = 0.0;
    double wall_flux = 0.0;
    double wall_other = 0.0;

    double fom_wall_total = 0.0;   // reference run, reduced cases only
    double time_ratio = 0.0;       // reduced wall / FOM wall
    double error_l2_final = -1.0;
    double error_l2_avg = -1.0;

    std::string failure_stage;  // empty on success
    json metadata;

    bool ok() const { return failure_stage.empty(); }
    json to_json() const;
};

// Executes a FOM or reduced simulation, writes solution profiles and the
// report; simulation aborts are captured into the report.
RunReport run_online(const RunConfig& cfg);

// Snapshot collection over the parameter schedule, POD + EIM construction,
// artifact persistence. Deterministic for a fixed seed.
json run_offline(const RunConfig& cfg);

// pdROM/EIMROM error map over an (a0, h0) grid against fresh FOM references.
struct SweepSpec {
    double a0_lo = 0.0, a0_hi = 0.0;
    double h0_lo = 0.0, h0_hi = 0.0;
    int na = 5, nh_cells = 5;
    std::optional<double> t_end;
};
json run_sweep(const RunConfig& cfg, const SweepSpec& spec);

// Error/time-ratio study over reduced dimensions, one row per configuration.
struct CompareSpec {
    std::vector<int> n_rb_list;
    std::vector<double> tol_eim_list;  // empty: pdROM only
    std::optional<double> t_end;
};
json run_compare(const RunConfig& cfg, const CompareSpec& spec);

// CSV helpers shared by the subcommands (header rows fixed by contract).
void write_profile_csv(const std::string& path, const std::vector<double>& times,
                       const Vec& x, const Mat& profiles);
void write_study_csv(const std::string& path, const json& rows);
void write_sweep_csv(const std::string& path, const json& rows);

std::vector<double> uniform_times(double t_end, int n);

}  // namespace dwrom
