#pragma once

#include <optional>
#include <string>
#include <vector>

#include "swarmfp/particles.hpp"
#include "swarmfp/solver.hpp"

namespace swarmfp {

/// Initial density choices: a Gaussian bump, a uniform block, a density read
/// back from a snapshot-style CSV, or the closed-form steady profile.
struct InitSpec {
    enum class Kind { gaussian, uniform, from_file, steady };
    Kind kind = Kind::gaussian;
    double center = 2.0;
    double variance = 0.25;
    double a = 0.0;
    double b = 0.0;
    std::string path;

    bool operator==(const InitSpec&) const = default;
};

struct ParticleSpec {
    bool enabled = false;
    int n = 100000;
    std::uint64_t seed = 42;
    double dt = 1e-3;

    bool operator==(const ParticleSpec&) const = default;
};

/// Fully resolved description of one experiment; what config.resolved echoes.
struct ExperimentSpec {
    double lambda = 1.0;
    double mu = 0.0;
    double sigma2 = 1.0;
    double delta = 1.0;
    double x0 = 0.0;
    InitSpec init;
    double xmin = -12.0;
    double xmax = 12.0;
    int n_cells = 1200;
    double dt = 1e-3;
    double t_final = 10.0;
    double cadence = 0.05;
    ModelKind kind = ModelKind::continuous_kappa;
    ThetaRule theta_rule = ThetaRule::chang_cooper;
    bool compare_kinds = false;
    ParticleSpec particles;
    std::vector<double> snapshot_times = {0.0, 1.0, 5.0, 10.0};
    std::string output_dir = ".";

    bool operator==(const ExperimentSpec&) const = default;
};

/// Parses the flat `section.key = value` format with # comments. Unknown keys
/// and violated invariants are fatal with the offender named.
ExperimentSpec parse_config(const std::string& path);
ExperimentSpec parse_config_text(const std::string& text);

/// Serializes every key in a fixed order at 17 significant digits; parsing the
/// result reproduces the spec exactly.
std::string serialize_config(const ExperimentSpec& spec);

/// Named scenario presets: steady-check, convergence, particles-vs-pde,
/// disc-vs-cont.
ExperimentSpec preset(const std::string& name);

struct ParticleSample {
    double t = 0;
    double mean = 0;
    double se = 0;  ///< sample standard deviation / sqrt(n)
};

/// Everything one run produced, kept in memory for callers that want to test
/// against it; all of it is also written to the output files.
struct RunOutput {
    ModelKind kind = ModelKind::continuous_kappa;
    RunResult pde;
    std::vector<EntropyDecomposition> decompositions;
    std::vector<ParticleSample> particle_samples;
    std::optional<DensityField> final_histogram;
    long histogram_overflow = 0;
    double hist_l1_final = 0;
    std::string directory;
};

struct ExperimentResult {
    ExperimentSpec spec;
    std::vector<RunOutput> outputs;  ///< one entry, or two when compare_kinds
    double cross_kind_l1 = 0;
    int exit_status = 0;
};

/// Runs the experiment (both kinds when compare_kinds), writing
/// diagnostics.csv, snapshot_t<tau>.csv, decomposition.csv, summary.txt,
/// config.resolved and, with particles enabled, particles.csv and
/// mc_histogram_t<tau>.csv under spec.output_dir.
ExperimentResult run_experiment(const ExperimentSpec& spec);

/// Simple CSV-with-header reader used by the rates subcommand and tests.
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> data;  ///< data[row][col]

    int column_index(const std::string& name) const;
};

CsvTable read_csv_table(const std::string& path);

/// Fits a decay rate to one diagnostics column over [t_lo, t_hi], printing the
/// result. `offset` is subtracted from the column (|value - offset| is fitted),
/// so e.g. the mean column can be measured against its limit.
RateFit fit_report(const std::string& diagnostics_path,
                   const std::string& column, double t_lo, double t_hi,
                   RateFit::Model model, double offset = 0.0);

}  // namespace swarmfp
