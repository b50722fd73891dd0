#include "swarmfp/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>

namespace swarmfp {

namespace fs = std::filesystem;

namespace {

std::string fmt17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_time(double t)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", t);
    return buf;
}

std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos)
        return "";
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

double parse_double(const std::string& key, const std::string& value)
{
    try {
        size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size())
            throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw std::runtime_error("config: key '" + key +
                                 "' expects a number, got '" + value + "'");
    }
}

long parse_long(const std::string& key, const std::string& value)
{
    const double v = parse_double(key, value);
    if (v != std::floor(v))
        throw std::runtime_error("config: key '" + key +
                                 "' expects an integer, got '" + value + "'");
    return static_cast<long>(v);
}

bool parse_bool(const std::string& key, const std::string& value)
{
    if (value == "true" || value == "1")
        return true;
    if (value == "false" || value == "0")
        return false;
    throw std::runtime_error("config: key '" + key +
                             "' expects true/false, got '" + value + "'");
}

std::vector<double> parse_list(const std::string& key, const std::string& value)
{
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty())
            continue;
        out.push_back(parse_double(key, item));
    }
    return out;
}

void validate_spec(const ExperimentSpec& s)
{
    // Construction checks lambda + mu = 1, sigma2 > 0, delta > 0.
    try {
        ModelParams check(s.lambda, s.mu, s.sigma2, s.delta, s.x0, s.x0);
        (void)check;
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("config: ") + e.what());
    }
    if (!(s.xmin < s.xmax))
        throw std::runtime_error("config: grid.xmin < grid.xmax is required");
    if (s.n_cells < 8)
        throw std::runtime_error("config: grid.n violates n_cells >= 8");
    if (!(s.dt > 0.0))
        throw std::runtime_error("config: time.dt must be positive");
    if (!(s.t_final >= 0.0))
        throw std::runtime_error("config: time.t_final must be nonnegative");
    if (s.t_final > 0.0 && !(s.dt <= s.cadence && s.cadence <= s.t_final))
        throw std::runtime_error("config: dt <= cadence <= t_final is required");
    for (double tau : s.snapshot_times)
        if (tau < 0.0 || tau > s.t_final)
            throw std::runtime_error(
                "config: output.snapshots must lie within [0, t_final]");
    if (s.init.kind == InitSpec::Kind::gaussian && !(s.init.variance > 0.0))
        throw std::runtime_error("config: init.variance must be positive");
    if (s.init.kind == InitSpec::Kind::uniform && !(s.init.a < s.init.b))
        throw std::runtime_error("config: init.a < init.b is required");
    if (s.init.kind == InitSpec::Kind::from_file && s.init.path.empty())
        throw std::runtime_error("config: init.path is required for from_file");
    if (s.particles.enabled) {
        if (s.particles.n < 2)
            throw std::runtime_error("config: particles.n >= 2 is required");
        if (!(s.particles.dt > 0.0))
            throw std::runtime_error("config: particles.dt must be positive");
    }
}

ExperimentSpec parse_lines(std::istream& in)
{
    ExperimentSpec s;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(lineno) +
                                     ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));

        if (key == "model.lambda") s.lambda = parse_double(key, value);
        else if (key == "model.mu") s.mu = parse_double(key, value);
        else if (key == "model.sigma2") s.sigma2 = parse_double(key, value);
        else if (key == "model.delta") s.delta = parse_double(key, value);
        else if (key == "model.x0") s.x0 = parse_double(key, value);
        else if (key == "init.kind") {
            if (value == "gaussian") s.init.kind = InitSpec::Kind::gaussian;
            else if (value == "uniform") s.init.kind = InitSpec::Kind::uniform;
            else if (value == "from_file") s.init.kind = InitSpec::Kind::from_file;
            else if (value == "steady") s.init.kind = InitSpec::Kind::steady;
            else
                throw std::runtime_error(
                    "config: init.kind must be gaussian|uniform|from_file|steady");
        }
        else if (key == "init.center") s.init.center = parse_double(key, value);
        else if (key == "init.variance") s.init.variance = parse_double(key, value);
        else if (key == "init.a") s.init.a = parse_double(key, value);
        else if (key == "init.b") s.init.b = parse_double(key, value);
        else if (key == "init.path") s.init.path = value;
        else if (key == "grid.xmin") s.xmin = parse_double(key, value);
        else if (key == "grid.xmax") s.xmax = parse_double(key, value);
        else if (key == "grid.n") s.n_cells = static_cast<int>(parse_long(key, value));
        else if (key == "time.dt") s.dt = parse_double(key, value);
        else if (key == "time.t_final") s.t_final = parse_double(key, value);
        else if (key == "time.cadence") s.cadence = parse_double(key, value);
        else if (key == "solver.kind") {
            if (value == "continuous_kappa") s.kind = ModelKind::continuous_kappa;
            else if (value == "discontinuous_drift") s.kind = ModelKind::discontinuous_drift;
            else
                throw std::runtime_error(
                    "config: solver.kind must be continuous_kappa|discontinuous_drift");
        }
        else if (key == "solver.theta_rule") {
            if (value == "chang_cooper") s.theta_rule = ThetaRule::chang_cooper;
            else if (value == "centered") s.theta_rule = ThetaRule::centered;
            else
                throw std::runtime_error(
                    "config: solver.theta_rule must be chang_cooper|centered");
        }
        else if (key == "solver.compare_kinds") s.compare_kinds = parse_bool(key, value);
        else if (key == "particles.enabled") s.particles.enabled = parse_bool(key, value);
        else if (key == "particles.n") s.particles.n = static_cast<int>(parse_long(key, value));
        else if (key == "particles.seed") s.particles.seed = static_cast<std::uint64_t>(parse_long(key, value));
        else if (key == "particles.dt") s.particles.dt = parse_double(key, value);
        else if (key == "output.snapshots") s.snapshot_times = parse_list(key, value);
        else if (key == "output.dir") s.output_dir = value;
        else
            throw std::runtime_error("config: unknown key '" + key + "'");
    }
    validate_spec(s);
    return s;
}

std::string init_kind_name(InitSpec::Kind k)
{
    switch (k) {
        case InitSpec::Kind::gaussian: return "gaussian";
        case InitSpec::Kind::uniform: return "uniform";
        case InitSpec::Kind::from_file: return "from_file";
        case InitSpec::Kind::steady: return "steady";
    }
    return "gaussian";
}

std::string kind_name(ModelKind k)
{
    return k == ModelKind::continuous_kappa ? "continuous_kappa"
                                            : "discontinuous_drift";
}

// Linear interpolant through (x, f) points read from a snapshot-style CSV,
// zero outside the covered range.
std::function<double(double)> profile_from_file(const std::string& path)
{
    const CsvTable table = read_csv_table(path);
    const int xi = table.column_index("x");
    const int fi = table.column_index("f");
    if (xi < 0 || fi < 0)
        throw std::runtime_error("init file '" + path +
                                 "' needs columns 'x' and 'f'");
    auto xs = std::make_shared<std::vector<double>>();
    auto fsv = std::make_shared<std::vector<double>>();
    for (const auto& row : table.data) {
        xs->push_back(row[xi]);
        fsv->push_back(row[fi]);
    }
    if (xs->size() < 2)
        throw std::runtime_error("init file '" + path + "' has too few rows");
    return [xs, fsv](double x) {
        if (x <= xs->front() || x >= xs->back())
            return 0.0;
        const auto it = std::upper_bound(xs->begin(), xs->end(), x);
        const size_t j = it - xs->begin();
        const double w = (x - (*xs)[j - 1]) / ((*xs)[j] - (*xs)[j - 1]);
        return (1.0 - w) * (*fsv)[j - 1] + w * (*fsv)[j];
    };
}

std::function<double(double)> make_profile(const ExperimentSpec& s,
                                           const ModelParams& p,
                                           const SteadyMasses& m)
{
    switch (s.init.kind) {
        case InitSpec::Kind::gaussian: {
            const double c = s.init.center, v = s.init.variance;
            return [c, v](double x) { return normal_pdf(x - c, v); };
        }
        case InitSpec::Kind::uniform: {
            const double a = s.init.a, b = s.init.b;
            return [a, b](double x) {
                return (x >= a && x <= b) ? 1.0 / (b - a) : 0.0;
            };
        }
        case InitSpec::Kind::steady:
            return [p, m](double x) { return steady_profile(x, p, m); };
        case InitSpec::Kind::from_file:
            return profile_from_file(s.init.path);
    }
    throw std::logic_error("make_profile: unreachable");
}

void write_diagnostics_csv(const std::string& path,
                           const std::vector<DiagnosticsRecord>& records)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    out << "t,mass,mean,var,moment_entropy,H_f_fq,IH,LH,D2,ID,LD,lyapunov,"
           "l1_f_fq,l1_f_finf,H_finf_fq,ckl_gap\n";
    for (const auto& r : records) {
        out << fmt17(r.t) << ',' << fmt17(r.mass) << ',' << fmt17(r.mean) << ','
            << fmt17(r.var) << ',' << fmt17(r.moment_entropy) << ','
            << fmt17(r.H_f_fq) << ',' << fmt17(r.IH) << ',' << fmt17(r.LH)
            << ',' << fmt17(r.D2) << ',' << fmt17(r.ID) << ',' << fmt17(r.LD)
            << ',' << fmt17(r.lyapunov) << ',' << fmt17(r.l1_f_fq) << ','
            << fmt17(r.l1_f_finf) << ',' << fmt17(r.H_finf_fq) << ','
            << fmt17(r.ckl_gap) << '\n';
    }
}

void write_snapshot_csv(const std::string& path, const DensityField& f,
                        const DensityField& fq, const DensityField& finf)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    out << "x,f,f_q,f_inf\n";
    for (int i = 0; i < f.grid.n_cells; ++i)
        out << fmt17(f.grid.centers[i]) << ',' << fmt17(f.values[i]) << ','
            << fmt17(fq.values[i]) << ',' << fmt17(finf.values[i]) << '\n';
}

void write_histogram_csv(const std::string& path, const DensityField& h)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    out << "x,f_mc\n";
    for (int i = 0; i < h.grid.n_cells; ++i)
        out << fmt17(h.grid.centers[i]) << ',' << fmt17(h.values[i]) << '\n';
}

void write_decomposition_csv(const std::string& path,
                             const std::vector<EntropyDecomposition>& rows)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    out << "t,B,e1,e2,e3,e4,total\n";
    for (const auto& d : rows)
        out << fmt17(d.t) << ',' << fmt17(d.B) << ',' << fmt17(d.e1) << ','
            << fmt17(d.e2) << ',' << fmt17(d.e3) << ',' << fmt17(d.e4) << ','
            << fmt17(d.total) << '\n';
}

struct ViolationCounts {
    int eq16 = 0;
    int lyapunov = 0;
    int ckl = 0;
    int lh_bound = 0;
    int ld_bound = 0;
};

ViolationCounts count_violations(const std::vector<DiagnosticsRecord>& recs,
                                 const ModelParams& p, const SteadyMasses& m)
{
    ViolationCounts c;
    double prev_lyap = std::numeric_limits<double>::infinity();
    for (const auto& r : recs) {
        if (r.D2 > 2.0 * r.IH + 1e-6)
            ++c.eq16;
        if (r.lyapunov > prev_lyap + 1e-8)
            ++c.lyapunov;
        prev_lyap = r.lyapunov;
        if (r.ckl_gap < -1e-8)
            ++c.ckl;
        const double decay = std::exp(-p.lambda * r.t);
        const double pref = decay * (p.lambda * p.mu / p.sigma2) * std::abs(p.u0 - p.x0);
        const double lh_bound = pref * (std::abs(p.u0 - p.x0) * decay + p.delta);
        if (std::abs(r.LH) > lh_bound + 1e-12)
            ++c.lh_bound;
        const double ld_bound = 2.0 * std::sqrt(m.m1) / p.sigma() * pref;
        if (std::abs(r.LD) > ld_bound + 1e-12)
            ++c.ld_bound;
    }
    return c;
}

void write_summary(const std::string& path, const ExperimentSpec& spec,
                   const RunOutput& out)
{
    const auto& recs = out.pde.trajectory;
    const ModelParams& p = out.pde.params;
    const ViolationCounts v = count_violations(recs, p, out.pde.masses);

    std::ofstream os(path);
    if (!os)
        throw std::runtime_error("cannot write " + path);
    os << "kind = " << kind_name(out.kind) << "\n";
    os << "u0_effective = " << fmt17(p.u0) << "\n";
    os << "samples = " << recs.size() << "\n";
    os << "max_mass_drift = " << fmt17(out.pde.max_mass_drift) << "\n";
    os << "min_cell_ever = " << fmt17(out.pde.min_cell_ever) << "\n";
    if (!recs.empty()) {
        os << "final_l1_to_f_inf = " << fmt17(recs.back().l1_f_finf) << "\n";
        os << "final_l1_to_f_q = " << fmt17(recs.back().l1_f_fq) << "\n";
    }

    // Decay-rate fits over the post-transient window; skipped when the
    // series is degenerate (stationary runs).
    const double t_lo = 2.0 / std::max(p.lambda, 1e-12);
    std::vector<std::pair<double, double>> mean_series, entropy_series;
    for (const auto& r : recs) {
        mean_series.emplace_back(r.t, std::abs(r.mean - p.x0));
        entropy_series.emplace_back(r.t, r.H_finf_fq);
    }
    try {
        const RateFit fit = fit_rate(mean_series, t_lo, spec.t_final,
                                     RateFit::Model::exponential);
        os << "mean_decay_rate = " << fmt17(fit.rate) << "\n";
        os << "mean_decay_residual = " << fmt17(fit.residual) << "\n";
    } catch (const std::exception&) {
        os << "mean_decay_rate = n/a\n";
    }
    try {
        const RateFit fit = fit_rate(entropy_series, t_lo, spec.t_final,
                                     RateFit::Model::exponential);
        os << "H_finf_fq_rate = " << fmt17(fit.rate) << "\n";
        os << "H_finf_fq_residual = " << fmt17(fit.residual) << "\n";
    } catch (const std::exception&) {
        os << "H_finf_fq_rate = n/a\n";
    }

    os << "violations_eq16 = " << v.eq16 << "\n";
    os << "violations_lyapunov = " << v.lyapunov << "\n";
    os << "violations_ckl = " << v.ckl << "\n";
    os << "violations_LH_bound = " << v.lh_bound << "\n";
    os << "violations_LD_bound = " << v.ld_bound << "\n";

    if (out.final_histogram) {
        os << "mc_hist_l1_final = " << fmt17(out.hist_l1_final) << "\n";
        os << "mc_hist_overflow = " << out.histogram_overflow << "\n";
        int mean_violations = 0;
        for (const auto& s : out.particle_samples) {
            const double expected = mean_closed_form(s.t, p);
            if (std::abs(s.mean - expected) > 3.0 * s.se)
                ++mean_violations;
        }
        os << "mc_mean_3se_violations = " << mean_violations << "\n";
    }
}

// Advances the particle ensemble to the next sample time and appends the
// (mean, se) sample.
void sample_particles(std::vector<ParticleSample>& samples,
                      const ParticleEnsemble& e)
{
    ParticleSample s;
    s.t = e.t;
    s.mean = empirical_mean(e);
    const double n = static_cast<double>(e.positions.size());
    const double var = (e.positions - s.mean).square().sum() / (n - 1.0);
    s.se = std::sqrt(var / n);
    samples.push_back(s);
}

}  // namespace

ExperimentSpec parse_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("config: cannot read '" + path + "'");
    return parse_lines(in);
}

ExperimentSpec parse_config_text(const std::string& text)
{
    std::istringstream in(text);
    return parse_lines(in);
}

std::string serialize_config(const ExperimentSpec& s)
{
    std::ostringstream os;
    os << "model.lambda = " << fmt17(s.lambda) << "\n";
    os << "model.mu = " << fmt17(s.mu) << "\n";
    os << "model.sigma2 = " << fmt17(s.sigma2) << "\n";
    os << "model.delta = " << fmt17(s.delta) << "\n";
    os << "model.x0 = " << fmt17(s.x0) << "\n";
    os << "init.kind = " << init_kind_name(s.init.kind) << "\n";
    os << "init.center = " << fmt17(s.init.center) << "\n";
    os << "init.variance = " << fmt17(s.init.variance) << "\n";
    os << "init.a = " << fmt17(s.init.a) << "\n";
    os << "init.b = " << fmt17(s.init.b) << "\n";
    if (!s.init.path.empty())
        os << "init.path = " << s.init.path << "\n";
    os << "grid.xmin = " << fmt17(s.xmin) << "\n";
    os << "grid.xmax = " << fmt17(s.xmax) << "\n";
    os << "grid.n = " << s.n_cells << "\n";
    os << "time.dt = " << fmt17(s.dt) << "\n";
    os << "time.t_final = " << fmt17(s.t_final) << "\n";
    os << "time.cadence = " << fmt17(s.cadence) << "\n";
    os << "solver.kind = " << kind_name(s.kind) << "\n";
    os << "solver.theta_rule = "
       << (s.theta_rule == ThetaRule::chang_cooper ? "chang_cooper" : "centered")
       << "\n";
    os << "solver.compare_kinds = " << (s.compare_kinds ? "true" : "false") << "\n";
    os << "particles.enabled = " << (s.particles.enabled ? "true" : "false") << "\n";
    os << "particles.n = " << s.particles.n << "\n";
    os << "particles.seed = " << s.particles.seed << "\n";
    os << "particles.dt = " << fmt17(s.particles.dt) << "\n";
    os << "output.snapshots = ";
    for (size_t i = 0; i < s.snapshot_times.size(); ++i)
        os << (i ? "," : "") << fmt17(s.snapshot_times[i]);
    os << "\n";
    os << "output.dir = " << s.output_dir << "\n";
    return os.str();
}

ExperimentSpec preset(const std::string& name)
{
    ExperimentSpec s;
    if (name == "steady-check") {
        s.lambda = 1.0;
        s.mu = 0.0;
        s.init.kind = InitSpec::Kind::steady;
        s.snapshot_times = {0.0, 10.0};
    } else if (name == "convergence") {
        s.lambda = 0.5;
        s.mu = 0.5;
        s.init.kind = InitSpec::Kind::gaussian;
        s.init.center = 2.0;
        s.init.variance = 0.25;
        s.snapshot_times = {0.0, 1.0, 5.0, 10.0};
    } else if (name == "particles-vs-pde") {
        s.lambda = 0.5;
        s.mu = 0.5;
        s.init.kind = InitSpec::Kind::gaussian;
        s.init.center = 2.0;
        s.init.variance = 0.25;
        s.t_final = 1.0;
        s.snapshot_times = {0.0, 0.5, 1.0};
        s.particles.enabled = true;
        s.particles.n = 100000;
        s.particles.seed = 42;
        s.particles.dt = 1e-3;
    } else if (name == "disc-vs-cont") {
        s.lambda = 1.0;
        s.mu = 0.0;
        s.init.kind = InitSpec::Kind::gaussian;
        s.init.center = 2.0;
        s.init.variance = 0.25;
        s.t_final = 20.0;
        s.snapshot_times = {0.0, 5.0, 20.0};
        s.compare_kinds = true;
    } else {
        throw std::runtime_error("unknown preset '" + name +
                                 "' (expected steady-check, convergence, "
                                 "particles-vs-pde, disc-vs-cont)");
    }
    return s;
}

int CsvTable::column_index(const std::string& name) const
{
    for (size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name)
            return static_cast<int>(i);
    return -1;
}

CsvTable read_csv_table(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot read '" + path + "'");
    CsvTable table;
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("empty CSV '" + path + "'");
    std::stringstream hs(trim(line));
    std::string col;
    while (std::getline(hs, col, ','))
        table.columns.push_back(trim(col));
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty())
            continue;
        std::vector<double> row;
        std::stringstream rs(line);
        std::string cell;
        while (std::getline(rs, cell, ','))
            row.push_back(parse_double("csv", trim(cell)));
        if (row.size() != table.columns.size())
            throw std::runtime_error("ragged CSV row in '" + path + "'");
        table.data.push_back(std::move(row));
    }
    return table;
}

RateFit fit_report(const std::string& diagnostics_path,
                   const std::string& column, double t_lo, double t_hi,
                   RateFit::Model model, double offset)
{
    const CsvTable table = read_csv_table(diagnostics_path);
    const int ti = table.column_index("t");
    const int ci = table.column_index(column);
    if (ti < 0)
        throw std::runtime_error("'" + diagnostics_path + "' has no 't' column");
    if (ci < 0) {
        std::string available;
        for (const auto& c : table.columns)
            available += (available.empty() ? "" : ", ") + c;
        throw std::runtime_error("no column '" + column + "' in '" +
                                 diagnostics_path + "' (available: " +
                                 available + ")");
    }
    std::vector<std::pair<double, double>> series;
    for (const auto& row : table.data)
        series.emplace_back(row[ti], std::abs(row[ci] - offset));
    const RateFit fit = fit_rate(series, t_lo, t_hi, model);
    std::cout << (model == RateFit::Model::exponential ? "exponential"
                                                       : "power")
              << " fit of " << column << " over [" << fmt_time(t_lo) << ", "
              << fmt_time(t_hi) << "]\n"
              << "rate = " << fmt17(fit.rate) << "\n"
              << "intercept = " << fmt17(fit.intercept) << "\n"
              << "residual = " << fmt17(fit.residual) << "\n";
    return fit;
}

ExperimentResult run_experiment(const ExperimentSpec& spec)
{
    ExperimentResult result;
    result.spec = spec;

    fs::create_directories(spec.output_dir);
    {
        std::ofstream os(fs::path(spec.output_dir) / "config.resolved");
        if (!os)
            throw std::runtime_error("output dir '" + spec.output_dir +
                                     "' is not writable");
        os << serialize_config(spec);
    }

    const std::vector<ModelKind> kinds =
        spec.compare_kinds
            ? std::vector<ModelKind>{ModelKind::continuous_kappa,
                                     ModelKind::discontinuous_drift}
            : std::vector<ModelKind>{spec.kind};

    for (ModelKind kind : kinds) {
        const std::string dir =
            spec.compare_kinds
                ? (fs::path(spec.output_dir) /
                   (kind == ModelKind::continuous_kappa ? "continuous"
                                                        : "discontinuous"))
                      .string()
                : spec.output_dir;
        fs::create_directories(dir);

        RunOutput out;
        out.kind = kind;
        out.directory = dir;

        ModelParams p(spec.lambda, spec.mu, spec.sigma2, spec.delta, spec.x0,
                      spec.x0);
        const SteadyMasses m = steady_masses(p);
        const Grid1D grid = build_grid(spec.xmin, spec.xmax, spec.n_cells);
        const auto profile = make_profile(spec, p, m);

        SchemeConfig scheme;
        scheme.dt = spec.dt;
        scheme.t_final = spec.t_final;
        scheme.cadence = spec.cadence;
        scheme.theta_rule = spec.theta_rule;

        // Snapshots are captured at the first sample reaching each requested
        // time (requested times should be cadence multiples to land exactly).
        std::vector<double> pending = spec.snapshot_times;
        std::sort(pending.begin(), pending.end());
        size_t next_snap = 0;
        std::vector<std::pair<double, DensityField>> snapshots;
        DensityField pde_final_for_mc;

        out.pde = run(p, grid, scheme, kind, profile,
                      [&](const DiagnosticsRecord& rec, const SolverState& st) {
                          while (next_snap < pending.size() &&
                                 rec.t >= pending[next_snap] - 1e-9) {
                              snapshots.emplace_back(pending[next_snap],
                                                     st.field);
                              ++next_snap;
                          }
                      });

        const ModelParams& eff = out.pde.params;
        const SteadyMasses& masses = out.pde.masses;
        const DensityField finf = project_density(
            [&](double x) { return steady_profile(x, eff, masses); }, grid,
            true);
        for (const auto& [tau, field] : snapshots) {
            const double center = attraction_center(mean_closed_form(tau, eff), eff);
            const DensityField fq = project_density(
                [&](double x) { return quasi_profile(x, center, eff, masses); },
                grid, true);
            write_snapshot_csv(
                (fs::path(dir) / ("snapshot_t" + fmt_time(tau) + ".csv")).string(),
                field, fq, finf);
        }

        if (spec.particles.enabled) {
            const DensityField f0 = project_density(profile, grid, true);
            ParticleEnsemble ensemble =
                sample_initial(f0, spec.particles.n, spec.particles.seed);
            sample_particles(out.particle_samples, ensemble);
            size_t next_mc_snap = 0;
            while (next_mc_snap < pending.size() &&
                   pending[next_mc_snap] <= 1e-9) {
                const Histogram h = histogram_density(ensemble, grid);
                write_histogram_csv(
                    (fs::path(dir) / "mc_histogram_t0.csv").string(), h.field);
                ++next_mc_snap;
            }

            const long steps_per_sample =
                std::lround(spec.cadence / spec.particles.dt);
            if (steps_per_sample < 1 ||
                std::abs(spec.cadence - steps_per_sample * spec.particles.dt) >
                    1e-9 * spec.cadence)
                throw std::runtime_error(
                    "config: cadence must be an integer multiple of particles.dt");
            const long n_samples =
                static_cast<long>(std::floor(spec.t_final / spec.cadence + 1e-9));
            for (long s = 1; s <= n_samples; ++s) {
                for (long k = 0; k < steps_per_sample; ++k)
                    ensemble = em_step(ensemble, spec.particles.dt, eff);
                ensemble.t = s * spec.cadence;
                sample_particles(out.particle_samples, ensemble);
                while (next_mc_snap < pending.size() &&
                       ensemble.t >= pending[next_mc_snap] - 1e-9) {
                    const Histogram h = histogram_density(ensemble, grid);
                    write_histogram_csv(
                        (fs::path(dir) /
                         ("mc_histogram_t" + fmt_time(pending[next_mc_snap]) + ".csv"))
                            .string(),
                        h.field);
                    ++next_mc_snap;
                }
            }
            const Histogram h = histogram_density(ensemble, grid);
            out.final_histogram = h.field;
            out.histogram_overflow = h.overflow;
            out.hist_l1_final =
                l1_distance(h.field, out.pde.final_state.field);

            std::ofstream ps(fs::path(dir) / "particles.csv");
            ps << "t,mc_mean,mc_se\n";
            for (const auto& s : out.particle_samples)
                ps << fmt17(s.t) << ',' << fmt17(s.mean) << ',' << fmt17(s.se)
                   << '\n';
        }

        write_diagnostics_csv((fs::path(dir) / "diagnostics.csv").string(),
                              out.pde.trajectory);

        // Four-set entropy decomposition at each sample where it is defined.
        for (const auto& rec : out.pde.trajectory) {
            const double B = (out.pde.params.u0 - out.pde.params.x0) *
                             std::exp(-out.pde.params.lambda * rec.t);
            if (std::abs(B) >= 2.0 * spec.delta)
                continue;
            out.decompositions.push_back(entropy_vs_quasi_decomposition(
                out.pde.params, out.pde.masses, rec.t));
        }
        if (!out.decompositions.empty())
            write_decomposition_csv(
                (fs::path(dir) / "decomposition.csv").string(),
                out.decompositions);

        write_summary((fs::path(dir) / "summary.txt").string(), spec, out);

        if (out.pde.max_mass_drift > 1e-12 || out.pde.min_cell_ever < 0.0)
            result.exit_status = 1;
        result.outputs.push_back(std::move(out));
    }

    if (spec.compare_kinds && result.outputs.size() == 2) {
        result.cross_kind_l1 =
            l1_distance(result.outputs[0].pde.final_state.field,
                        result.outputs[1].pde.final_state.field);
        std::ofstream os(fs::path(spec.output_dir) / "summary.txt");
        os << "cross_kind_l1_final = " << fmt17(result.cross_kind_l1) << "\n";
        os << "continuous_final_l1_to_f_inf = "
           << fmt17(result.outputs[0].pde.trajectory.back().l1_f_finf) << "\n";
        os << "discontinuous_final_l1_to_f_inf = "
           << fmt17(result.outputs[1].pde.trajectory.back().l1_f_finf) << "\n";
    }
    return result;
}

}  // namespace swarmfp
