// Acceptance suite: runs the scenario presets once each and evaluates every
// acceptance criterion at its stated tolerance, printing one line per
// criterion. Exit status is the number of failed criteria.

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "swarmfp/experiment.hpp"

using namespace swarmfp;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

std::string num(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

class Harness {
public:
    Harness()
    {
        base_ = fs::temp_directory_path() /
                ("swarmfp_acceptance_" + std::to_string(::getpid()));
        fs::remove_all(base_);
        fs::create_directories(base_);
    }

    const ExperimentResult& steady() { return cached(steady_, "steady-check"); }
    const ExperimentResult& convergence() { return cached(conv_, "convergence"); }
    const ExperimentResult& particles() { return cached(parts_, "particles-vs-pde"); }
    const ExperimentResult& disc_vs_cont() { return cached(dc_, "disc-vs-cont"); }

    // Convergence scenario sampled finely enough to resolve the balance
    // derivatives; the halved run divides dt, dx and the sampling cadence by 2.
    const ExperimentResult& balance_default()
    {
        if (!balance_default_) {
            ExperimentSpec s = preset("convergence");
            s.cadence = 5.0 * s.dt;
            s.snapshot_times = {};
            s.output_dir = (base_ / "balance-default").string();
            balance_default_ = run_experiment(s);
        }
        return *balance_default_;
    }
    const ExperimentResult& balance_halved()
    {
        if (!balance_halved_) {
            ExperimentSpec s = preset("convergence");
            s.dt /= 2.0;
            s.n_cells *= 2;
            s.cadence = 5.0 * s.dt;
            s.snapshot_times = {};
            s.output_dir = (base_ / "balance-halved").string();
            balance_halved_ = run_experiment(s);
        }
        return *balance_halved_;
    }

    // Every preset run output (both kinds of disc-vs-cont).
    std::vector<const RunOutput*> all_outputs()
    {
        std::vector<const RunOutput*> outs;
        for (const ExperimentResult* r :
             {&steady(), &convergence(), &particles(), &disc_vs_cont()})
            for (const RunOutput& o : r->outputs)
                outs.push_back(&o);
        return outs;
    }

    fs::path dir(const std::string& name) const { return base_ / name; }

private:
    const ExperimentResult& cached(std::optional<ExperimentResult>& slot,
                                   const std::string& name)
    {
        if (!slot) {
            ExperimentSpec s = preset(name);
            s.output_dir = (base_ / name).string();
            slot = run_experiment(s);
        }
        return *slot;
    }

    fs::path base_;
    std::optional<ExperimentResult> steady_, conv_, parts_, dc_;
    std::optional<ExperimentResult> balance_default_, balance_halved_;
};

const DiagnosticsRecord& record_at(const std::vector<DiagnosticsRecord>& recs,
                                   double t)
{
    for (const auto& r : recs)
        if (std::abs(r.t - t) < 1e-9)
            return r;
    throw std::runtime_error("no sample at t = " + std::to_string(t));
}

Outcome criterion_masses()
{
    Outcome o;
    const ModelParams p(1.0, 0.0, 1.0, 1.0, 0.0, 0.0);
    const SteadyMasses m = steady_masses(p);
    const double cont = std::abs(m.m1 * normal_pdf(1.0, 1.0) - m.m2 / 2.0);
    const double mass = std::abs(m.m1 * gaussian_tail_mass(1.0, 1.0) + m.m2 - 1.0);
    const double projected = oracle::midpoint(
        [&](double x) { return steady_profile(x, p, m); }, -11.0, 11.0, 500000);
    o.pass = cont <= 1e-12 && mass <= 1e-10 && std::abs(projected - 1.0) <= 1e-8;
    o.detail = "continuity " + num(cont) + ", mass " + num(mass) +
               ", projected integral 1" + (projected >= 1 ? "+" : "-") +
               num(std::abs(projected - 1.0));
    return o;
}

Outcome criterion_stationarity(Harness& h)
{
    Outcome o;
    double worst = 0.0;
    for (const auto& r : h.steady().outputs[0].pde.trajectory)
        worst = std::max(worst, r.l1_f_finf);
    o.pass = worst <= 1e-10;
    o.detail = "max L1 drift " + num(worst) + " (<= 1e-10)";
    return o;
}

Outcome criterion_mean_decay(Harness& h)
{
    Outcome o;
    const RunOutput& out = h.convergence().outputs[0];
    const ModelParams& p = out.pde.params;
    double worst = 0.0;
    std::vector<std::pair<double, double>> series;
    for (const auto& r : out.pde.trajectory) {
        worst = std::max(worst, std::abs(r.mean - mean_closed_form(r.t, p)));
        series.emplace_back(r.t, std::abs(r.mean - p.x0));
    }
    const RateFit fit = fit_rate(series, 2.0 / p.lambda, 10.0,
                                 RateFit::Model::exponential);
    o.pass = worst <= 5e-3 && std::abs(fit.rate - p.lambda) <= 0.02 * p.lambda;
    o.detail = "max |u - closed form| " + num(worst) + ", fitted rate " +
               num(fit.rate) + " vs lambda " + num(p.lambda);
    return o;
}

Outcome criterion_conservation(Harness& h)
{
    Outcome o;
    double worst_mass = 0.0, worst_min = 0.0;
    for (const RunOutput* out : h.all_outputs()) {
        worst_mass = std::max(worst_mass, out->pde.max_mass_drift);
        worst_min = std::min(worst_min, out->pde.min_cell_ever);
    }
    o.pass = worst_mass <= 1e-12 && worst_min >= 0.0;
    o.detail = "max |mass-1| " + num(worst_mass) + ", min cell " + num(worst_min);
    return o;
}

Outcome criterion_balances(Harness& h)
{
    Outcome o;
    const auto& d = h.balance_default().outputs[0].pde.trajectory;
    const auto& f = h.balance_halved().outputs[0].pde.trajectory;
    const double dH = balance_residual(d, BalanceKind::H);
    const double dD = balance_residual(d, BalanceKind::D);
    const double fH = balance_residual(f, BalanceKind::H);
    const double fD = balance_residual(f, BalanceKind::D);
    o.pass = dH <= 0.02 && dD <= 0.02 && fH <= 0.5 * dH && fD <= 0.5 * dD;
    o.detail = "default H " + num(dH) + " D " + num(dD) + "; halved H " +
               num(fH) + " D " + num(fD);
    return o;
}

Outcome criterion_eq16(Harness& h)
{
    Outcome o;
    double worst = -1e300;
    for (const RunOutput* out : h.all_outputs())
        for (const auto& r : out->pde.trajectory)
            worst = std::max(worst, r.D2 - 2.0 * r.IH);
    o.pass = worst <= 1e-6;
    o.detail = "max (D2 - 2 IH) " + num(worst) + " (<= 1e-6)";
    return o;
}

Outcome criterion_lyapunov(Harness& h)
{
    Outcome o;
    double worst = -1e300;
    for (const RunOutput* out : h.all_outputs()) {
        const auto& recs = out->pde.trajectory;
        for (size_t k = 1; k < recs.size(); ++k)
            worst = std::max(worst, recs[k].lyapunov - recs[k - 1].lyapunov);
    }
    o.pass = worst <= 1e-8;
    o.detail = "max per-sample increment " + num(worst) + " (<= 1e-8)";
    return o;
}

Outcome criterion_hellinger_rate(Harness& h)
{
    Outcome o;
    const auto& recs = h.convergence().outputs[0].pde.trajectory;
    const double early = 2.5 * record_at(recs, 2.5).D2;
    const double late = 5.0 * record_at(recs, 5.0).D2;
    const double l1_final = recs.back().l1_f_finf;
    o.pass = late < early && l1_final < 0.01;
    o.detail = "t*D2: " + num(early) + " -> " + num(late) + "; final L1 " +
               num(l1_final) + " (< 0.01)";
    return o;
}

Outcome criterion_quasi_entropy(Harness& h)
{
    Outcome o;
    const RunOutput& out = h.convergence().outputs[0];
    const ModelParams& p = out.pde.params;
    std::vector<std::pair<double, double>> series;
    for (const auto& r : out.pde.trajectory)
        series.emplace_back(r.t, r.H_finf_fq);
    const RateFit fit = fit_rate(series, 2.0 / p.lambda, 10.0,
                                 RateFit::Model::exponential);
    double worst_e2 = 0.0;
    for (const auto& d : out.decompositions)
        worst_e2 = std::max(worst_e2, std::abs(d.e2));
    const bool rate_ok = std::abs(fit.rate - p.lambda) <= 0.25 * p.lambda;
    o.pass = rate_ok && fit.residual < 0.1 && worst_e2 <= 1e-12;
    o.detail = "fitted rate " + num(fit.rate) + " vs lambda " + num(p.lambda) +
               " (2*lambda = " + num(2.0 * p.lambda) + "), residual " +
               num(fit.residual) + ", max |e2| " + num(worst_e2);
    return o;
}

Outcome criterion_boundary_bounds(Harness& h)
{
    Outcome o;
    double worstH = -1e300, worstD = -1e300;
    for (const RunOutput* out : h.all_outputs()) {
        const ModelParams& p = out->pde.params;
        const SteadyMasses& m = out->pde.masses;
        for (const auto& r : out->pde.trajectory) {
            const double decay = std::exp(-p.lambda * r.t);
            const double pref = decay * (p.lambda * p.mu / p.sigma2) *
                                std::abs(p.u0 - p.x0);
            const double boundH =
                pref * (std::abs(p.u0 - p.x0) * decay + p.delta);
            const double boundD = 2.0 * std::sqrt(m.m1) / p.sigma() * pref;
            worstH = std::max(worstH, std::abs(r.LH) - boundH);
            worstD = std::max(worstD, std::abs(r.LD) - boundD);
        }
    }
    o.pass = worstH <= 1e-12 && worstD <= 1e-12;
    o.detail = "max |LH| excess " + num(worstH) + ", max |LD| excess " +
               num(worstD);
    return o;
}

Outcome criterion_model_equivalence(Harness& h)
{
    Outcome o;
    const ExperimentResult& r = h.disc_vs_cont();
    const double dx = (r.spec.xmax - r.spec.xmin) / r.spec.n_cells;
    const double cont = r.outputs[0].pde.trajectory.back().l1_f_finf;
    const double disc = r.outputs[1].pde.trajectory.back().l1_f_finf;
    o.pass = r.cross_kind_l1 <= 5.0 * dx && cont <= 0.01 && disc <= 0.01;
    o.detail = "cross L1 " + num(r.cross_kind_l1) + " (<= " + num(5.0 * dx) +
               "), to f_inf " + num(cont) + " / " + num(disc);
    return o;
}

Outcome criterion_particles(Harness& h)
{
    Outcome o;
    const RunOutput& out = h.particles().outputs[0];
    const ModelParams& p = out.pde.params;
    const double l1 = out.hist_l1_final;
    int se_violations = 0;
    for (const auto& s : out.particle_samples)
        if (std::abs(s.mean - mean_closed_form(s.t, p)) > 3.0 * s.se)
            ++se_violations;

    // Rerun with the same seed: bit-identical samples and histogram.
    ExperimentSpec again = h.particles().spec;
    again.output_dir = h.dir("particles-rerun").string();
    const ExperimentResult rerun = run_experiment(again);
    const RunOutput& out2 = rerun.outputs[0];
    bool identical =
        out.particle_samples.size() == out2.particle_samples.size() &&
        out.final_histogram && out2.final_histogram &&
        (out.final_histogram->values == out2.final_histogram->values).all();
    if (identical)
        for (size_t k = 0; k < out.particle_samples.size(); ++k)
            identical = identical &&
                        out.particle_samples[k].mean ==
                            out2.particle_samples[k].mean &&
                        out.particle_samples[k].se == out2.particle_samples[k].se;

    o.pass = l1 <= 0.05 && se_violations == 0 && identical;
    o.detail = "hist L1 " + num(l1) + " (<= 0.05), 3SE violations " +
               std::to_string(se_violations) + ", rerun identical " +
               (identical ? "yes" : "no");
    return o;
}

Outcome criterion_ckl(Harness& h)
{
    Outcome o;
    double worst = 1e300;
    for (const RunOutput* out : h.all_outputs())
        for (const auto& r : out->pde.trajectory)
            worst = std::min(worst, r.ckl_gap);
    o.pass = worst >= -1e-8;
    o.detail = "min ckl_gap " + num(worst) + " (>= -1e-8)";
    return o;
}

Outcome criterion_moment_entropy(Harness& h)
{
    Outcome o;
    double worst_ratio = 0.0;
    for (const RunOutput* out : h.all_outputs()) {
        const auto& recs = out->pde.trajectory;
        const double v0 = recs.front().moment_entropy;
        for (const auto& r : recs)
            worst_ratio = std::max(worst_ratio, r.moment_entropy / v0);
    }
    o.pass = worst_ratio <= 10.0;
    o.detail = "max V(t)/V(0) " + num(worst_ratio) + " (<= 10)";
    return o;
}

}  // namespace

int main(int argc, char** argv)
{
    std::vector<int> wanted;
    for (int i = 1; i < argc; ++i)
        wanted.push_back(std::atoi(argv[i]));
    const auto selected = [&](int id) {
        return wanted.empty() ||
               std::find(wanted.begin(), wanted.end(), id) != wanted.end();
    };

    Harness h;
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"masses", [&] { return criterion_masses(); }},
        {"stationarity", [&] { return criterion_stationarity(h); }},
        {"mean decay", [&] { return criterion_mean_decay(h); }},
        {"conservation and positivity", [&] { return criterion_conservation(h); }},
        {"entropy balances", [&] { return criterion_balances(h); }},
        {"inequality D2 <= 2 IH", [&] { return criterion_eq16(h); }},
        {"Lyapunov monotonicity", [&] { return criterion_lyapunov(h); }},
        {"Hellinger rate", [&] { return criterion_hellinger_rate(h); }},
        {"quasi-to-steady entropy", [&] { return criterion_quasi_entropy(h); }},
        {"boundary-term bounds", [&] { return criterion_boundary_bounds(h); }},
        {"model equivalence", [&] { return criterion_model_equivalence(h); }},
        {"particle oracle", [&] { return criterion_particles(h); }},
        {"CKL inequality", [&] { return criterion_ckl(h); }},
        {"moment-entropy boundedness", [&] { return criterion_moment_entropy(h); }},
    };

    int failures = 0;
    for (size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!selected(id))
            continue;
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        std::printf("[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", id,
                    criteria[i].first.c_str(), o.detail.c_str());
        std::fflush(stdout);
        if (!o.pass)
            ++failures;
    }
    return failures;
}
