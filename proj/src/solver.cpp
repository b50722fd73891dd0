#include "swarmfp/solver.hpp"

#include <cmath>

namespace swarmfp {

namespace {

// Ber(z) = z / (e^z - 1), continuous through z = 0.
double bernoulli_ratio(double z)
{
    if (std::abs(z) < 1e-12)
        return 1.0 - 0.5 * z;
    return z / std::expm1(z);
}

// Tridiagonal solve for the implicit system. The matrix has unit-dominant
// positive diagonal and nonpositive off-diagonals, so the sweep below only
// adds and multiplies nonnegative quantities: the computed solution is
// nonnegative whenever the right-hand side is.
void solve_tridiagonal(const Eigen::ArrayXd& lower, Eigen::ArrayXd diag,
                       const Eigen::ArrayXd& upper, Eigen::ArrayXd rhs,
                       Eigen::ArrayXd& out)
{
    const Eigen::Index n = diag.size();
    for (Eigen::Index i = 1; i < n; ++i) {
        if (!(diag[i - 1] > 0.0))
            throw std::runtime_error("step: singular tridiagonal system");
        const double w = lower[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] += w * rhs[i - 1];
    }
    if (!(diag[n - 1] > 0.0))
        throw std::runtime_error("step: singular tridiagonal system");
    out.resize(n);
    out[n - 1] = rhs[n - 1] / diag[n - 1];
    for (Eigen::Index i = n - 2; i >= 0; --i)
        out[i] = (rhs[i] + upper[i] * out[i + 1]) / diag[i];
}

}  // namespace

Eigen::ArrayXd EdgeCoefficients::advective_coefficient() const
{
    return peclet * kappa / dx;
}

Eigen::ArrayXd EdgeCoefficients::flux(const Eigen::ArrayXd& f) const
{
    const Eigen::Index n = f.size();
    Eigen::ArrayXd F = Eigen::ArrayXd::Zero(n + 1);
    F.segment(1, n - 1) =
        (kappa.segment(1, n - 1) / dx) *
        (ber_right.segment(1, n - 1) * f.segment(1, n - 1) -
         ber_left.segment(1, n - 1) * f.segment(0, n - 1));
    return F;
}

EdgeCoefficients assemble_fluxes(const SolverState& state,
                                 const ModelParams& p, ModelKind kind,
                                 ThetaRule rule)
{
    const Grid1D& g = state.field.grid;
    const int n = g.n_cells;
    EdgeCoefficients e;
    e.dx = g.dx;
    e.kappa = Eigen::ArrayXd::Zero(n + 1);
    e.peclet = Eigen::ArrayXd::Zero(n + 1);
    e.ber_left = Eigen::ArrayXd::Zero(n + 1);
    e.ber_right = Eigen::ArrayXd::Zero(n + 1);

    Eigen::ArrayXd potential(n);
    for (int i = 0; i < n; ++i)
        potential[i] = flux_potential(g.centers[i], state.center, p, kind);

    for (int k = 1; k < n; ++k) {
        const double xe = g.xmin + k * g.dx;
        e.kappa[k] = kind == ModelKind::continuous_kappa
                         ? diffusion_coefficient(xe, state.center, p)
                         : p.sigma2;
        const double pe = potential[k] - potential[k - 1];
        e.peclet[k] = pe;
        if (rule == ThetaRule::chang_cooper) {
            e.ber_left[k] = bernoulli_ratio(pe);
            e.ber_right[k] = bernoulli_ratio(-pe);
        } else {
            e.ber_left[k] = 1.0 - 0.5 * pe;
            e.ber_right[k] = 1.0 + 0.5 * pe;
        }
    }
    return e;
}

SolverState make_state(DensityField field, const ModelParams& p, double t)
{
    SolverState s;
    s.field = std::move(field);
    s.t = t;
    s.u = moment(s.field, 1, 0.0);
    s.center = attraction_center(s.u, p);
    return s;
}

SolverState step(const SolverState& state, double dt, const ModelParams& p,
                 ModelKind kind, ThetaRule rule)
{
    if (!(dt > 0.0))
        throw std::invalid_argument("step: dt must be positive");
    const int n = state.field.grid.n_cells;
    const double dx = state.field.grid.dx;
    const EdgeCoefficients e = assemble_fluxes(state, p, kind, rule);

    // df_i/dt = (F_{i+1} - F_i)/dx with zero-flux walls. Implicit Euler:
    // (I - dt A) f_new = f_old. The column sums of I - dt A are 1 by the
    // telescoping of the edge products below, so the solve conserves mass.
    const double r = dt / (dx * dx);
    Eigen::ArrayXd a(n + 1), b(n + 1);  // a_e = r kappa Ber(P), b_e = r kappa Ber(-P)
    a = r * e.kappa * e.ber_left;
    b = r * e.kappa * e.ber_right;

    Eigen::ArrayXd lower(n), diag(n), upper(n);
    for (int i = 0; i < n; ++i) {
        lower[i] = i > 0 ? a[i] : 0.0;          // M_{i,i-1} = -a_i
        upper[i] = i < n - 1 ? b[i + 1] : 0.0;  // M_{i,i+1} = -b_{i+1}
        diag[i] = 1.0 + b[i] + a[i + 1];        // column sums are exactly 1
    }

    SolverState next = state;
    solve_tridiagonal(lower, diag, upper, state.field.values, next.field.values);
    next.t = state.t + dt;
    next.u = moment(next.field, 1, 0.0);
    next.center = attraction_center(next.u, p);
    return next;
}

RunResult run(const ModelParams& p, const Grid1D& grid,
              const SchemeConfig& scheme, ModelKind kind,
              const std::function<double(double)>& f0,
              const DiagnosticsSink& sink)
{
    if (!(scheme.dt > 0.0))
        throw std::invalid_argument("run: dt must be positive");
    if (scheme.t_final < 0.0)
        throw std::invalid_argument("run: t_final must be nonnegative");
    if (scheme.t_final > 0.0 &&
        !(scheme.dt <= scheme.cadence && scheme.cadence <= scheme.t_final))
        throw std::invalid_argument("run: dt <= cadence <= t_final is required");
    const double steps_per_sample_real = scheme.cadence / scheme.dt;
    const long steps_per_sample = std::lround(steps_per_sample_real);
    if (steps_per_sample < 1 ||
        std::abs(steps_per_sample_real - static_cast<double>(steps_per_sample)) >
            1e-9 * steps_per_sample_real)
        throw std::invalid_argument("run: cadence must be an integer multiple of dt");

    DensityField field = project_density(f0, grid, /*renormalize=*/true);

    ModelParams eff = p;
    eff.u0 = moment(field, 1, 0.0);
    const SteadyMasses masses = steady_masses(eff);

    RunResult result{eff, masses, make_state(std::move(field), eff), {}, 0.0, 0.0};
    const DensityField finf = project_density(
        [&](double x) { return steady_profile(x, eff, masses); }, grid, true);
    result.min_cell_ever = result.final_state.field.values.minCoeff();

    SolverState& state = result.final_state;
    const auto sample = [&]() {
        const DensityField fq = project_density(
            [&](double x) { return quasi_profile(x, state.center, eff, masses); },
            grid, true);
        DiagnosticsRecord rec = make_record(state.field, state.t, state.center,
                                            eff, masses, kind, fq, finf);
        result.max_mass_drift =
            std::max(result.max_mass_drift, std::abs(rec.mass - 1.0));
        result.trajectory.push_back(rec);
        if (sink)
            sink(rec, state);
    };

    sample();
    if (scheme.t_final == 0.0)
        return result;

    const long n_samples =
        static_cast<long>(std::floor(scheme.t_final / scheme.cadence + 1e-9));
    for (long s = 1; s <= n_samples; ++s) {
        for (long k = 0; k < steps_per_sample; ++k) {
            state = step(state, scheme.dt, eff, kind, scheme.theta_rule);
            state.t = (s - 1) * scheme.cadence + (k + 1) * scheme.dt;  // keep t exact
            result.min_cell_ever =
                std::min(result.min_cell_ever, state.field.values.minCoeff());
        }
        state.t = s * scheme.cadence;
        sample();
    }
    // Trailing fraction when t_final is not a cadence multiple.
    while (state.t < scheme.t_final - 1e-12) {
        const double dt = std::min(scheme.dt, scheme.t_final - state.t);
        const double t_next = std::min(state.t + dt, scheme.t_final);
        state = step(state, dt, eff, kind, scheme.theta_rule);
        state.t = t_next;
        result.min_cell_ever =
            std::min(result.min_cell_ever, state.field.values.minCoeff());
    }
    if (state.t > n_samples * scheme.cadence)
        sample();
    return result;
}

}  // namespace swarmfp
