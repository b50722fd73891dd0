#include "swarmfp/diagnostics.hpp"

#include <algorithm>
#include <cmath>

namespace swarmfp {

namespace {

// Densities at or below this level are treated as zero in entropy sums.
constexpr double kEntropyFloor = 1e-300;

// Adaptive Simpson with interior kinks handled by the caller's split points.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double fa, double fm, double fb, double tol,
                        int depth)
{
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, 0.5 * tol, depth - 1);
}

double integrate_segment(const std::function<double(double)>& f, double a,
                         double b, double tol)
{
    if (!(b > a))
        return 0.0;
    const double m = 0.5 * (a + b);
    return adaptive_simpson(f, a, b, f(a), f(m), f(b), tol, 48);
}

double xlogy(double x, double ratio)
{
    if (x <= kEntropyFloor)
        return 0.0;
    return x * std::log(ratio);
}

// Nodal derivative: centered at interior nodes, one-sided at the two ends.
Eigen::ArrayXd nodal_derivative(const Eigen::ArrayXd& v, double dx)
{
    const Eigen::Index n = v.size();
    Eigen::ArrayXd d(n);
    d[0] = (v[1] - v[0]) / dx;
    d[n - 1] = (v[n - 1] - v[n - 2]) / dx;
    d.segment(1, n - 2) =
        (v.segment(2, n - 2) - v.segment(0, n - 2)) / (2.0 * dx);
    return d;
}

void require_same_grid(const DensityField& a, const DensityField& b,
                       const char* who)
{
    if (!same_extent(a.grid, b.grid))
        throw std::invalid_argument(std::string(who) + ": grid mismatch");
}

}  // namespace

double relative_entropy(const DensityField& g, const DensityField& h)
{
    require_same_grid(g, h, "relative_entropy");
    double sum = 0.0;
    for (Eigen::Index i = 0; i < g.values.size(); ++i) {
        const double gi = g.values[i];
        if (gi <= kEntropyFloor)
            continue;
        const double hi = h.values[i];
        if (hi <= 0.0)
            throw std::domain_error("relative_entropy: g > 0 where h = 0");
        sum += xlogy(gi, gi / hi);
    }
    return sum * g.grid.dx;
}

double hellinger_sq(const DensityField& g, const DensityField& h)
{
    require_same_grid(g, h, "hellinger_sq");
    return (g.values.sqrt() - h.values.sqrt()).square().sum() * g.grid.dx;
}

double entropy_production_H(const DensityField& f, const DensityField& fq,
                            const Eigen::ArrayXd& kappa_at_centers)
{
    require_same_grid(f, fq, "entropy_production_H");
    // Cells where fq has underflowed hold no mass on either side; treat the
    // ratio as empty there, consistent with the 0 log 0 convention.
    const Eigen::ArrayXd ratio_sqrt =
        (fq.values > kEntropyFloor).select(f.values / fq.values, 0.0).sqrt();
    const Eigen::ArrayXd d = nodal_derivative(ratio_sqrt, f.grid.dx);
    return (kappa_at_centers * fq.values * d.square()).sum() * f.grid.dx;
}

double entropy_production_D(const DensityField& f, const DensityField& fq,
                            const Eigen::ArrayXd& kappa_at_centers)
{
    require_same_grid(f, fq, "entropy_production_D");
    const Eigen::ArrayXd ratio_qrt =
        (fq.values > kEntropyFloor).select(f.values / fq.values, 0.0).pow(0.25);
    const Eigen::ArrayXd d = nodal_derivative(ratio_qrt, f.grid.dx);
    return (kappa_at_centers * fq.values * d.square()).sum() * f.grid.dx;
}

double boundary_term_H(const DensityField& f, double t, const ModelParams& p,
                       const SteadyMasses&)
{
    const double decay = std::exp(-p.lambda * t);
    const double center = attraction_center(mean_closed_form(t, p), p);
    const double prefactor =
        decay * (p.lambda * p.mu / p.sigma2) * (p.u0 - p.x0);
    if (prefactor == 0.0)
        return 0.0;
    const Eigen::ArrayXd y = f.grid.centers - center;
    const double restricted =
        (y.abs() >= p.delta).select(y * f.values, 0.0).sum() * f.grid.dx;
    return prefactor * restricted;
}

double boundary_term_D(const DensityField& f, const DensityField& fq, double t,
                       const ModelParams& p, const SteadyMasses&)
{
    require_same_grid(f, fq, "boundary_term_D");
    const double decay = std::exp(-p.lambda * t);
    const double center = attraction_center(mean_closed_form(t, p), p);
    const double prefactor =
        decay * (p.lambda * p.mu / p.sigma2) * (p.u0 - p.x0);
    if (prefactor == 0.0)
        return 0.0;
    const Eigen::ArrayXd y = f.grid.centers - center;
    const Eigen::ArrayXd integrand =
        y * (fq.values - (f.values * fq.values).sqrt());
    const double restricted =
        (y.abs() >= p.delta).select(integrand, 0.0).sum() * f.grid.dx;
    return -prefactor * restricted;
}

double lyapunov_value(double D2, double t, const ModelParams& p,
                      const SteadyMasses& m)
{
    const double sigma3 = p.sigma2 * p.sigma();
    return D2 + 2.0 * (std::sqrt(m.m1) * p.mu / sigma3) *
                    std::abs(p.u0 - p.x0) * std::exp(-p.lambda * t);
}

EntropyDecomposition entropy_vs_quasi_decomposition(const ModelParams& p,
                                                    const SteadyMasses& m,
                                                    double t)
{
    EntropyDecomposition d;
    d.t = t;
    d.B = (p.u0 - p.x0) * std::exp(-p.lambda * t);
    if (std::abs(d.B) >= 2.0 * p.delta)
        throw std::domain_error(
            "entropy_vs_quasi_decomposition: |B(t)| >= 2 delta, four-set split invalid");

    const double center = p.x0 + p.mu * d.B;
    const auto integrand = [&](double x) {
        const double fi = steady_profile(x, p, m);
        const double fqx = quasi_profile(x, center, p, m);
        return xlogy(fi, fi / fqx);
    };
    const double B = d.B;
    const double lo = p.x0 - p.delta;
    const double hi = p.x0 + p.delta;
    const double far = p.delta + std::abs(B) + 14.0 * p.sigma();
    const double tol = 1e-14;

    // Kinks of f_q sit at center -+ delta; split the transition sets there.
    if (B >= 0.0) {
        // E1: wings; E3 = (lo, lo+B); E2 = (lo+B, hi); E4 = (hi, hi+B).
        d.e3_lo = lo;
        d.e3_hi = lo + B;
        d.e4_lo = hi;
        d.e4_hi = hi + B;
        d.e1 = integrate_segment(integrand, p.x0 - far, lo, tol) +
               integrate_segment(integrand, hi + B, p.x0 + far, tol);
        d.e3 = integrate_segment(integrand, lo, std::min(center - p.delta, lo + B), tol) +
               integrate_segment(integrand, std::min(center - p.delta, lo + B), lo + B, tol);
        d.e2 = integrate_segment(integrand, lo + B, hi, tol);
        d.e4 = integrate_segment(integrand, hi, std::min(center + p.delta, hi + B), tol) +
               integrate_segment(integrand, std::min(center + p.delta, hi + B), hi + B, tol);
    } else {
        // Mirrored sets for u0 < x0.
        d.e3_lo = lo + B;
        d.e3_hi = lo;
        d.e4_lo = hi + B;
        d.e4_hi = hi;
        d.e1 = integrate_segment(integrand, p.x0 - far, lo + B, tol) +
               integrate_segment(integrand, hi, p.x0 + far, tol);
        d.e3 = integrate_segment(integrand, lo + B, std::max(center - p.delta, lo + B), tol) +
               integrate_segment(integrand, std::max(center - p.delta, lo + B), lo, tol);
        d.e2 = integrate_segment(integrand, lo, hi + B, tol);
        d.e4 = integrate_segment(integrand, hi + B, std::max(center + p.delta, hi + B), tol) +
               integrate_segment(integrand, std::max(center + p.delta, hi + B), hi, tol);
    }

    std::vector<double> splits = {p.x0 - far, lo,           lo + B,
                                  center - p.delta, hi,     hi + B,
                                  center + p.delta, p.x0 + far};
    std::sort(splits.begin(), splits.end());
    d.total = 0.0;
    for (size_t i = 0; i + 1 < splits.size(); ++i)
        d.total += integrate_segment(integrand, splits[i], splits[i + 1], tol);
    return d;
}

double ckl_gap(const DensityField& g, const DensityField& h)
{
    const double l1 = l1_distance(g, h);
    return 2.0 * relative_entropy(g, h) - l1 * l1;
}

double moment_entropy_functional(const DensityField& f)
{
    double sum = 0.0;
    for (Eigen::Index i = 0; i < f.values.size(); ++i) {
        const double fi = f.values[i];
        if (fi <= kEntropyFloor)
            continue;
        const double x = f.grid.centers[i];
        sum += (1.0 + x * x + std::log(fi)) * fi;
    }
    return sum * f.grid.dx;
}

double balance_residual(const std::vector<DiagnosticsRecord>& series,
                        BalanceKind which)
{
    if (series.size() < 3)
        throw std::invalid_argument("balance_residual: need at least 3 samples");
    const double dt0 = series[1].t - series[0].t;
    for (size_t k = 1; k + 1 < series.size(); ++k) {
        const double dtk = series[k + 1].t - series[k].t;
        if (std::abs(dtk - dt0) > 1e-9 * std::max(1.0, std::abs(dt0)))
            throw std::invalid_argument("balance_residual: non-uniform cadence");
    }
    double worst = 0.0;
    for (size_t k = 1; k + 1 < series.size(); ++k) {
        double rate, production, boundary;
        if (which == BalanceKind::H) {
            rate = (series[k + 1].H_f_fq - series[k - 1].H_f_fq) / (2.0 * dt0);
            production = 4.0 * series[k].IH;
            boundary = series[k].LH;
        } else {
            rate = (series[k + 1].D2 - series[k - 1].D2) / (2.0 * dt0);
            production = 8.0 * series[k].ID;
            boundary = series[k].LD;
        }
        worst = std::max(worst, std::abs(rate + production - boundary));
    }
    return worst;
}

RateFit fit_rate(const std::vector<std::pair<double, double>>& series,
                 double t_lo, double t_hi, RateFit::Model model)
{
    if (!(t_lo < t_hi))
        throw std::invalid_argument("fit_rate: empty window");
    std::vector<double> xs, ys;
    for (const auto& [t, v] : series) {
        if (t < t_lo || t > t_hi)
            continue;
        if (!(v > 0.0))
            throw std::invalid_argument("fit_rate: nonpositive value inside window");
        xs.push_back(model == RateFit::Model::exponential ? t : std::log(t));
        ys.push_back(std::log(v));
    }
    if (xs.size() < 5)
        throw std::invalid_argument("fit_rate: fewer than 5 samples in window");

    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / n;
    double rss = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (intercept + slope * xs[i]);
        rss += r * r;
    }
    RateFit fit;
    fit.t_lo = t_lo;
    fit.t_hi = t_hi;
    fit.model = model;
    fit.rate = -slope;
    fit.intercept = intercept;
    fit.residual = std::sqrt(rss / n);
    return fit;
}

DiagnosticsRecord make_record(const DensityField& f, double t, double center,
                              const ModelParams& p, const SteadyMasses& m,
                              ModelKind kind, const DensityField& fq,
                              const DensityField& finf)
{
    DiagnosticsRecord r;
    r.t = t;
    r.mass = integrate(f);
    r.mean = moment(f, 1, 0.0);
    r.var = moment(f, 2, r.mean);
    r.moment_entropy = moment_entropy_functional(f);

    Eigen::ArrayXd kappa(f.grid.n_cells);
    if (kind == ModelKind::continuous_kappa) {
        for (int i = 0; i < f.grid.n_cells; ++i)
            kappa[i] = diffusion_coefficient(f.grid.centers[i], center, p);
    } else {
        kappa.setConstant(p.sigma2);
    }

    r.H_f_fq = relative_entropy(f, fq);
    r.IH = entropy_production_H(f, fq, kappa);
    r.LH = boundary_term_H(f, t, p, m);
    r.D2 = hellinger_sq(f, fq);
    r.ID = entropy_production_D(f, fq, kappa);
    r.LD = boundary_term_D(f, fq, t, p, m);
    r.lyapunov = lyapunov_value(r.D2, t, p, m);
    r.l1_f_fq = l1_distance(f, fq);
    r.l1_f_finf = l1_distance(f, finf);
    r.H_finf_fq = relative_entropy(finf, fq);
    r.ckl_gap = ckl_gap(f, fq);
    return r;
}

}  // namespace swarmfp
