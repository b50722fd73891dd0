#include "swarmfp/model.hpp"

#include <cmath>

namespace swarmfp {

ModelParams::ModelParams(double lambda_, double mu_, double sigma2_,
                         double delta_, double x0_, double u0_)
    : lambda(lambda_), mu(mu_), sigma2(sigma2_), delta(delta_), x0(x0_), u0(u0_)
{
    if (!(lambda >= 0.0) || !(mu >= 0.0))
        throw std::invalid_argument("ModelParams: lambda and mu must be nonnegative");
    if (lambda + mu != 1.0)
        throw std::invalid_argument("ModelParams: lambda + mu = 1 is required");
    if (!(sigma2 > 0.0))
        throw std::invalid_argument("ModelParams: sigma2 > 0 is required");
    if (!(delta > 0.0))
        throw std::invalid_argument("ModelParams: delta > 0 is required");
    if (!std::isfinite(x0) || !std::isfinite(u0))
        throw std::invalid_argument("ModelParams: x0 and u0 must be finite");
}

double ModelParams::sigma() const { return std::sqrt(sigma2); }

double normal_pdf(double y, double sigma2)
{
    return std::exp(-y * y / (2.0 * sigma2)) / std::sqrt(2.0 * M_PI * sigma2);
}

double gaussian_tail_mass(double delta, double sigma2)
{
    return std::erfc(delta / std::sqrt(2.0 * sigma2));
}

double diffusion_coefficient(double x, double center, const ModelParams& p)
{
    const double y = std::abs(x - center);
    if (y < p.delta)
        return p.sigma2 + 0.5 * (p.delta * p.delta - y * y);
    return p.sigma2;
}

double attraction_center(double u, const ModelParams& p)
{
    return p.lambda * p.x0 + p.mu * u;
}

double mean_closed_form(double t, const ModelParams& p)
{
    return p.x0 + (p.u0 - p.x0) * std::exp(-p.lambda * t);
}

SteadyMasses steady_masses(const ModelParams& p)
{
    // Continuity at the plateau edge:  m1 * g(delta) = m2 / (2 delta)
    // Unit mass:                       m1 * tail + m2 = 1
    const double g = normal_pdf(p.delta, p.sigma2);
    const double tail = gaussian_tail_mass(p.delta, p.sigma2);
    const double denom = tail + 2.0 * p.delta * g;
    if (!(denom > 0.0))
        throw std::runtime_error("steady_masses: degenerate mass system");
    const double m1 = 1.0 / denom;
    const double m2 = 2.0 * p.delta * g * m1;
    return SteadyMasses{m1, m2};
}

double steady_profile(double x, const ModelParams& p, const SteadyMasses& m)
{
    const double y = std::abs(x - p.x0);
    if (y < p.delta)
        return m.m2 / (2.0 * p.delta);
    return m.m1 * normal_pdf(y, p.sigma2);
}

double quasi_profile(double x, double center, const ModelParams& p,
                     const SteadyMasses& m)
{
    return steady_profile(x - center + p.x0, p, m);
}

double quasi_profile_time_derivative(double x, double t, const ModelParams& p,
                                     const SteadyMasses& m)
{
    const double decay = std::exp(-p.lambda * t);
    const double center = p.x0 + p.mu * (p.u0 - p.x0) * decay;
    const double y = x - center;
    if (std::abs(y) < p.delta)
        return 0.0;
    const double fq = quasi_profile(x, center, p, m);
    return -fq * (p.lambda * p.mu / p.sigma2) * (p.u0 - p.x0) * y * decay;
}

double drift_field(double x, double u, const ModelParams& p, ModelKind kind)
{
    const double b = x - attraction_center(u, p);
    if (kind == ModelKind::continuous_kappa)
        return b;
    // Discontinuous kind: drift only outside the fixed target interval.
    return std::abs(x - p.x0) < p.delta ? 0.0 : b;
}

double flux_potential(double x, double center, const ModelParams& p,
                      ModelKind kind)
{
    if (kind == ModelKind::continuous_kappa) {
        const double y = x - center;
        const double q = y * y - p.delta * p.delta;
        return q > 0.0 ? q / (2.0 * p.sigma2) : 0.0;
    }
    // Quadratic ramp (x-center)^2/2 accumulated only outside [x0-delta, x0+delta].
    const double lo = p.x0 - p.delta;
    const double hi = p.x0 + p.delta;
    const double xc = x < lo ? lo : (x > hi ? hi : x);
    const double y = x - center;
    const double yc = xc - center;
    return (y * y - yc * yc) / (2.0 * p.sigma2);
}

}  // namespace swarmfp
