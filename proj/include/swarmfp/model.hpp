#pragma once

#include <stdexcept>

namespace swarmfp {

/// Physical parameters of the swarm model: drift weight lambda toward the
/// target center x0, communication weight mu toward the running mean,
/// diffusion floor sigma2, target half-width delta, and the initial mean u0.
/// lambda + mu must equal 1 exactly; sigma2 and delta must be positive.
struct ModelParams {
    double lambda = 1.0;
    double mu = 0.0;
    double sigma2 = 1.0;
    double delta = 1.0;
    double x0 = 0.0;
    double u0 = 0.0;

    ModelParams() = default;
    ModelParams(double lambda_, double mu_, double sigma2_, double delta_,
                double x0_, double u0_);

    double sigma() const;
};

/// Which formulation drives the dynamics: variable continuous diffusion with a
/// globally continuous drift, or constant diffusion with the drift switched
/// off inside the fixed target interval.
enum class ModelKind { continuous_kappa, discontinuous_drift };

/// Weights of the piecewise steady profile: m1 scales the Gaussian wings,
/// m2 is the mass of the uniform plateau. Determined by continuity at the
/// plateau edge and unit total mass.
struct SteadyMasses {
    double m1;
    double m2;
};

/// Centered normal density with variance sigma2, evaluated at offset y.
double normal_pdf(double y, double sigma2);

/// Gaussian mass outside [-delta, delta] for variance sigma2.
double gaussian_tail_mass(double delta, double sigma2);

/// Variable diffusion coefficient: sigma2 + delta^2/2 - |x-center|^2/2 inside
/// the interval of half-width delta around the center, sigma2 outside.
/// Continuous in x; at |x-center| == delta the outer branch is used.
double diffusion_coefficient(double x, double center, const ModelParams& p);

/// Instantaneous attraction center lambda*x0 + mu*u.
double attraction_center(double u, const ModelParams& p);

/// Closed-form mean x0 + (u0 - x0) exp(-lambda t).
double mean_closed_form(double t, const ModelParams& p);

/// Solves continuity at the plateau edge plus unit total mass for (m1, m2).
SteadyMasses steady_masses(const ModelParams& p);

/// Steady profile: uniform plateau m2/(2 delta) inside |x-x0| < delta,
/// Gaussian wings m1 * normal_pdf(x-x0, sigma2) outside.
double steady_profile(double x, const ModelParams& p, const SteadyMasses& m);

/// Steady shape translated to an arbitrary center.
double quasi_profile(double x, double center, const ModelParams& p,
                     const SteadyMasses& m);

/// Time derivative of the quasi-stationary profile along the closed-form mean:
/// zero inside the moving interval, -f_q (lambda mu / sigma2)(u0-x0)(x-c(t)) e^{-lambda t}
/// outside.
double quasi_profile_time_derivative(double x, double t, const ModelParams& p,
                                     const SteadyMasses& m);

/// Drift seen by a particle at x when the mean is u. The discontinuous kind
/// switches the drift off strictly inside the fixed interval [x0-delta, x0+delta].
double drift_field(double x, double u, const ModelParams& p, ModelKind kind);

/// Antiderivative of (drift + kappa')/kappa along x for a frozen center: the
/// flux potential whose pointwise differences give exact log-ratios of the
/// local equilibrium. For the continuous kind this is max(y^2-delta^2,0)/(2 sigma2)
/// with y = x - center; for the discontinuous kind the quadratic ramp is
/// accumulated only outside the fixed target interval.
double flux_potential(double x, double center, const ModelParams& p,
                      ModelKind kind);

}  // namespace swarmfp
