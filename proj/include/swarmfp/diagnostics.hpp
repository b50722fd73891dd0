#pragma once

#include <vector>

#include "swarmfp/grid.hpp"
#include "swarmfp/model.hpp"

namespace swarmfp {

/// One time sample of every tracked functional. H_f_fq is the relative
/// Shannon entropy of the solution against the quasi-stationary profile,
/// D2 the squared Hellinger distance, IH/ID the entropy productions, LH/LD
/// the time-boundary terms, and lyapunov the monotone combination
/// D2 + 2 (sqrt(m1) mu / sigma^3) |u0-x0| e^{-lambda t}.
struct DiagnosticsRecord {
    double t = 0;
    double mass = 0;
    double mean = 0;
    double var = 0;
    double moment_entropy = 0;
    double H_f_fq = 0;
    double IH = 0;
    double LH = 0;
    double D2 = 0;
    double ID = 0;
    double LD = 0;
    double lyapunov = 0;
    double l1_f_fq = 0;
    double l1_f_finf = 0;
    double H_finf_fq = 0;
    double ckl_gap = 0;
};

/// Relative Shannon entropy sum g log(g/h) dx with the 0 log 0 = 0 convention.
/// Signals if some cell has g > 0 while h = 0.
double relative_entropy(const DensityField& g, const DensityField& h);

/// Squared Hellinger distance sum (sqrt g - sqrt h)^2 dx.
double hellinger_sq(const DensityField& g, const DensityField& h);

/// Entropy production of the relative Shannon entropy:
/// quadrature of kappa f_q (d/dx sqrt(f/f_q))^2, with the derivative taken as
/// a centered difference at interior nodes and one-sided at the boundaries.
double entropy_production_H(const DensityField& f, const DensityField& fq,
                            const Eigen::ArrayXd& kappa_at_centers);

/// Entropy production of the squared Hellinger distance:
/// quadrature of kappa f_q (d/dx (f/f_q)^{1/4})^2, same derivative convention.
double entropy_production_D(const DensityField& f, const DensityField& fq,
                            const Eigen::ArrayXd& kappa_at_centers);

/// Boundary term of the H balance coming from the time dependence of f_q:
/// e^{-lambda t} (lambda mu / sigma2)(u0-x0) * integral of (x - c(t)) f over
/// the cells outside the moving interval, with c(t) from the closed-form mean.
double boundary_term_H(const DensityField& f, double t, const ModelParams& p,
                       const SteadyMasses& m);

/// Boundary term of the Hellinger balance:
/// -e^{-lambda t} (lambda mu / sigma2)(u0-x0) * integral of
/// (x - c(t)) (f_q - sqrt(f f_q)) outside the moving interval.
double boundary_term_D(const DensityField& f, const DensityField& fq, double t,
                       const ModelParams& p, const SteadyMasses& m);

/// D2 + 2 (sqrt(m1) mu / sigma^3) |u0 - x0| e^{-lambda t}.
double lyapunov_value(double D2, double t, const ModelParams& p,
                      const SteadyMasses& m);

/// Four-domain split of H(f_inf | f_q(t)) around the displaced plateau.
/// B is the signed offset (u0 - x0) e^{-lambda t}; e2 vanishes identically and
/// the two transition sets have measure |B|. total is an independent
/// whole-line quadrature of the same relative entropy.
struct EntropyDecomposition {
    double t = 0;
    double B = 0;
    double e1 = 0;
    double e2 = 0;
    double e3 = 0;
    double e4 = 0;
    double total = 0;
    double e3_lo = 0, e3_hi = 0;  ///< lower transition set
    double e4_lo = 0, e4_hi = 0;  ///< upper transition set
};

/// Computes the decomposition from the closed-form profiles. Signals when
/// |B(t)| >= 2 delta, where the four-set construction is not valid.
EntropyDecomposition entropy_vs_quasi_decomposition(const ModelParams& p,
                                                    const SteadyMasses& m,
                                                    double t);

/// Csiszar-Kullback gap 2 H(g|h) - ||g-h||_1^2; nonnegative for unit-mass pairs.
double ckl_gap(const DensityField& g, const DensityField& h);

/// Moment-entropy functional sum (1 + x^2 + log f) f dx with 0 log 0 = 0.
double moment_entropy_functional(const DensityField& f);

enum class BalanceKind { H, D };

/// Maximum over interior samples of the entropy-balance residual, using
/// centered differences in t on a uniformly sampled series.
///
/// The continuum identities carried by the sampled functionals are
///   dH/dt  = -4 IH + LH       dD2/dt = -8 ID + LD;
/// the factors 4 and 8 convert the sqrt- and fourth-root-form productions
/// into the Fisher-type dissipations that the balances actually produce
/// (chain rule: f (d log r)^2 = 4 f_q (d sqrt r)^2 = ...). Both constants are
/// pinned by closed-form tests.
double balance_residual(const std::vector<DiagnosticsRecord>& series,
                        BalanceKind which);

/// Decay-rate fit over a time window: least squares of log(value) against t
/// (exponential) or log t (power). rate is reported positive for decay;
/// residual is the RMS of the log residuals.
struct RateFit {
    double t_lo = 0;
    double t_hi = 0;
    enum class Model { exponential, power } model = Model::exponential;
    double rate = 0;
    double intercept = 0;
    double residual = 0;
};

RateFit fit_rate(const std::vector<std::pair<double, double>>& series,
                 double t_lo, double t_hi, RateFit::Model model);

/// Assembles a full record for a solver state at time t. fq and finf are the
/// renormalized projections of the quasi-stationary and steady profiles on
/// the same grid; kind selects the diffusion coefficient entering IH/ID.
DiagnosticsRecord make_record(const DensityField& f, double t, double center,
                              const ModelParams& p, const SteadyMasses& m,
                              ModelKind kind, const DensityField& fq,
                              const DensityField& finf);

}  // namespace swarmfp
