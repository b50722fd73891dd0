#pragma once

#include <functional>
#include <vector>

#include "swarmfp/diagnostics.hpp"
#include "swarmfp/grid.hpp"
#include "swarmfp/model.hpp"

namespace swarmfp {

enum class ThetaRule { chang_cooper, centered };
enum class Coupling { lagged_explicit };

/// Time-integration settings. cadence is the diagnostics sampling interval
/// and must be an integer multiple of dt.
struct SchemeConfig {
    double dt = 1e-2;
    double t_final = 1.0;
    ThetaRule theta_rule = ThetaRule::chang_cooper;
    Coupling coupling = Coupling::lagged_explicit;
    double cadence = 5e-2;
};

/// Instantaneous solver state: the cell-averaged density, its first moment u,
/// and the attraction center derived from u.
struct SolverState {
    DensityField field;
    double t = 0;
    double u = 0;
    double center = 0;
};

/// Edge data of the finite-volume flux
///   F_e = (kappa_e / dx) [ Ber(-P_e) f_right - Ber(P_e) f_left ],
/// with Ber(z) = z / (e^z - 1) and the Peclet number P_e given by the exact
/// flux-potential difference between the two adjacent cell centers. This makes
/// the projected local equilibrium a discrete fixed point: its values satisfy
/// f_right / f_left = e^{-P_e} at every interior edge, so every F_e vanishes.
/// Boundary edges (0 and n) carry zero flux. The centered rule replaces
/// Ber(z) by 1 - z/2.
struct EdgeCoefficients {
    double dx = 0;
    Eigen::ArrayXd kappa;      ///< n+1 edge diffusion values, 0 at the walls
    Eigen::ArrayXd peclet;     ///< n+1 Peclet numbers
    Eigen::ArrayXd ber_left;   ///< Ber(P): weight of the left cell
    Eigen::ArrayXd ber_right;  ///< Ber(-P): weight of the right cell

    /// Effective advective coefficient peclet * kappa / dx at each edge.
    Eigen::ArrayXd advective_coefficient() const;

    /// Flux at every edge for a given set of cell values.
    Eigen::ArrayXd flux(const Eigen::ArrayXd& f) const;
};

/// Builds the edge flux coefficients for the state's frozen center.
EdgeCoefficients assemble_fluxes(const SolverState& state,
                                 const ModelParams& p, ModelKind kind,
                                 ThetaRule rule = ThetaRule::chang_cooper);

/// Wraps a density into a state, computing u by quadrature and the center
/// from the attraction rule.
SolverState make_state(DensityField field, const ModelParams& p, double t = 0);

/// One semi-implicit step: the center is frozen at the current value (lagged
/// explicit coupling), the implicit finite-volume system with zero-flux walls
/// is solved, then u and the center are refreshed. Mass is conserved to
/// solver roundoff and positivity is preserved unconditionally.
SolverState step(const SolverState& state, double dt, const ModelParams& p,
                 ModelKind kind, ThetaRule rule = ThetaRule::chang_cooper);

/// Per-sample hook invoked at every cadence multiple with the fresh record
/// and the state it was computed from.
using DiagnosticsSink =
    std::function<void(const DiagnosticsRecord&, const SolverState&)>;

struct RunResult {
    ModelParams params;  ///< effective parameters (u0 replaced by the quadrature mean)
    SteadyMasses masses{};
    SolverState final_state;
    std::vector<DiagnosticsRecord> trajectory;
    double min_cell_ever = 0;   ///< smallest cell value seen at any step
    double max_mass_drift = 0;  ///< max |mass - 1| over the samples
};

/// Projects and renormalizes f0, replaces p.u0 by its quadrature mean, and
/// advances to t_final, sampling diagnostics every cadence. The sink (when
/// set) is invoked synchronously with each record.
RunResult run(const ModelParams& p, const Grid1D& grid,
              const SchemeConfig& scheme, ModelKind kind,
              const std::function<double(double)>& f0,
              const DiagnosticsSink& sink = {});

}  // namespace swarmfp
