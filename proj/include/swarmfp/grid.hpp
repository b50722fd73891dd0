#pragma once

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>

namespace swarmfp {

/// Uniform 1D mesh over [xmin, xmax] with n_cells cells of width dx.
/// Cell centers are xmin + (i + 1/2) dx.
struct Grid1D {
    double xmin = 0.0;
    double xmax = 1.0;
    int n_cells = 0;
    double dx = 0.0;
    Eigen::ArrayXd centers;
};

Grid1D build_grid(double xmin, double xmax, int n_cells);

bool same_extent(const Grid1D& a, const Grid1D& b);

/// Cell-averaged density on a grid; values carry units 1/length.
struct DensityField {
    Grid1D grid;
    Eigen::ArrayXd values;
};

/// Midpoint quadrature: sum(values) * dx.
double integrate(const DensityField& field);

/// k-th moment about `center`: sum (x_i - center)^k values_i dx.
double moment(const DensityField& field, int order, double center);

/// Samples a pointwise density at the cell centers. With renormalize the
/// result is scaled to unit discrete mass; an everywhere-zero profile is
/// rejected in that case. Negative profile values are rejected always.
DensityField project_density(const std::function<double(double)>& profile,
                             const Grid1D& grid, bool renormalize);

/// L1 distance sum |a_i - b_i| dx; requires matching grids.
double l1_distance(const DensityField& a, const DensityField& b);

}  // namespace swarmfp
