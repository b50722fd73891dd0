#include "swarmfp/grid.hpp"

#include <cmath>

namespace swarmfp {

Grid1D build_grid(double xmin, double xmax, int n_cells)
{
    if (!(xmin < xmax))
        throw std::invalid_argument("build_grid: xmin < xmax is required");
    if (n_cells < 8)
        throw std::invalid_argument("build_grid: n_cells >= 8 is required");
    Grid1D g;
    g.xmin = xmin;
    g.xmax = xmax;
    g.n_cells = n_cells;
    g.dx = (xmax - xmin) / n_cells;
    g.centers = xmin + (Eigen::ArrayXd::LinSpaced(n_cells, 0, n_cells - 1) + 0.5) * g.dx;
    return g;
}

bool same_extent(const Grid1D& a, const Grid1D& b)
{
    return a.xmin == b.xmin && a.xmax == b.xmax && a.n_cells == b.n_cells;
}

double integrate(const DensityField& field)
{
    return field.values.sum() * field.grid.dx;
}

double moment(const DensityField& field, int order, double center)
{
    if (order < 0)
        throw std::invalid_argument("moment: order must be >= 0");
    if (order == 0)
        return integrate(field);
    return ((field.grid.centers - center).pow(order) * field.values).sum() * field.grid.dx;
}

DensityField project_density(const std::function<double(double)>& profile,
                             const Grid1D& grid, bool renormalize)
{
    DensityField f;
    f.grid = grid;
    f.values.resize(grid.n_cells);
    for (int i = 0; i < grid.n_cells; ++i) {
        const double v = profile(grid.centers[i]);
        if (!(v >= 0.0))
            throw std::invalid_argument("project_density: profile is negative on the grid");
        f.values[i] = v;
    }
    if (renormalize) {
        const double mass = integrate(f);
        if (!(mass > 0.0))
            throw std::invalid_argument("project_density: profile has zero mass on the grid");
        f.values /= mass;
    }
    return f;
}

double l1_distance(const DensityField& a, const DensityField& b)
{
    if (!same_extent(a.grid, b.grid))
        throw std::invalid_argument("l1_distance: grid mismatch");
    return (a.values - b.values).abs().sum() * a.grid.dx;
}

}  // namespace swarmfp
