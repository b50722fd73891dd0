#include "swarmfp/particles.hpp"

#include <cmath>

namespace swarmfp {

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t counter_bits(std::uint64_t seed, std::int64_t stream,
                           std::int64_t index)
{
    std::uint64_t h = splitmix64(seed ^ 0x6A09E667F3BCC908ULL);
    h = splitmix64(h ^ static_cast<std::uint64_t>(stream));
    h = splitmix64(h ^ static_cast<std::uint64_t>(index));
    return h;
}

// Uniform in the open interval (0, 1).
double bits_to_unit(std::uint64_t h)
{
    return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

// Stream tag for the initial-sampling jitter, distinct from any step index.
constexpr std::int64_t kInitStream = -0x5EEDBA5E;

}  // namespace

double counter_uniform(std::uint64_t seed, std::int64_t stream,
                       std::int64_t index)
{
    return bits_to_unit(counter_bits(seed, stream, index));
}

double counter_normal(std::uint64_t seed, std::int64_t stream,
                      std::int64_t index)
{
    const std::uint64_t h = counter_bits(seed, stream, index);
    const double u1 = bits_to_unit(h);
    const double u2 = bits_to_unit(splitmix64(h ^ 0x2545F4914F6CDD1DULL));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

ParticleEnsemble sample_initial(const DensityField& f0, int n,
                                std::uint64_t seed)
{
    if (n < 2)
        throw std::invalid_argument("sample_initial: n >= 2 is required");
    const double mass = integrate(f0);
    if (!(mass > 0.0))
        throw std::invalid_argument("sample_initial: zero-mass initial density");

    const Grid1D& g = f0.grid;
    Eigen::ArrayXd cum(g.n_cells + 1);
    cum[0] = 0.0;
    for (int i = 0; i < g.n_cells; ++i)
        cum[i + 1] = cum[i] + f0.values[i] * g.dx / mass;
    cum[g.n_cells] = 1.0;

    ParticleEnsemble e;
    e.positions.resize(n);
    e.seed = seed;
    int cell = 0;
    for (int k = 0; k < n; ++k) {
        const double u = (k + counter_uniform(seed, kInitStream, k)) / n;
        while (cell + 1 < g.n_cells && cum[cell + 1] <= u)
            ++cell;
        const double local = cum[cell + 1] > cum[cell]
                                 ? (u - cum[cell]) / (cum[cell + 1] - cum[cell])
                                 : 0.5;
        e.positions[k] = g.xmin + (cell + local) * g.dx;
    }
    return e;
}

double empirical_mean(const ParticleEnsemble& e)
{
    constexpr Eigen::Index chunk = 4096;
    const Eigen::Index n = e.positions.size();
    double total = 0.0;
    for (Eigen::Index start = 0; start < n; start += chunk) {
        const Eigen::Index len = std::min(chunk, n - start);
        total += e.positions.segment(start, len).sum();
    }
    return total / static_cast<double>(n);
}

ParticleEnsemble em_step(const ParticleEnsemble& e, double dt,
                         const ModelParams& p)
{
    if (!(dt > 0.0))
        throw std::invalid_argument("em_step: dt must be positive");
    const double center = attraction_center(empirical_mean(e), p);
    const double sqrt_dt = std::sqrt(dt);

    ParticleEnsemble next = e;
    const Eigen::Index n = e.positions.size();
    for (Eigen::Index k = 0; k < n; ++k) {
        const double x = e.positions[k];
        const double kap = diffusion_coefficient(x, center, p);
        const double noise = counter_normal(e.seed, e.step_index, k);
        next.positions[k] =
            x - (x - center) * dt + std::sqrt(2.0 * kap) * sqrt_dt * noise;
    }
    next.t = e.t + dt;
    next.step_index = e.step_index + 1;
    return next;
}

Histogram histogram_density(const ParticleEnsemble& e, const Grid1D& grid)
{
    Histogram h;
    h.field.grid = grid;
    h.field.values = Eigen::ArrayXd::Zero(grid.n_cells);
    const double n = static_cast<double>(e.positions.size());
    for (Eigen::Index k = 0; k < e.positions.size(); ++k) {
        const double x = e.positions[k];
        const int cell = static_cast<int>(std::floor((x - grid.xmin) / grid.dx));
        if (cell < 0 || cell >= grid.n_cells) {
            ++h.overflow;
            continue;
        }
        h.field.values[cell] += 1.0;
    }
    h.field.values /= n * grid.dx;
    return h;
}

}  // namespace swarmfp
