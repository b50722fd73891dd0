#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "swarmfp/model.hpp"

using namespace swarmfp;
using Catch::Approx;

namespace {
ModelParams params(double lambda, double mu, double sigma2 = 1.0,
                   double delta = 1.0, double x0 = 0.0, double u0 = 0.0)
{
    return ModelParams(lambda, mu, sigma2, delta, x0, u0);
}
}  // namespace

TEST_CASE("ModelParams validates its invariants")
{
    REQUIRE_NOTHROW(params(1.0, 0.0));
    REQUIRE_NOTHROW(params(0.3, 0.7));
    REQUIRE_THROWS_AS(params(0.6, 0.6), std::invalid_argument);
    REQUIRE_THROWS_AS(params(1.0, 0.0, -1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(params(1.0, 0.0, 1.0, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(ModelParams(2.0, -1.0, 1.0, 1.0, 0.0, 0.0),
                      std::invalid_argument);
}

TEST_CASE("diffusion coefficient values and continuity")
{
    const ModelParams p = params(1.0, 0.0);
    CHECK(diffusion_coefficient(0.0, 0.0, p) == Approx(1.5));
    CHECK(diffusion_coefficient(1.0, 0.0, p) == Approx(1.0));
    CHECK(diffusion_coefficient(0.5, 0.0, p) == Approx(1.375));

    // Continuity at the kink and global bounds on dense samples.
    for (double eps : {1e-6, 1e-9, 1e-12}) {
        CHECK(std::abs(diffusion_coefficient(1.0 - eps, 0.0, p) - p.sigma2) <
              2.0 * eps);
        CHECK(std::abs(diffusion_coefficient(-1.0 + eps, 0.0, p) - p.sigma2) <
              2.0 * eps);
    }
    for (int i = 0; i <= 2000; ++i) {
        const double x = -5.0 + i * 0.005;
        const double k = diffusion_coefficient(x, 0.7, p);
        CHECK(k >= p.sigma2);
        CHECK(k <= p.sigma2 + 0.5 * p.delta * p.delta);
    }
}

TEST_CASE("attraction center")
{
    CHECK(attraction_center(7.0, params(1.0, 0.0, 1.0, 1.0, 2.0)) == Approx(2.0));
    CHECK(attraction_center(1.0, params(0.3, 0.7)) == Approx(0.7));
    const ModelParams p = params(0.25, 0.75, 1.0, 1.0, 1.3);
    CHECK(attraction_center(1.3, p) == Approx(1.3));  // fixed point at u = x0
}

TEST_CASE("closed-form mean")
{
    const ModelParams fixed = params(0.5, 0.5, 1.0, 1.0, 3.0, 3.0);
    CHECK(mean_closed_form(7.7, fixed) == Approx(3.0));
    const ModelParams p = params(0.5, 0.5, 1.0, 1.0, 0.0, 2.0);
    CHECK(mean_closed_form(0.0, p) == Approx(2.0));
    CHECK(mean_closed_form(2.0 * std::log(2.0), p) == Approx(1.0));

    // du/dt = -lambda (u - x0) by centered differences, second order.
    const auto residual = [&](double h) {
        double worst = 0.0;
        for (double t : {0.1, 0.5, 1.0, 2.0}) {
            const double du =
                (mean_closed_form(t + h, p) - mean_closed_form(t - h, p)) /
                (2.0 * h);
            worst = std::max(
                worst, std::abs(du + p.lambda * (mean_closed_form(t, p) - p.x0)));
        }
        return worst;
    };
    const double r1 = residual(1e-2), r2 = residual(5e-3);
    CHECK(r1 < 1e-4);
    CHECK(r1 / r2 > 3.0);  // O(h^2)
}

TEST_CASE("steady masses against the quadrature oracle")
{
    // Oracle: the same two conditions, with the Gaussian tail integrated
    // numerically instead of using the closed form.
    const auto oracle_masses = [](double sigma2, double delta) {
        const double g = oracle::gauss_pdf(delta, 0.0, sigma2);
        const double tail =
            2.0 * oracle::integrate(
                      [&](double x) { return oracle::gauss_pdf(x, 0.0, sigma2); },
                      delta, delta + 60.0 * std::sqrt(sigma2), 1e-14);
        const double m1 = 1.0 / (tail + 2.0 * delta * g);
        return std::pair{m1, 2.0 * delta * g * m1};
    };

    SECTION("sigma2 = 1, delta = 1")
    {
        const ModelParams p = params(1.0, 0.0);
        const SteadyMasses m = steady_masses(p);
        const auto [m1o, m2o] = oracle_masses(1.0, 1.0);
        CHECK(m.m1 == Approx(m1o).epsilon(1e-12));
        CHECK(m.m2 == Approx(m2o).epsilon(1e-12));
        // Frozen oracle values.
        CHECK(m.m1 == Approx(1.2480468738790313).epsilon(1e-14));
        CHECK(m.m2 == Approx(0.6039816126127223).epsilon(1e-14));
        // Invariant residuals.
        CHECK(std::abs(m.m1 * normal_pdf(1.0, 1.0) - m.m2 / 2.0) <= 1e-12);
        CHECK(std::abs(m.m1 * gaussian_tail_mass(1.0, 1.0) + m.m2 - 1.0) <= 1e-10);
        // Unit mass of the full profile by fine quadrature.
        const double mass = oracle::integrate(
            [&](double x) { return steady_profile(x, p, m); }, -41.0, 41.0,
            1e-13, {-1.0, 1.0});
        CHECK(mass == Approx(1.0).margin(1e-10));
    }

    SECTION("sigma2 = 4, delta = 0.5")
    {
        const ModelParams p = params(1.0, 0.0, 4.0, 0.5);
        const SteadyMasses m = steady_masses(p);
        const auto [m1o, m2o] = oracle_masses(4.0, 0.5);
        CHECK(m.m1 == Approx(m1o).epsilon(1e-12));
        CHECK(m.m2 == Approx(m2o).epsilon(1e-12));
        CHECK(std::abs(m.m1 * normal_pdf(0.5, 4.0) - m.m2) <= 1e-12);
        CHECK(std::abs(m.m1 * gaussian_tail_mass(0.5, 4.0) + m.m2 - 1.0) <= 1e-10);
    }

    SECTION("delta -> 0 degenerates to the pure Gaussian")
    {
        const ModelParams p = params(1.0, 0.0, 1.0, 1e-9);
        const SteadyMasses m = steady_masses(p);
        CHECK(m.m1 == Approx(1.0).margin(1e-8));
        CHECK(m.m2 == Approx(0.0).margin(1e-8));
    }
}

TEST_CASE("steady profile shape")
{
    const ModelParams p = params(1.0, 0.0, 1.0, 1.0, 0.5);
    const SteadyMasses m = steady_masses(p);
    CHECK(steady_profile(p.x0, p, m) == Approx(m.m2 / (2.0 * p.delta)));
    // Both branches agree at the kink.
    const double inner = m.m2 / (2.0 * p.delta);
    CHECK(std::abs(steady_profile(p.x0 + p.delta, p, m) - inner) <= 1e-12);
    CHECK(std::abs(steady_profile(p.x0 - p.delta, p, m) - inner) <= 1e-12);
    // Nonnegative everywhere.
    for (int i = 0; i <= 4000; ++i)
        CHECK(steady_profile(-10.0 + i * 0.005, p, m) >= 0.0);
    // Unit mass via fine-grid midpoint quadrature over x0 +- (delta + 10 sigma).
    const double mass = oracle::midpoint(
        [&](double x) { return steady_profile(x, p, m); }, p.x0 - 11.0,
        p.x0 + 11.0, 500000);
    CHECK(mass == Approx(1.0).margin(1e-8));
}

TEST_CASE("quasi profile is the translated steady shape")
{
    const ModelParams p = params(0.5, 0.5, 1.0, 1.0, 0.0, 2.0);
    const SteadyMasses m = steady_masses(p);

    SECTION("zero translation")
    {
        for (double x : {-3.0, -1.0, 0.0, 0.4, 1.0, 2.5})
            CHECK(quasi_profile(x, p.x0, p, m) == steady_profile(x, p, m));
    }

    SECTION("exact translation covariance")
    {
        const double c = 1.7;
        for (double x : {-3.0, 0.0, 1.1, 1.7, 2.4, 5.0})
            CHECK(quasi_profile(x, c, p, m) ==
                  steady_profile(x - c + p.x0, p, m));
    }

    SECTION("unit mass for any center")
    {
        for (double c : {-2.0, 0.3, 4.0}) {
            const double mass = oracle::midpoint(
                [&](double x) { return quasi_profile(x, c, p, m); }, c - 11.0,
                c + 11.0, 500000);
            CHECK(mass == Approx(1.0).margin(1e-8));
        }
    }

    SECTION("flux residual vanishes at second order away from kinks")
    {
        const double c = 0.6;
        const auto residual = [&](double h) {
            double worst = 0.0;
            for (double x = c - 6.0; x <= c + 6.0; x += 0.01) {
                if (std::abs(std::abs(x - c) - p.delta) < 2.0 * h)
                    continue;  // skip the two kink neighborhoods
                const auto kf = [&](double y) {
                    return diffusion_coefficient(y, c, p) *
                           quasi_profile(y, c, p, m);
                };
                const double dkf = (kf(x + h) - kf(x - h)) / (2.0 * h);
                worst = std::max(
                    worst, std::abs(dkf + (x - c) * quasi_profile(x, c, p, m)));
            }
            return worst;
        };
        const double r1 = residual(1e-3), r2 = residual(5e-4);
        CHECK(r1 < 1e-5);
        CHECK(r1 / r2 > 3.0);
    }
}

TEST_CASE("quasi profile time derivative")
{
    const ModelParams p = params(0.5, 0.5, 1.0, 1.0, 0.0, 2.0);
    const SteadyMasses m = steady_masses(p);

    SECTION("zero inside the moving interval")
    {
        const double t = 0.8;
        const double c = p.x0 + p.mu * (p.u0 - p.x0) * std::exp(-p.lambda * t);
        for (double off : {-0.9, -0.3, 0.0, 0.5, 0.99})
            CHECK(quasi_profile_time_derivative(c + off, t, p, m) == 0.0);
    }

    SECTION("zero when the center is stationary")
    {
        const ModelParams q = params(1.0, 0.0, 1.0, 1.0, 0.0, 2.0);
        for (double x : {-4.0, -1.5, 0.0, 2.0, 5.0})
            CHECK(quasi_profile_time_derivative(x, 0.3, q, m) == 0.0);
    }

    SECTION("matches a centered time difference outside")
    {
        const double t = 0.5, x = 3.2;
        const auto fq_t = [&](double s) {
            const double c =
                p.x0 + p.mu * (p.u0 - p.x0) * std::exp(-p.lambda * s);
            return quasi_profile(x, c, p, m);
        };
        const auto err = [&](double h) {
            const double fd = (fq_t(t + h) - fq_t(t - h)) / (2.0 * h);
            return std::abs(fd - quasi_profile_time_derivative(x, t, p, m));
        };
        CHECK(err(1e-3) < 1e-7);
        CHECK(err(1e-3) / err(5e-4) > 3.0);
    }
}

TEST_CASE("drift field")
{
    const ModelParams p = params(0.5, 0.5, 1.0, 1.0, 0.0, 2.0);
    const double u = 1.2;
    const double c = attraction_center(u, p);
    CHECK(drift_field(c, u, p, ModelKind::continuous_kappa) == 0.0);
    CHECK(drift_field(c, u, p, ModelKind::discontinuous_drift) == 0.0);
    // Inside the fixed target interval the discontinuous drift vanishes.
    CHECK(drift_field(0.5, u, p, ModelKind::discontinuous_drift) == 0.0);
    CHECK(drift_field(0.5, u, p, ModelKind::continuous_kappa) == Approx(0.5 - c));

    const ModelParams q = params(1.0, 0.0, 1.0, 1.0, 0.0, 0.0);
    CHECK(drift_field(q.x0 + 2.0, 0.0, q, ModelKind::continuous_kappa) ==
          Approx(2.0 * q.delta));
    CHECK(drift_field(q.x0 + 2.0, 0.0, q, ModelKind::discontinuous_drift) ==
          Approx(2.0 * q.delta));
}

TEST_CASE("flux potential reproduces equilibrium log-ratios")
{
    const ModelParams p = params(0.5, 0.5, 1.0, 1.0, 0.0, 2.0);
    const SteadyMasses m = steady_masses(p);
    const double c = 0.8;
    // exp(-potential) is proportional to the quasi profile.
    for (double x : {-3.0, -0.5, 0.8, 1.5, 3.0, 6.0}) {
        const double lhs = quasi_profile(x, c, p, m) / quasi_profile(c, c, p, m);
        const double rhs =
            std::exp(-flux_potential(x, c, p, ModelKind::continuous_kappa));
        CHECK(lhs == Approx(rhs).epsilon(1e-13));
    }
    // Discontinuous kind with the center at x0: same potential shape.
    for (double x : {-3.0, 0.5, 2.0})
        CHECK(flux_potential(x, p.x0, p, ModelKind::discontinuous_drift) ==
              Approx(flux_potential(x, p.x0, p, ModelKind::continuous_kappa)));
}
