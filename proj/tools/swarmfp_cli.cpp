#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "swarmfp/experiment.hpp"

namespace {

int finish(const swarmfp::ExperimentResult& result)
{
    for (const auto& out : result.outputs) {
        std::cout << "run (" << (out.kind == swarmfp::ModelKind::continuous_kappa
                                     ? "continuous_kappa"
                                     : "discontinuous_drift")
                  << ") -> " << out.directory << "\n"
                  << "  samples: " << out.pde.trajectory.size()
                  << "  max |mass-1|: " << out.pde.max_mass_drift
                  << "  min cell: " << out.pde.min_cell_ever << "\n";
    }
    if (result.spec.compare_kinds)
        std::cout << "cross-kind L1 at t_final: " << result.cross_kind_l1
                  << "\n";
    if (result.exit_status != 0)
        std::cerr << "hard invariant (mass or positivity) violated\n";
    return result.exit_status;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"1D nonlocal Fokker-Planck laboratory"};
    app.require_subcommand(1);

    auto* run_cmd = app.add_subcommand("run", "run an experiment from a config file");
    std::string config_path, out_dir;
    run_cmd->add_option("--config", config_path, "config file (key = value lines)")
        ->required();
    run_cmd->add_option("--out", out_dir, "output directory");

    auto* preset_cmd = app.add_subcommand("preset", "run a named scenario preset");
    std::string preset_name, preset_out;
    preset_cmd->add_option("name", preset_name,
                           "steady-check | convergence | particles-vs-pde | disc-vs-cont")
        ->required();
    preset_cmd->add_option("--out", preset_out, "output directory");

    auto* masses_cmd = app.add_subcommand("masses", "print the steady-profile masses");
    double sigma2 = 1.0, delta = 1.0;
    masses_cmd->add_option("--sigma2", sigma2, "diffusion floor")->required();
    masses_cmd->add_option("--delta", delta, "target half-width")->required();

    auto* rates_cmd = app.add_subcommand("rates", "fit a decay rate to a diagnostics column");
    std::string rates_file, rates_column, rates_window, rates_model = "exp";
    double rates_offset = 0.0;
    rates_cmd->add_option("--file", rates_file, "diagnostics CSV")->required();
    rates_cmd->add_option("--column", rates_column, "column to fit")->required();
    rates_cmd->add_option("--window", rates_window, "time window t0:t1")->required();
    rates_cmd->add_option("--model", rates_model, "exp | power");
    rates_cmd->add_option("--offset", rates_offset,
                          "constant subtracted from the column before fitting");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) {
            swarmfp::ExperimentSpec spec = swarmfp::parse_config(config_path);
            if (!out_dir.empty())
                spec.output_dir = out_dir;
            return finish(swarmfp::run_experiment(spec));
        }
        if (*preset_cmd) {
            swarmfp::ExperimentSpec spec = swarmfp::preset(preset_name);
            spec.output_dir = preset_out.empty() ? "out-" + preset_name : preset_out;
            return finish(swarmfp::run_experiment(spec));
        }
        if (*masses_cmd) {
            swarmfp::ModelParams p(1.0, 0.0, sigma2, delta, 0.0, 0.0);
            const swarmfp::SteadyMasses m = swarmfp::steady_masses(p);
            const double g = swarmfp::normal_pdf(delta, sigma2);
            const double tail = swarmfp::gaussian_tail_mass(delta, sigma2);
            std::printf("m1 = %.17g\n", m.m1);
            std::printf("m2 = %.17g\n", m.m2);
            std::printf("continuity_residual = %.3g\n",
                        std::abs(m.m1 * g - m.m2 / (2.0 * delta)));
            std::printf("mass_residual = %.3g\n",
                        std::abs(m.m1 * tail + m.m2 - 1.0));
            return 0;
        }
        if (*rates_cmd) {
            const auto colon = rates_window.find(':');
            if (colon == std::string::npos)
                throw std::runtime_error("--window expects t0:t1");
            const double t0 = std::stod(rates_window.substr(0, colon));
            const double t1 = std::stod(rates_window.substr(colon + 1));
            swarmfp::RateFit::Model model;
            if (rates_model == "exp")
                model = swarmfp::RateFit::Model::exponential;
            else if (rates_model == "power")
                model = swarmfp::RateFit::Model::power;
            else
                throw std::runtime_error("--model expects exp or power");
            swarmfp::fit_report(rates_file, rates_column, t0, t1, model,
                                rates_offset);
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
