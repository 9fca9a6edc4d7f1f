#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "gcflow/gcflow.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitFlow = 3;
constexpr int kExitVerify = 4;

std::string with_suffix(const std::string& path, const std::string& suffix) {
    const size_t dot = path.find_last_of('.');
    const size_t slash = path.find_last_of('/');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
        return path + suffix;
    return path.substr(0, dot) + suffix + path.substr(dot);
}

struct RunArtifacts {
    gcflow::FlowResult result;
    gcflow::Grid grid;
};

RunArtifacts execute_run(const gcflow::RunConfig& cfg) {
    RunArtifacts art;
    art.grid = gcflow::build_grid(cfg.domain);
    gcflow::GraphField initial = gcflow::make_initial_field(cfg, art.grid);

    int sample_count = 0;
    gcflow::MonitorCallback monitor;
    if (cfg.output.snapshot_every > 0) {
        monitor = [&](const gcflow::FlowState& state, const gcflow::EstimateSample&) {
            if (sample_count++ % cfg.output.snapshot_every != 0) return;
            std::ostringstream name;
            name << cfg.output.snapshot_prefix << '_' << std::setw(5) << std::setfill('0')
                 << sample_count - 1 << ".txt";
            std::ofstream os(name.str());
            if (!os) throw gcflow::ConfigError("cannot write snapshot: " + name.str());
            gcflow::write_snapshot(os, state.phi, art.grid);
        };
    }

    art.result = gcflow::run_flow(initial, cfg.params, art.grid, monitor);
    art.result.report.write_csv(cfg.output.report);

    if (cfg.output.mesh) {
        std::ofstream os(cfg.output.mesh_path);
        if (!os) throw gcflow::ConfigError("cannot write mesh: " + cfg.output.mesh_path);
        gcflow::GraphField final_phi = art.result.final_state.phi;
        gcflow::apply_neumann_bc(final_phi, art.grid);
        gcflow::write_mesh(os, final_phi, art.grid);
    }
    return art;
}

int cmd_run(const std::string& config_path) {
    gcflow::RunConfig cfg;
    try {
        cfg = gcflow::parse_config(config_path);
    } catch (const std::exception& ex) {
        std::cerr << "config error: " << ex.what() << '\n';
        return kExitConfig;
    }
    try {
        const auto art = execute_run(cfg);
        const auto& rep = art.result.report;
        const auto& last = rep.samples.back();
        int passed = 0, total = 4;
        passed += gcflow::check_c0_sandwich(rep, cfg.params.alpha).pass;
        passed += gcflow::check_m_bracket(rep).pass;
        passed += gcflow::check_gradient_monotone(rep).pass;
        passed += gcflow::check_detw_bounds(rep).pass;
        std::cout << "run complete: t = " << last.t << ", s = " << last.s << ", osc(phi~) = "
                  << last.osc_phitilde << ", checks " << passed << '/' << total << '\n';
        return kExitOk;
    } catch (const gcflow::ConfigError& ex) {
        std::cerr << "config error: " << ex.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& ex) {
        std::cerr << "flow error: " << ex.what() << '\n';
        return kExitFlow;
    }
}

int cmd_verify(double alpha, int grid_n, const std::string& mutate, std::uint64_t seed) {
    gcflow::BatteryConfig cfg;
    cfg.alpha = alpha;
    cfg.nr = grid_n;
    cfg.seed = seed;
    if (mutate == "h-sign") cfg.mutation = gcflow::GeometryMutation::h_sign;
    else if (!mutate.empty()) {
        std::cerr << "config error: unknown mutation '" << mutate << "'\n";
        return kExitConfig;
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        std::cerr << "config error: alpha out of range (0<alpha<1)\n";
        return kExitConfig;
    }
    const auto report = gcflow::scenario_battery(cfg);
    report.print(std::cout);
    return report.all_pass() ? kExitOk : kExitVerify;
}

int cmd_sweep(const std::string& alphas_arg, const std::string& config_path) {
    gcflow::RunConfig base;
    std::vector<double> alphas;
    try {
        base = gcflow::parse_config(config_path);
        std::stringstream ss(alphas_arg);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            size_t pos = 0;
            const double a = std::stod(tok, &pos);
            if (pos != tok.size() || !(a > 0.0 && a < 1.0))
                throw gcflow::OutOfRangeError("--alphas", "0<alpha<1, got '" + tok + "'");
            alphas.push_back(a);
        }
        if (alphas.empty()) throw gcflow::MissingKeyError("--alphas");
    } catch (const std::exception& ex) {
        std::cerr << "config error: " << ex.what() << '\n';
        return kExitConfig;
    }

    struct Row {
        double alpha = 0.0;
        double lambda_hat = std::nan("");
        double final_osc = std::nan("");
        std::string status = "ok";
    };
    std::vector<Row> rows(alphas.size());

    int threads = 1;
    if (const char* env = std::getenv("GCFLOW_THREADS")) threads = std::max(1, std::atoi(env));
    threads = std::min<int>(threads, static_cast<int>(alphas.size()));

    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (size_t i; (i = next.fetch_add(1)) < alphas.size();) {
            gcflow::RunConfig cfg = base;
            cfg.params.alpha = alphas[i];
            std::ostringstream tag;
            tag << "_alpha" << alphas[i];
            cfg.output.report = with_suffix(base.output.report, tag.str());
            cfg.output.snapshot_prefix = base.output.snapshot_prefix + tag.str();
            if (cfg.output.mesh) cfg.output.mesh_path = with_suffix(base.output.mesh_path, tag.str());
            Row row;
            row.alpha = alphas[i];
            try {
                const auto art = execute_run(cfg);
                row.final_osc = art.result.report.samples.back().osc_phitilde;
                gcflow::ConvergenceFit fit;
                gcflow::check_rescaled_convergence(art.result.report, {}, &fit);
                row.lambda_hat = fit.lambda_hat;
            } catch (const std::exception& ex) {
                row.status = std::string("failed: ") + ex.what();
            }
            rows[i] = row;
        }
    };
    std::vector<std::thread> pool;
    for (int k = 0; k < threads - 1; ++k) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    const std::string summary_path = with_suffix(base.output.report, "_sweep_summary");
    std::ofstream os(summary_path);
    if (!os) {
        std::cerr << "config error: cannot write " << summary_path << '\n';
        return kExitConfig;
    }
    os.precision(17);
    os << "alpha,lambda_hat,final_osc,status\n";
    bool any_failed = false;
    for (const auto& r : rows) {
        os << r.alpha << ',' << r.lambda_hat << ',' << r.final_osc << ",\"" << r.status << "\"\n";
        std::cout << "alpha " << r.alpha << ": lambda_hat " << r.lambda_hat << ", final osc "
                  << r.final_osc << ", " << r.status << '\n';
        if (r.status != "ok") any_failed = true;
    }
    std::cout << "summary written to " << summary_path << '\n';
    return any_failed ? kExitFlow : kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"expanding Gauss-curvature flow of graphs over a spherical cap"};
    app.require_subcommand(1);

    std::string run_config;
    auto* run = app.add_subcommand("run", "integrate the flow from a config file");
    run->add_option("config", run_config, "config file path")->required();

    double v_alpha = 0.5;
    int v_grid = 64;
    std::string v_mutate;
    std::uint64_t v_seed = 12345;
    auto* verify = app.add_subcommand("verify", "run the verification scenario battery");
    verify->add_option("--alpha", v_alpha, "speed exponent in (0,1)");
    verify->add_option("--grid", v_grid, "radial resolution");
    verify->add_option("--mutate", v_mutate, "seeded-defect hook (h-sign)");
    verify->add_option("--seed", v_seed, "seed for randomized test fields");

    std::string s_alphas, s_config;
    auto* sweep = app.add_subcommand("sweep", "independent runs over a list of alphas");
    sweep->add_option("--alphas", s_alphas, "comma-separated alpha list")->required();
    sweep->add_option("config", s_config, "base config file path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    if (run->parsed()) return cmd_run(run_config);
    if (verify->parsed()) return cmd_verify(v_alpha, v_grid, v_mutate, v_seed);
    return cmd_sweep(s_alphas, s_config);
}
