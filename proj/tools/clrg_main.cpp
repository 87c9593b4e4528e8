// Command-line frontend: simulate, solve, trace, bench, verify.
// Exit codes: 0 success, 1 usage error, 2 numerical/validation error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "clrg/clrg.hpp"

namespace {

using nlohmann::json;

clrg::DynamicsParams dynamics_from_flags(double w_sup, double tol, std::size_t rounds,
                                         double beta, std::size_t batch, std::size_t epochs,
                                         const std::string& penalty, double lambda,
                                         std::uint64_t seed) {
    clrg::DynamicsParams params;
    params.w_sup = w_sup;
    params.tol = tol;
    params.max_rounds = rounds;
    params.beta = beta;
    params.batch_size = batch;
    params.epochs = epochs;
    params.lambda = lambda;
    params.seed = seed;
    if (penalty == "none")
        params.penalty = clrg::PenaltyKind::None;
    else if (penalty == "linf")
        params.penalty = clrg::PenaltyKind::LInf;
    else if (penalty == "l2")
        params.penalty = clrg::PenaltyKind::L2;
    else
        throw CLI::ValidationError("--penalty must be none, linf, or l2");
    return params;
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw clrg::Error("cannot open for writing: " + path);
    out << text;
}

int cmd_simulate(const std::string& setting, std::size_t p, std::size_t q, std::size_t n,
                 std::uint64_t seed, const std::string& out_path) {
    const clrg::SemConfig cfg = clrg::preset(clrg::setting_from_string(setting), p, q, seed);
    std::vector<clrg::EnvSample> samples;
    for (std::size_t e = 0; e < cfg.n_envs(); ++e)
        samples.push_back(clrg::sample_environment(cfg, e, n, clrg::derive_seed(seed, e, 0x3C)));
    if (out_path.empty() || out_path == "-")
        clrg::write_samples_csv(std::cout, samples);
    else
        clrg::write_samples_csv(out_path, samples);
    return 0;
}

int cmd_solve(const std::string& in_path, double w_sup, double tol,
              const std::string& out_path) {
    const std::vector<clrg::EnvSample> samples = clrg::read_samples_csv(in_path);
    if (samples.size() < 2) throw clrg::Error("solve: need at least 2 environments");

    std::vector<clrg::EnvironmentMoments> moments;
    std::vector<clrg::Vector> w_stars;
    for (const auto& s : samples) {
        moments.push_back(clrg::moments_from_sample(s));
        w_stars.push_back(clrg::least_squares(moments.back()).w_star);
    }

    clrg::GameConfig game;
    game.w_sup = w_sup;
    game.tolerance = tol;
    game.validate();

    json out;
    out["w1_star"] = w_stars[0];
    out["w2_star"] = w_stars[1];
    if (samples.size() == 2) {
        const clrg::GameSolution sol = clrg::nash_strategies(w_stars[0], w_stars[1], game);
        const clrg::IndexSplit split = clrg::index_split(w_stars[0], w_stars[1], tol);
        out["ensemble"] = sol.ensemble;
        out["strategies"] = sol.strategies;
        json u = json::array(), v = json::array();
        for (std::size_t i : split.u_set) u.push_back(i + 1);
        for (std::size_t i : split.v_set) v.push_back(i + 1);
        out["u_set"] = u;
        out["v_set"] = v;
        out["stability"] =
            clrg::to_string(clrg::variational_stability_check(moments[0].sigma, moments[1].sigma));
    } else {
        out["ensemble"] = clrg::nash_ensemble_multi(w_stars, game);
        out["strategies"] = nullptr;
        out["u_set"] = nullptr;
        out["v_set"] = nullptr;
        out["stability"] = "Unknown";
    }
    write_text(out_path, out.dump(2) + "\n");
    return 0;
}

int cmd_trace(const std::string& in_path, const std::string& dynamic, double w_sup, double tol,
              std::size_t rounds, double beta, std::size_t batch, std::size_t epochs,
              const std::string& penalty, double lambda, std::uint64_t seed,
              const std::string& out_path, const std::string& svg_path) {
    const std::vector<clrg::EnvSample> samples = clrg::read_samples_csv(in_path);
    if (samples.size() < 2) throw clrg::Error("trace: need at least 2 environments");
    const clrg::DynamicsParams params =
        dynamics_from_flags(w_sup, tol, rounds, beta, batch, epochs, penalty, lambda, seed);

    clrg::DynamicsTrace trace;
    if (dynamic == "exact") {
        std::vector<clrg::EnvironmentMoments> moments;
        for (const auto& s : samples) moments.push_back(clrg::moments_from_sample(s));
        trace = clrg::exact_brd_multi(moments, params);
    } else if (dynamic == "sgd") {
        trace = clrg::sgd_brd(samples, params);
    } else if (dynamic == "clamp" || dynamic == "signed") {
        std::vector<clrg::Vector> w_stars;
        for (const auto& s : samples)
            w_stars.push_back(clrg::least_squares(clrg::moments_from_sample(s)).w_star);
        if (w_stars.size() != 2)
            throw clrg::Error("trace: clamp/signed dynamics are two-environment only");
        trace = dynamic == "clamp" ? clrg::clamp_brd(w_stars[0], w_stars[1], params)
                                   : clrg::signed_grad_brd(w_stars[0], w_stars[1], params);
    } else {
        throw CLI::ValidationError("--dynamic must be exact, clamp, signed, or sgd");
    }

    if (out_path.empty() || out_path == "-")
        clrg::write_trace_csv(std::cout, trace);
    else
        clrg::write_trace_csv(out_path, trace);

    if (!svg_path.empty()) {
        const std::size_t d = trace.final_ensemble.size();
        clrg::LineChart chart;
        chart.title = "Coefficient trajectories (" + dynamic + ")";
        chart.x_label = "round";
        chart.y_label = "coefficient";
        for (std::size_t e = 0; e < samples.size(); ++e)
            for (std::size_t j = 0; j < d; ++j) {
                clrg::ChartSeries series;
                series.label = "w" + std::to_string(e + 1) + "[" + std::to_string(j + 1) + "]";
                for (const auto& round : trace.rounds)
                    series.points.emplace_back(static_cast<double>(round.round),
                                               round.strategies[e][j]);
                chart.series.push_back(std::move(series));
            }
        for (std::size_t j = 0; j < d; ++j) {
            clrg::ChartSeries series;
            series.label = "ensemble[" + std::to_string(j + 1) + "]";
            for (const auto& round : trace.rounds)
                series.points.emplace_back(static_cast<double>(round.round), round.ensemble[j]);
            chart.series.push_back(std::move(series));
        }
        clrg::write_line_chart(svg_path, chart);
    }
    std::cerr << "rounds=" << trace.total_rounds << " converged=" << trace.converged
              << " stop=" << clrg::to_string(trace.stop_reason) << "\n";
    return 0;
}

int cmd_bench(const std::string& setting, std::size_t p, std::size_t q,
              const std::vector<std::size_t>& sizes, std::size_t trials,
              const std::vector<std::string>& methods, std::uint64_t seed, double w_sup,
              const std::string& out_path, const std::string& svg_path, bool log_y) {
    clrg::ExperimentSpec spec;
    spec.setting = clrg::setting_from_string(setting);
    spec.p = p;
    spec.q = q;
    if (!sizes.empty()) spec.sample_sizes = sizes;
    spec.trials = trials;
    if (!methods.empty()) {
        spec.methods.clear();
        for (const auto& m : methods) spec.methods.push_back(clrg::method_from_string(m));
    }
    spec.seed = seed;
    spec.dynamics.w_sup = w_sup;
    spec.validate();

    const clrg::ExperimentReport report = clrg::run_experiment(spec);
    if (out_path.empty() || out_path == "-")
        clrg::write_report_csv(std::cout, report);
    else
        clrg::write_report_csv(out_path, report);

    if (!svg_path.empty()) {
        clrg::LineChart chart;
        chart.title = "Estimation error vs sample size (" + setting + ")";
        chart.x_label = "n per environment";
        chart.y_label = "mean estimation error";
        chart.log_y = log_y;
        for (clrg::Method method : report.spec.methods) {
            clrg::ChartSeries series;
            series.label = clrg::to_string(method);
            for (std::size_t n : report.spec.sample_sizes) {
                const auto& cell = report.cells.at({method, n});
                if (!cell.errors.empty())
                    series.points.emplace_back(static_cast<double>(n), cell.mean_error);
            }
            chart.series.push_back(std::move(series));
        }
        clrg::write_line_chart(svg_path, chart);
    }
    return 0;
}

bool check(const char* name, bool ok, int& failures) {
    std::cout << (ok ? "pass" : "FAIL") << "  " << name << "\n";
    if (!ok) ++failures;
    return ok;
}

// Fast self-checks of the library's core invariants.
int cmd_verify(std::uint64_t seed) {
    int failures = 0;
    clrg::Rng rng(seed);

    {
        bool ok = true;
        for (int trial = 0; trial < 40 && ok; ++trial) {
            const std::size_t d = 1 + static_cast<std::size_t>(rng.next() % 6);
            clrg::Vector w1(d), w2(d);
            for (std::size_t i = 0; i < d; ++i) {
                w1[i] = 1.5 * (2.0 * rng.uniform() - 1.0);
                w2[i] = 1.5 * (2.0 * rng.uniform() - 1.0);
            }
            clrg::Matrix sigma = clrg::Matrix::identity(d);
            for (std::size_t i = 0; i < d; ++i) sigma(i, i) = 0.5 + rng.uniform();
            clrg::EnvironmentMoments m1{sigma, sigma.mul(w1), clrg::Vector(d, 0.0), {}};
            clrg::EnvironmentMoments m2{sigma, sigma.mul(w2), clrg::Vector(d, 0.0), {}};
            clrg::DynamicsParams params;
            const clrg::DynamicsTrace t = clrg::exact_brd(m1, m2, params);
            const clrg::Vector target = clrg::nash_ensemble(w1, w2);
            ok = t.converged && clrg::norm_inf(clrg::sub(t.final_ensemble, target)) <= 1e-8;
        }
        check("exact best-response dynamic reaches the closed-form ensemble", ok, failures);
    }
    {
        bool ok = true;
        for (int trial = 0; trial < 40 && ok; ++trial) {
            const std::size_t d = 1 + static_cast<std::size_t>(rng.next() % 6);
            clrg::Vector w1(d), w2(d);
            for (std::size_t i = 0; i < d; ++i) {
                w1[i] = 1.5 * (2.0 * rng.uniform() - 1.0);
                w2[i] = 1.5 * (2.0 * rng.uniform() - 1.0);
            }
            clrg::DynamicsParams params;
            const clrg::DynamicsTrace t = clrg::clamp_brd(w1, w2, params);
            ok = t.converged &&
                 clrg::norm_inf(clrg::sub(t.final_ensemble, clrg::nash_ensemble(w1, w2))) <= 1e-8;
        }
        check("clamp dynamic agrees with the closed-form ensemble", ok, failures);
    }
    {
        const clrg::SemConfig cfg = clrg::preset(clrg::Setting::F_HOM, 2, 2, seed);
        std::vector<clrg::EnvSample> samples;
        for (std::size_t e = 0; e < 2; ++e)
            samples.push_back(clrg::sample_environment(cfg, e, 500, clrg::derive_seed(seed, e)));
        std::ostringstream buf;
        clrg::write_samples_csv(buf, samples);
        std::istringstream in(buf.str());
        const std::vector<clrg::EnvSample> back = clrg::read_samples_csv(in);
        bool ok = back.size() == samples.size();
        for (std::size_t e = 0; ok && e < samples.size(); ++e) {
            const auto ma = clrg::moments_from_sample(samples[e]);
            const auto mb = clrg::moments_from_sample(back[e]);
            ok = (ma.sigma - mb.sigma).max_abs() <= 1e-12 &&
                 clrg::norm_inf(clrg::sub(ma.rho, mb.rho)) <= 1e-12;
        }
        check("CSV round-trip preserves empirical moments", ok, failures);
    }
    {
        const clrg::SemConfig cfg = clrg::preset(clrg::Setting::P_HET, 2, 3, seed + 1);
        const clrg::EnvSample a = clrg::sample_environment(cfg, 0, 200, seed + 2);
        const clrg::EnvSample b = clrg::sample_environment(cfg, 0, 200, seed + 2);
        check("sampling is seed-deterministic", (a.x - b.x).max_abs() == 0.0, failures);
    }
    {
        bool ok = true;
        for (int trial = 0; trial < 20 && ok; ++trial) {
            const clrg::SemConfig cfg =
                clrg::preset(clrg::Setting::F_HOM, 3, 3, seed + 10 + trial);
            clrg::SemConfig no_alpha = cfg;
            for (auto& e : no_alpha.envs) e.alpha.assign(cfg.q, 0.0);
            const auto m = clrg::analytic_moments(no_alpha, 0);
            const auto w = clrg::least_squares(m).w_star;
            const auto w2 = clrg::confounder_closed_form(no_alpha, 0).w_star;
            ok = clrg::norm_inf(clrg::sub(w, w2)) <= 1e-9;
        }
        check("confounder-only closed form matches the moment solve", ok, failures);
    }
    std::cout << (failures == 0 ? "all checks passed" : "some checks FAILED") << "\n";
    return failures == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Constrained linear regression games: solvers, dynamics, benchmarks"};
    app.require_subcommand(1);

    std::string setting = "F-HOM", in_path, out_path, svg_path, dynamic = "exact",
                penalty = "none";
    std::size_t p = 1, q = 1, n = 1000, trials = 10, rounds = 100000, batch = 128, epochs = 200;
    std::uint64_t seed = 1;
    double w_sup = 2.0, tol = 1e-10, beta = 0.005, lambda = 0.1;
    std::vector<std::size_t> sizes;
    std::vector<std::string> methods;
    bool log_y = false;

    auto* sim = app.add_subcommand("simulate", "Draw SEM samples to CSV (env,y,x1..xd)");
    sim->add_option("--preset", setting, "F-HOM | P-HOM | F-HET | P-HET");
    sim->add_option("--p", p, "causal feature count");
    sim->add_option("--q", q, "spurious feature count");
    sim->add_option("--n", n, "samples per environment");
    sim->add_option("--seed", seed);
    sim->add_option("--out", out_path, "output CSV ('-' for stdout)");

    auto* solve = app.add_subcommand("solve", "Equilibrium ensemble from a sample CSV (JSON out)");
    solve->add_option("--in", in_path, "input CSV")->required()->check(CLI::ExistingFile);
    solve->add_option("--w-sup", w_sup, "strategy box radius");
    solve->add_option("--tol", tol, "agreement tolerance");
    solve->add_option("--out", out_path, "output JSON ('-' for stdout)");

    auto* trace = app.add_subcommand("trace", "Run a dynamic, emit per-round CSV and SVG");
    trace->add_option("--in", in_path, "input CSV")->required()->check(CLI::ExistingFile);
    trace->add_option("--dynamic", dynamic, "exact | clamp | signed | sgd");
    trace->add_option("--w-sup", w_sup);
    trace->add_option("--tol", tol);
    trace->add_option("--rounds", rounds, "max rounds");
    trace->add_option("--beta", beta, "step size (signed/sgd)");
    trace->add_option("--batch", batch, "minibatch size (sgd)");
    trace->add_option("--epochs", epochs, "epoch budget (sgd)");
    trace->add_option("--penalty", penalty, "none | linf | l2 (sgd)");
    trace->add_option("--lambda", lambda, "penalty weight");
    trace->add_option("--seed", seed);
    trace->add_option("--out", out_path, "trace CSV ('-' for stdout)");
    trace->add_option("--svg", svg_path, "trajectory chart SVG");

    auto* bench = app.add_subcommand("bench", "Estimation-error sweep over sample sizes");
    bench->add_option("--setting", setting, "F-HOM | P-HOM | F-HET | P-HET");
    bench->add_option("--p", p);
    bench->add_option("--q", q);
    bench->add_option("--sizes", sizes, "per-environment sample sizes")->delimiter(',');
    bench->add_option("--trials", trials);
    bench->add_option("--methods", methods,
                      "subset of CLRG_SGD,CLRG_EXACT,ULRG,RINF_LRG,R2_LRG,ERM,ORACLE")
        ->delimiter(',');
    bench->add_option("--seed", seed);
    bench->add_option("--w-sup", w_sup);
    bench->add_option("--out", out_path, "report CSV ('-' for stdout)");
    bench->add_option("--svg", svg_path, "error-vs-n chart SVG");
    bench->add_flag("--log-y", log_y, "log-scale the error axis");

    auto* verify = app.add_subcommand("verify", "Run the built-in invariant checks");
    verify->add_option("--seed", seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (sim->parsed()) return cmd_simulate(setting, p, q, n, seed, out_path);
        if (solve->parsed()) return cmd_solve(in_path, w_sup, tol, out_path);
        if (trace->parsed())
            return cmd_trace(in_path, dynamic, w_sup, tol, rounds, beta, batch, epochs, penalty,
                             lambda, seed, out_path, svg_path);
        if (bench->parsed())
            return cmd_bench(setting, p, q, sizes, trials, methods, seed, w_sup, out_path,
                             svg_path, log_y);
        if (verify->parsed()) return cmd_verify(seed);
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
