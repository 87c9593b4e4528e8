#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "clrg/dynamics.hpp"
#include "clrg/errors.hpp"
#include "clrg/game.hpp"
#include "clrg/numerics.hpp"
#include "clrg/population.hpp"
#include "clrg/rng.hpp"
#include "clrg/sem.hpp"

namespace clrg {

// Squared distance from the ideal out-of-distribution model (1_p, 0_q).
inline double estimation_error(const Vector& w, std::size_t p, std::size_t q) {
    if (w.size() != p + q)
        throw DimensionMismatch("estimation_error: dim(w) != p + q");
    double s = 0.0;
    for (std::size_t i = 0; i < p; ++i) s += (w[i] - 1.0) * (w[i] - 1.0);
    for (std::size_t i = p; i < p + q; ++i) s += w[i] * w[i];
    return s;
}

enum class Method { ClrgSgd, ClrgExact, Ulrg, RinfLrg, R2Lrg, Erm, Oracle };

inline std::string to_string(Method m) {
    switch (m) {
        case Method::ClrgSgd: return "CLRG_SGD";
        case Method::ClrgExact: return "CLRG_EXACT";
        case Method::Ulrg: return "ULRG";
        case Method::RinfLrg: return "RINF_LRG";
        case Method::R2Lrg: return "R2_LRG";
        case Method::Erm: return "ERM";
        case Method::Oracle: return "ORACLE";
    }
    return "?";
}

inline Method method_from_string(const std::string& s) {
    if (s == "CLRG_SGD") return Method::ClrgSgd;
    if (s == "CLRG_EXACT") return Method::ClrgExact;
    if (s == "ULRG") return Method::Ulrg;
    if (s == "RINF_LRG") return Method::RinfLrg;
    if (s == "R2_LRG") return Method::R2Lrg;
    if (s == "ERM") return Method::Erm;
    if (s == "ORACLE") return Method::Oracle;
    throw Error("unknown method: " + s);
}

struct ExperimentSpec {
    Setting setting = Setting::F_HOM;
    std::size_t p = 5;
    std::size_t q = 5;
    std::vector<std::size_t> sample_sizes{20, 100, 250, 500, 750, 1000};
    std::size_t trials = 10;
    std::vector<Method> methods{Method::ClrgSgd, Method::Erm};
    std::uint64_t seed = 1;
    DynamicsParams dynamics;
    // Redraw alpha/theta/eta per trial by default; a fixed instance keeps
    // the trial-0 draw for every trial.
    bool redraw_per_trial = true;

    void validate() const {
        if (trials < 1) throw Error("ExperimentSpec: trials must be >= 1");
        if (sample_sizes.empty()) throw Error("ExperimentSpec: sample_sizes is empty");
        if (!std::is_sorted(sample_sizes.begin(), sample_sizes.end()))
            throw Error("ExperimentSpec: sample_sizes must be ascending");
        if (methods.empty()) throw Error("ExperimentSpec: methods is empty");
    }
};

struct CellResult {
    std::vector<double> errors;          // one per successful trial, trial order
    std::vector<std::string> failures;   // per-trial error messages, "" if ok
    double mean_error = std::numeric_limits<double>::quiet_NaN();
    double stderr_error = std::numeric_limits<double>::quiet_NaN();
};

struct ExperimentReport {
    ExperimentSpec spec;
    // Keyed by (method, sample size), trial-aggregated.
    std::map<std::pair<Method, std::size_t>, CellResult> cells;
    double wall_seconds = 0.0;
};

namespace detail {

inline std::size_t thread_budget() {
    if (const char* env = std::getenv("CLRG_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<std::size_t>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

inline Vector fit_method(Method method, const SemConfig& cfg,
                         const std::vector<EnvSample>& samples,
                         const DynamicsParams& base) {
    const std::size_t d = cfg.dim();
    switch (method) {
        case Method::Oracle: {
            Vector w(d, 0.0);
            for (std::size_t i = 0; i < cfg.p; ++i) w[i] = 1.0;
            return w;
        }
        case Method::Erm:
            return pooled_empirical_erm(samples);
        case Method::ClrgExact: {
            std::vector<EnvironmentMoments> moments;
            for (const auto& s : samples) moments.push_back(moments_from_sample(s));
            return exact_brd_multi(moments, base).final_ensemble;
        }
        case Method::ClrgSgd:
            return sgd_brd(samples, base).final_ensemble;
        case Method::Ulrg: {
            DynamicsParams params = base;
            params.w_sup = std::numeric_limits<double>::infinity();
            params.penalty = PenaltyKind::None;
            return sgd_brd(samples, params).final_ensemble;
        }
        case Method::RinfLrg: {
            DynamicsParams params = base;
            params.w_sup = std::numeric_limits<double>::infinity();
            params.penalty = PenaltyKind::LInf;
            return sgd_brd(samples, params).final_ensemble;
        }
        case Method::R2Lrg: {
            DynamicsParams params = base;
            params.w_sup = std::numeric_limits<double>::infinity();
            params.penalty = PenaltyKind::L2;
            return sgd_brd(samples, params).final_ensemble;
        }
    }
    throw Error("fit_method: unreachable");
}

inline void aggregate(CellResult& cell) {
    const auto& e = cell.errors;
    if (e.empty()) return;
    double mean = 0.0;
    for (double v : e) mean += v;
    mean /= static_cast<double>(e.size());
    double var = 0.0;
    for (double v : e) var += (v - mean) * (v - mean);
    const double sd = e.size() > 1 ? std::sqrt(var / static_cast<double>(e.size() - 1)) : 0.0;
    cell.mean_error = mean;
    cell.stderr_error = sd / std::sqrt(static_cast<double>(e.size()));
}

}  // namespace detail

// Monte Carlo harness: per trial a fresh SEM instance is drawn from the
// preset, samples are drawn per sample size, and every requested method is
// fitted. Cells (trial, sample size) run in parallel with per-cell derived
// seeds, so the report is byte-identical regardless of thread count.
inline ExperimentReport run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    const auto t0 = std::chrono::steady_clock::now();

    const std::size_t n_sizes = spec.sample_sizes.size();
    const std::size_t n_cells = spec.trials * n_sizes;
    // results[trial][size_idx][method_idx] = (error, failure message)
    std::vector<std::vector<std::vector<std::pair<double, std::string>>>> results(
        spec.trials,
        std::vector<std::vector<std::pair<double, std::string>>>(
            n_sizes, std::vector<std::pair<double, std::string>>(
                         spec.methods.size(),
                         {std::numeric_limits<double>::quiet_NaN(), ""})));

    std::vector<SemConfig> configs;
    configs.reserve(spec.trials);
    for (std::size_t t = 0; t < spec.trials; ++t) {
        const std::size_t draw = spec.redraw_per_trial ? t : 0;
        configs.push_back(preset(spec.setting, spec.p, spec.q, derive_seed(spec.seed, draw, 0x1A)));
    }

    auto run_cell = [&](std::size_t cell) {
        const std::size_t trial = cell / n_sizes;
        const std::size_t size_idx = cell % n_sizes;
        const std::size_t n = spec.sample_sizes[size_idx];
        const SemConfig& cfg = configs[trial];
        const std::uint64_t cell_seed = derive_seed(spec.seed, trial, size_idx + 0x2B);

        std::vector<EnvSample> samples;
        for (std::size_t e = 0; e < cfg.n_envs(); ++e)
            samples.push_back(sample_environment(cfg, e, n, derive_seed(cell_seed, e, 0x3C)));

        for (std::size_t m = 0; m < spec.methods.size(); ++m) {
            DynamicsParams params = spec.dynamics;
            params.seed = derive_seed(cell_seed, m, 0x4D);
            try {
                const Vector w = detail::fit_method(spec.methods[m], cfg, samples, params);
                results[trial][size_idx][m] = {estimation_error(w, cfg.p, cfg.q), ""};
            } catch (const std::exception& ex) {
                results[trial][size_idx][m] = {std::numeric_limits<double>::quiet_NaN(),
                                               ex.what()};
            }
        }
    };

    const std::size_t workers = std::min(detail::thread_budget(), n_cells);
    if (workers <= 1) {
        for (std::size_t cell = 0; cell < n_cells; ++cell) run_cell(cell);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t cell = next.fetch_add(1); cell < n_cells;
                     cell = next.fetch_add(1))
                    run_cell(cell);
            });
        for (auto& th : pool) th.join();
    }

    ExperimentReport report;
    report.spec = spec;
    for (std::size_t m = 0; m < spec.methods.size(); ++m) {
        for (std::size_t s = 0; s < n_sizes; ++s) {
            CellResult cell;
            cell.failures.resize(spec.trials, "");
            for (std::size_t t = 0; t < spec.trials; ++t) {
                const auto& [err, failure] = results[t][s][m];
                cell.failures[t] = failure;
                if (failure.empty()) cell.errors.push_back(err);
            }
            detail::aggregate(cell);
            report.cells[{spec.methods[m], spec.sample_sizes[s]}] = std::move(cell);
        }
    }
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

struct VariantRow {
    std::string label;
    Vector model;      // median-error trial's fitted model
    double median_error = 0.0;
};

struct VariantComparisonReport {
    std::vector<VariantRow> rows;
    std::size_t trials = 0;
    std::size_t sample_size = 0;
};

// Two-dimensional anti-causal comparison (p = q = 1, F-HOM): the constrained
// game with w_sup in {2, 5} against the unconstrained and penalized variants
// and pooled least squares. The generating model is a fixed instance with a
// unit anti-causal coefficient in both environments; trials redraw only the
// data, so the median isolates estimation noise rather than model draws. The
// training sample size is configurable; 1000 per environment by default.
inline VariantComparisonReport two_dim_comparison(std::uint64_t seed, std::size_t n = 1000,
                                      std::size_t trials = 10) {
    struct Variant {
        std::string label;
        Method method;
        double w_sup;
    };
    const std::vector<Variant> variants{
        {"C-LRG(w_sup=2)", Method::ClrgSgd, 2.0},
        {"C-LRG(w_sup=5)", Method::ClrgSgd, 5.0},
        {"U-LRG", Method::Ulrg, 0.0},
        {"Rinf-LRG", Method::RinfLrg, 0.0},
        {"R2-LRG", Method::R2Lrg, 0.0},
        {"ERM", Method::Erm, 0.0},
    };

    SemConfig cfg = preset(Setting::F_HOM, 1, 1, derive_seed(seed, 0, 0x1A));
    for (auto& env : cfg.envs) env.alpha[0] = 1.0;

    VariantComparisonReport report;
    report.trials = trials;
    report.sample_size = n;
    for (const auto& variant : variants) {
        std::vector<std::pair<double, Vector>> outcomes;
        for (std::size_t t = 0; t < trials; ++t) {
            std::vector<EnvSample> samples;
            for (std::size_t e = 0; e < cfg.n_envs(); ++e)
                samples.push_back(
                    sample_environment(cfg, e, n, derive_seed(derive_seed(seed, t, 0x2B), e, 0x3C)));
            DynamicsParams params;
            params.w_sup = variant.w_sup;
            params.seed = derive_seed(seed, t, 0x4D);
            const Vector w = detail::fit_method(variant.method, cfg, samples, params);
            outcomes.emplace_back(estimation_error(w, 1, 1), w);
        }
        std::sort(outcomes.begin(), outcomes.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        const auto& mid = outcomes[outcomes.size() / 2];
        report.rows.push_back({variant.label, mid.second, mid.first});
    }
    return report;
}

}  // namespace clrg
