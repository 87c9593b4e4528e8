#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "clrg/errors.hpp"
#include "clrg/game.hpp"
#include "clrg/numerics.hpp"
#include "clrg/population.hpp"
#include "clrg/rng.hpp"
#include "clrg/sem.hpp"

namespace clrg {

enum class PenaltyKind { None, LInf, L2 };

enum class StopReason { Tolerance, MaxRounds, OscillationDetected, Diverged };

inline std::string to_string(StopReason r) {
    switch (r) {
        case StopReason::Tolerance: return "tolerance";
        case StopReason::MaxRounds: return "max_rounds";
        case StopReason::OscillationDetected: return "oscillation_detected";
        case StopReason::Diverged: return "diverged";
    }
    return "?";
}

struct DynamicsParams {
    double w_sup = 2.0;
    double tol = 1e-10;          // stopping threshold on ||w^t - w^{t-1}||
    std::size_t max_rounds = 100000;
    double beta = 0.005;         // step length for gradient dynamics
    std::size_t batch_size = 128;
    std::size_t epochs = 200;
    PenaltyKind penalty = PenaltyKind::None;
    double lambda = 0.1;
    std::uint64_t seed = 0;
    bool env1_first = true;      // canonical turn order; swappable for symmetry tests
    std::size_t trace_stride = 1;
    // Stop (stop_reason = diverged) once a strategy leaves this l-inf radius;
    // used to demonstrate unconstrained non-existence of NE.
    double diverge_threshold = std::numeric_limits<double>::infinity();

    void validate() const {
        if (!(tol > 0.0)) throw Error("DynamicsParams: tol must be > 0");
        if (max_rounds < 1) throw Error("DynamicsParams: max_rounds must be >= 1");
        if (!(beta > 0.0)) throw Error("DynamicsParams: beta must be > 0");
    }
};

struct DynamicsRound {
    std::size_t round = 0;
    std::vector<Vector> strategies;
    Vector ensemble;
    Vector risks;  // one value per environment
};

struct DynamicsTrace {
    std::vector<DynamicsRound> rounds;
    bool converged = false;
    StopReason stop_reason = StopReason::MaxRounds;
    std::size_t total_rounds = 0;
    std::vector<Vector> final_strategies;
    // Final ensemble; for the oscillating signed dynamic this is the band
    // center (mean of the two cycle states) rather than the last iterate.
    Vector final_ensemble;
};

namespace detail {

inline double quadratic_risk(const Matrix& sigma, const Vector& rho, const Vector& ensemble) {
    return dot(ensemble, sigma.mul(ensemble)) - 2.0 * dot(rho, ensemble);
}

// Exact minimizer of (x+o)^T Sigma (x+o) - 2 rho^T (x+o) over the box
// |x|_inf <= w_sup, by cyclic exact coordinate minimization with clamping.
// Strictly convex quadratic over a box, so the sweep converges; inner
// tolerance 1e-12.
inline Vector box_quadratic_best_response(const Matrix& sigma, const Vector& rho,
                                          const Vector& other, Vector x, double w_sup) {
    const std::size_t d = rho.size();
    Vector u = add(x, other);
    for (std::size_t sweep = 0; sweep < 100000; ++sweep) {
        double max_change = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            double su = 0.0;
            for (std::size_t j = 0; j < d; ++j) su += sigma(i, j) * u[j];
            const double ui_free = (rho[i] - su + sigma(i, i) * u[i]) / sigma(i, i);
            const double xi_new = std::clamp(ui_free - other[i], -w_sup, w_sup);
            max_change = std::max(max_change, std::abs(xi_new - x[i]));
            x[i] = xi_new;
            u[i] = xi_new + other[i];
        }
        if (max_change <= 1e-12) break;
    }
    return x;
}

inline void record_round(DynamicsTrace& trace, std::size_t round,
                         const std::vector<Vector>& strategies, const Vector& ensemble,
                         Vector risks) {
    trace.rounds.push_back({round, strategies, ensemble, std::move(risks)});
}

}  // namespace detail

// Alternating exact best responses on population/empirical moments
// (Algorithm-1 style), generalized to r >= 2 environments played round-robin.
inline DynamicsTrace exact_brd_multi(const std::vector<EnvironmentMoments>& moments,
                                     const DynamicsParams& params) {
    params.validate();
    if (moments.size() < 2) throw DimensionMismatch("exact_brd_multi: need >= 2 environments");
    const std::size_t r = moments.size();
    const std::size_t d = moments.front().dim();
    for (const auto& m : moments) {
        if (m.dim() != d) throw DimensionMismatch("exact_brd_multi: moment dims differ");
        detail::cholesky(m.sigma);  // surfaces NotPositiveDefinite up-front
    }
    if (!(params.w_sup > 0.0)) throw Error("exact_brd_multi: w_sup must be > 0");

    std::vector<Vector> strategies(r, Vector(d, 0.0));
    DynamicsTrace trace;
    for (std::size_t round = 1; round <= params.max_rounds; ++round) {
        double max_diff = 0.0;
        for (std::size_t e = 0; e < r; ++e) {
            const std::size_t who = params.env1_first ? e : (r - 1 - e);
            Vector others(d, 0.0);
            for (std::size_t f = 0; f < r; ++f)
                if (f != who) others = add(others, strategies[f]);
            Vector updated = detail::box_quadratic_best_response(
                moments[who].sigma, moments[who].rho, others, strategies[who], params.w_sup);
            max_diff = std::max(max_diff, norm2(sub(updated, strategies[who])));
            strategies[who] = std::move(updated);
        }
        Vector ensemble(d, 0.0);
        for (const auto& s : strategies) ensemble = add(ensemble, s);
        trace.total_rounds = round;
        if (round % params.trace_stride == 0 || max_diff <= params.tol ||
            round == params.max_rounds) {
            Vector risks(r);
            for (std::size_t e = 0; e < r; ++e)
                risks[e] = detail::quadratic_risk(moments[e].sigma, moments[e].rho, ensemble);
            detail::record_round(trace, round, strategies, ensemble, std::move(risks));
        }
        if (max_diff <= params.tol) {
            trace.converged = true;
            trace.stop_reason = StopReason::Tolerance;
            trace.final_strategies = strategies;
            trace.final_ensemble = ensemble;
            return trace;
        }
    }
    trace.converged = false;
    trace.stop_reason = StopReason::MaxRounds;
    trace.final_strategies = strategies;
    Vector ensemble(d, 0.0);
    for (const auto& s : strategies) ensemble = add(ensemble, s);
    trace.final_ensemble = ensemble;
    return trace;
}

inline DynamicsTrace exact_brd(const EnvironmentMoments& m1, const EnvironmentMoments& m2,
                               const DynamicsParams& params) {
    return exact_brd_multi({m1, m2}, params);
}

namespace detail {
inline void check_realizable(const Vector& w_star, std::size_t env, double w_sup) {
    for (std::size_t i = 0; i < w_star.size(); ++i)
        if (std::abs(w_star[i]) > w_sup)
            throw RealizabilityViolated(
                "Assumption 5 (Realizability) violated: |w*_" + std::to_string(env + 1) + "," +
                std::to_string(i + 1) + "| = " + std::to_string(std::abs(w_star[i])) +
                " > w_sup = " + std::to_string(w_sup));
}
}  // namespace detail

// Clamp dynamic: w_e^t = Pi_W[w_e^* - w_{-e}^{t-1}], alternating. Equivalent
// to the exact dynamic when the varying-coefficient features are uncorrelated.
inline DynamicsTrace clamp_brd(const Vector& w1_star, const Vector& w2_star,
                               const DynamicsParams& params) {
    params.validate();
    if (w1_star.size() != w2_star.size()) throw DimensionMismatch("clamp_brd: dims differ");
    detail::check_realizable(w1_star, 0, params.w_sup);
    detail::check_realizable(w2_star, 1, params.w_sup);
    const std::size_t d = w1_star.size();
    const Vector* targets[2] = {&w1_star, &w2_star};

    std::vector<Vector> strategies(2, Vector(d, 0.0));
    DynamicsTrace trace;
    for (std::size_t round = 1; round <= params.max_rounds; ++round) {
        double max_diff = 0.0;
        for (int turn = 0; turn < 2; ++turn) {
            const std::size_t who = params.env1_first ? turn : 1 - turn;
            const std::size_t other = 1 - who;
            Vector updated = clamp_linf(sub(*targets[who], strategies[other]), params.w_sup);
            max_diff = std::max(max_diff, norm2(sub(updated, strategies[who])));
            strategies[who] = std::move(updated);
        }
        Vector ensemble = add(strategies[0], strategies[1]);
        trace.total_rounds = round;
        const double growth = std::max(norm_inf(strategies[0]), norm_inf(strategies[1]));
        const bool stop = max_diff <= params.tol || growth > params.diverge_threshold ||
                          round == params.max_rounds;
        if (round % params.trace_stride == 0 || stop) {
            Vector risks(2);
            for (std::size_t e = 0; e < 2; ++e) {
                const Vector dev = sub(ensemble, *targets[e]);
                risks[e] = dot(dev, dev);
            }
            detail::record_round(trace, round, strategies, ensemble, std::move(risks));
        }
        if (max_diff <= params.tol) {
            trace.converged = true;
            trace.stop_reason = StopReason::Tolerance;
            trace.final_strategies = strategies;
            trace.final_ensemble = ensemble;
            return trace;
        }
        if (growth > params.diverge_threshold) {
            trace.converged = false;
            trace.stop_reason = StopReason::Diverged;
            trace.final_strategies = strategies;
            trace.final_ensemble = ensemble;
            return trace;
        }
    }
    trace.converged = false;
    trace.stop_reason = StopReason::MaxRounds;
    trace.final_strategies = strategies;
    trace.final_ensemble = add(strategies[0], strategies[1]);
    return trace;
}

// Signed-gradient dynamic with simultaneous updates
//   w_e^t = Pi_W[w_e^{t-1} + beta * sgn(w_e^* - wbar^{t-1})],
// the componentwise sign of the (negated) risk gradient. Converges to an
// oscillation band rather than a point; terminates on a detected 2-cycle
// (state repeats within 1e-12) or max_rounds, and reports the band center
// as the final ensemble.
inline DynamicsTrace signed_grad_brd(const Vector& w1_star, const Vector& w2_star,
                                     const DynamicsParams& params) {
    params.validate();
    if (w1_star.size() != w2_star.size()) throw DimensionMismatch("signed_grad_brd: dims differ");
    detail::check_realizable(w1_star, 0, params.w_sup);
    detail::check_realizable(w2_star, 1, params.w_sup);
    const std::size_t d = w1_star.size();
    auto sgn = [](double x) { return x >= 0.0 ? 1.0 : -1.0; };

    std::vector<Vector> cur(2, Vector(d, 0.0));
    std::vector<Vector> prev1, prev2;  // states at t-1 and t-2
    DynamicsTrace trace;
    for (std::size_t round = 1; round <= params.max_rounds; ++round) {
        std::vector<Vector> next(2, Vector(d));
        for (std::size_t i = 0; i < d; ++i) {
            const double bar = cur[0][i] + cur[1][i];
            next[0][i] = std::clamp(cur[0][i] + params.beta * sgn(w1_star[i] - bar),
                                    -params.w_sup, params.w_sup);
            next[1][i] = std::clamp(cur[1][i] + params.beta * sgn(w2_star[i] - bar),
                                    -params.w_sup, params.w_sup);
        }
        prev2 = std::move(prev1);
        prev1 = cur;
        cur = std::move(next);
        Vector ensemble = add(cur[0], cur[1]);
        trace.total_rounds = round;

        double cycle_gap = std::numeric_limits<double>::infinity();
        if (!prev2.empty())
            cycle_gap = std::max(norm_inf(sub(cur[0], prev2[0])), norm_inf(sub(cur[1], prev2[1])));
        const double fixed_gap =
            std::max(norm_inf(sub(cur[0], prev1[0])), norm_inf(sub(cur[1], prev1[1])));
        const bool stop = cycle_gap <= 1e-12 || fixed_gap <= 1e-12 || round == params.max_rounds;

        if (round % params.trace_stride == 0 || stop) {
            Vector risks(2);
            const Vector* targets[2] = {&w1_star, &w2_star};
            for (std::size_t e = 0; e < 2; ++e) {
                const Vector dev = sub(ensemble, *targets[e]);
                risks[e] = dot(dev, dev);
            }
            detail::record_round(trace, round, cur, ensemble, std::move(risks));
        }
        if (fixed_gap <= 1e-12) {
            trace.converged = true;
            trace.stop_reason = StopReason::Tolerance;
            trace.final_strategies = cur;
            trace.final_ensemble = ensemble;
            return trace;
        }
        if (cycle_gap <= 1e-12) {
            trace.converged = true;
            trace.stop_reason = StopReason::OscillationDetected;
            trace.final_strategies = cur;
            trace.final_ensemble =
                scaled(add(add(cur[0], cur[1]), add(prev1[0], prev1[1])), 0.5);
            return trace;
        }
    }
    trace.converged = false;
    trace.stop_reason = StopReason::MaxRounds;
    trace.final_strategies = cur;
    trace.final_ensemble = add(cur[0], cur[1]);
    return trace;
}

// Alternating projected minibatch SGD on per-environment squared losses;
// odd turns environment 1, even turns environment 2. Minibatches come from
// per-environment shuffled epochs, seed-deterministic. A penalty on the
// environment's own strategy can be added (l-inf uses a subgradient: sign on
// the max-magnitude components, ties split equally).
inline DynamicsTrace sgd_brd(const std::vector<EnvSample>& samples,
                             const DynamicsParams& params) {
    params.validate();
    if (samples.empty()) throw EmptySample("sgd_brd: no samples");
    const std::size_t r = samples.size();
    const std::size_t d = samples.front().x.cols();
    for (const auto& s : samples) {
        if (s.size() < 1) throw EmptySample("sgd_brd: empty environment sample");
        if (s.x.cols() != d) throw DimensionMismatch("sgd_brd: feature dims differ");
    }
    const bool project = std::isfinite(params.w_sup);

    std::vector<Vector> strategies(r, Vector(d, 0.0));
    std::vector<std::vector<std::size_t>> order(r);
    std::vector<Rng> streams;
    std::size_t max_batches = 0;
    for (std::size_t e = 0; e < r; ++e) {
        order[e].resize(samples[e].size());
        std::iota(order[e].begin(), order[e].end(), 0);
        streams.emplace_back(derive_seed(params.seed, e, 0x5D6));
        const std::size_t nb =
            (samples[e].size() + params.batch_size - 1) / std::max<std::size_t>(params.batch_size, 1);
        max_batches = std::max(max_batches, nb);
    }

    auto grad_step = [&](std::size_t e, std::size_t batch) {
        const EnvSample& s = samples[e];
        const std::size_t n = s.size();
        const std::size_t bsz = std::min(params.batch_size, n);
        Vector ensemble(d, 0.0);
        for (const auto& w : strategies) ensemble = add(ensemble, w);
        Vector grad(d, 0.0);
        for (std::size_t k = 0; k < bsz; ++k) {
            const std::size_t idx = order[e][(batch * bsz + k) % n];
            double pred = 0.0;
            for (std::size_t j = 0; j < d; ++j) pred += ensemble[j] * s.x(idx, j);
            const double resid = s.y[idx] - pred;
            for (std::size_t j = 0; j < d; ++j) grad[j] += -2.0 * resid * s.x(idx, j);
        }
        for (auto& g : grad) g /= static_cast<double>(bsz);
        Vector& w = strategies[e];
        if (params.penalty == PenaltyKind::L2) {
            for (std::size_t j = 0; j < d; ++j) grad[j] += 2.0 * params.lambda * w[j];
        } else if (params.penalty == PenaltyKind::LInf) {
            const double m = norm_inf(w);
            if (m > 0.0) {
                std::vector<std::size_t> at_max;
                for (std::size_t j = 0; j < d; ++j)
                    if (std::abs(std::abs(w[j]) - m) <= 1e-15) at_max.push_back(j);
                const double share = params.lambda / static_cast<double>(at_max.size());
                for (std::size_t j : at_max) grad[j] += share * (w[j] >= 0.0 ? 1.0 : -1.0);
            }
        }
        for (std::size_t j = 0; j < d; ++j) {
            w[j] -= params.beta * grad[j];
            if (project) w[j] = std::clamp(w[j], -params.w_sup, params.w_sup);
        }
    };

    auto env_mse = [&](std::size_t e, const Vector& ensemble) {
        const EnvSample& s = samples[e];
        double mse = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            double pred = 0.0;
            for (std::size_t j = 0; j < d; ++j) pred += ensemble[j] * s.x(i, j);
            const double resid = s.y[i] - pred;
            mse += resid * resid;
        }
        return mse / static_cast<double>(s.size());
    };

    DynamicsTrace trace;
    std::size_t round = 0;
    for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
        for (std::size_t e = 0; e < r; ++e)
            std::shuffle(order[e].begin(), order[e].end(), streams[e].engine());
        for (std::size_t b = 0; b < max_batches; ++b) {
            for (std::size_t t = 0; t < r; ++t) {
                const std::size_t who = params.env1_first ? t : (r - 1 - t);
                grad_step(who, b);
            }
            ++round;
            trace.total_rounds = round;
            const bool last = (epoch + 1 == params.epochs) && (b + 1 == max_batches);
            if (round % params.trace_stride == 0 || last) {
                Vector ensemble(d, 0.0);
                for (const auto& w : strategies) ensemble = add(ensemble, w);
                Vector risks(r);
                for (std::size_t e = 0; e < r; ++e) risks[e] = env_mse(e, ensemble);
                detail::record_round(trace, round, strategies, ensemble, std::move(risks));
            }
        }
    }
    trace.converged = true;  // fixed epoch budget, no tolerance test
    trace.stop_reason = StopReason::MaxRounds;
    trace.final_strategies = strategies;
    Vector ensemble(d, 0.0);
    for (const auto& w : strategies) ensemble = add(ensemble, w);
    trace.final_ensemble = ensemble;
    return trace;
}

// Bound on the number of exact minimizations: 2 w_sup / Delta_min with
// Delta_min the smallest across-environment coefficient gap on V.
inline double iteration_bound(const Vector& w1_star, const Vector& w2_star, double w_sup,
                              const IndexSplit& split) {
    if (w1_star.size() != w2_star.size())
        throw DimensionMismatch("iteration_bound: dims differ");
    if (split.v_set.empty())
        throw EmptyVSet("iteration_bound: V is empty; the dynamic converges in <= 2 rounds");
    double delta_min = std::numeric_limits<double>::infinity();
    for (std::size_t i : split.v_set)
        delta_min = std::min(delta_min, std::abs(w1_star[i] - w2_star[i]));
    return 2.0 * w_sup / delta_min;
}

}  // namespace clrg
