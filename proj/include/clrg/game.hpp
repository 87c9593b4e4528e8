#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "clrg/errors.hpp"
#include "clrg/numerics.hpp"
#include "clrg/population.hpp"
#include "clrg/sem.hpp"

namespace clrg {

struct GameConfig {
    double w_sup = 2.0;      // l-infinity radius of the strategy box
    double tolerance = 1e-9; // equality/sign threshold for the indicator tests

    void validate() const {
        if (!(w_sup > 0.0) || !std::isfinite(w_sup))
            throw Error("GameConfig: w_sup must be positive and finite");
    }
};

enum class BoundaryStatus { Interior, AtUpper, AtLower };

// Nash-equilibrium strategy profile: one predictor per environment plus their
// sum (the ensemble, which carries the OOD guarantee).
struct GameSolution {
    std::vector<Vector> strategies;
    Vector ensemble;
    std::vector<std::vector<BoundaryStatus>> boundary_flags;  // [env][component]
};

// Feature indices whose least-squares coefficients agree (U) or differ (V)
// across environments.
struct IndexSplit {
    std::vector<std::size_t> u_set;
    std::vector<std::size_t> v_set;
};

inline IndexSplit index_split(const Vector& w1, const Vector& w2, double tol = 1e-9) {
    if (w1.size() != w2.size()) throw DimensionMismatch("index_split: dims differ");
    IndexSplit s;
    for (std::size_t i = 0; i < w1.size(); ++i) {
        if (std::abs(w1[i] - w2[i]) <= tol)
            s.u_set.push_back(i);
        else
            s.v_set.push_back(i);
    }
    return s;
}

inline IndexSplit index_split(const LeastSquaresSolution& w1, const LeastSquaresSolution& w2,
                              double tol = 1e-9) {
    return index_split(w1.w_star, w2.w_star, tol);
}

namespace detail {
// Sign with a dead zone: |x| <= tol counts as zero so the closed inequality
// (product >= 0) is honored under finite precision.
inline int sign_tol(double x, double tol) {
    if (x > tol) return 1;
    if (x < -tol) return -1;
    return 0;
}
}  // namespace detail

// Componentwise ensemble at the Nash equilibrium: zero where the two
// least-squares coefficients have strictly opposite signs, otherwise the
// coefficient of smaller absolute value (ties resolve to w1).
inline Vector nash_ensemble(const Vector& w1, const Vector& w2, double tol = 1e-9) {
    if (w1.size() != w2.size()) throw DimensionMismatch("nash_ensemble: dims differ");
    Vector out(w1.size());
    for (std::size_t i = 0; i < w1.size(); ++i) {
        const int s1 = detail::sign_tol(w1[i], tol);
        const int s2 = detail::sign_tol(w2[i], tol);
        if (s1 * s2 < 0) {
            out[i] = 0.0;
        } else {
            out[i] = (std::abs(w2[i]) >= std::abs(w1[i])) ? w1[i] : w2[i];
        }
    }
    return out;
}

// Full strategy profile behind the ensemble, casewise:
//   opposite signs          -> (sign(w1) w_sup, sign(w2) w_sup), summing to 0
//   same sign, |w1| < |w2|  -> env 2 at sign*w_sup, env 1 at w1 - sign*w_sup
//   (mirrored when |w2| < |w1|)
//   equal coefficients      -> the symmetric half/half split, one
//                              representative of the equilibrium continuum
inline GameSolution nash_strategies(const Vector& w1, const Vector& w2, const GameConfig& cfg) {
    cfg.validate();
    if (w1.size() != w2.size()) throw DimensionMismatch("nash_strategies: dims differ");
    for (std::size_t e = 0; e < 2; ++e) {
        const Vector& w = (e == 0) ? w1 : w2;
        for (std::size_t i = 0; i < w.size(); ++i)
            if (std::abs(w[i]) > cfg.w_sup)
                throw RealizabilityViolated(
                    "Assumption 5 (Realizability) violated: |w*_" + std::to_string(e + 1) + "," +
                    std::to_string(i + 1) + "| = " + std::to_string(std::abs(w[i])) +
                    " > w_sup = " + std::to_string(cfg.w_sup));
    }
    const std::size_t d = w1.size();
    GameSolution sol;
    sol.strategies = {Vector(d), Vector(d)};
    sol.ensemble = Vector(d);
    for (std::size_t i = 0; i < d; ++i) {
        const double tol = cfg.tolerance;
        const int s1 = detail::sign_tol(w1[i], tol);
        const int s2 = detail::sign_tol(w2[i], tol);
        double a, b;
        if (std::abs(w1[i] - w2[i]) <= tol) {
            a = 0.5 * w1[i];
            b = 0.5 * w1[i];
        } else if (s1 * s2 < 0) {
            a = s1 * cfg.w_sup;
            b = s2 * cfg.w_sup;
        } else if (std::abs(w1[i]) <= std::abs(w2[i])) {
            const double s = (s2 != 0) ? s2 : (s1 != 0 ? s1 : 1);
            b = s * cfg.w_sup;
            a = w1[i] - s * cfg.w_sup;
        } else {
            const double s = (s1 != 0) ? s1 : 1;
            a = s * cfg.w_sup;
            b = w2[i] - s * cfg.w_sup;
        }
        sol.strategies[0][i] = a;
        sol.strategies[1][i] = b;
        sol.ensemble[i] = a + b;
    }
    sol.boundary_flags.resize(2);
    for (std::size_t e = 0; e < 2; ++e) {
        sol.boundary_flags[e].resize(d);
        for (std::size_t i = 0; i < d; ++i) {
            const double v = sol.strategies[e][i];
            if (std::abs(v - cfg.w_sup) <= 1e-12)
                sol.boundary_flags[e][i] = BoundaryStatus::AtUpper;
            else if (std::abs(v + cfg.w_sup) <= 1e-12)
                sol.boundary_flags[e][i] = BoundaryStatus::AtLower;
            else
                sol.boundary_flags[e][i] = BoundaryStatus::Interior;
        }
    }
    return sol;
}

// Multi-environment ensemble: componentwise median rule. Odd r takes the
// median coefficient; even r applies the two-environment rule to the middle
// pair, so r = 2 reduces exactly to nash_ensemble.
inline Vector nash_ensemble_multi(const std::vector<Vector>& ws, const GameConfig& cfg) {
    cfg.validate();
    if (ws.size() < 2) throw DimensionMismatch("nash_ensemble_multi: need at least 2 vectors");
    const std::size_t d = ws.front().size();
    for (const auto& w : ws)
        if (w.size() != d) throw DimensionMismatch("nash_ensemble_multi: dims differ");
    const std::size_t r = ws.size();
    Vector out(d);
    Vector vals(r);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t e = 0; e < r; ++e) vals[e] = ws[e][i];
        std::sort(vals.begin(), vals.end());
        if (r % 2 == 1) {
            out[i] = vals[r / 2];
        } else {
            const double lo = vals[r / 2 - 1], hi = vals[r / 2];
            const int slo = detail::sign_tol(lo, cfg.tolerance);
            const int shi = detail::sign_tol(hi, cfg.tolerance);
            if (slo * shi < 0)
                out[i] = 0.0;
            else
                out[i] = (std::abs(hi) >= std::abs(lo)) ? lo : hi;
        }
    }
    return out;
}

// A pure-strategy NE of the unconstrained game exists iff the least-squares
// solutions agree.
inline bool ulrg_ne_exists(const Vector& w1, const Vector& w2, double tol = 1e-9) {
    if (w1.size() != w2.size()) throw DimensionMismatch("ulrg_ne_exists: dims differ");
    return norm_inf(sub(w1, w2)) <= tol;
}

enum class StabilityStatus { StableEqual, StablePsdZeroMin, Unknown };

inline std::string to_string(StabilityStatus s) {
    switch (s) {
        case StabilityStatus::StableEqual: return "stable_equal";
        case StabilityStatus::StablePsdZeroMin: return "stable_psd_zero_min";
        case StabilityStatus::Unknown: return "unknown";
    }
    return "?";
}

// Variational-stability diagnostic: the NE set is stable when the second
// moments coincide, or when one of Sigma2-Sigma1 / Sigma1-Sigma2 is PSD with
// smallest eigenvalue zero.
inline StabilityStatus variational_stability_check(const Matrix& sigma1, const Matrix& sigma2) {
    if (sigma1.rows() != sigma2.rows() || sigma1.cols() != sigma2.cols())
        throw DimensionMismatch("variational_stability_check: dims differ");
    detail::require_symmetric(sigma1, "variational_stability_check");
    detail::require_symmetric(sigma2, "variational_stability_check");
    const Matrix diff = sigma2 - sigma1;
    if (diff.max_abs() <= 1e-9) return StabilityStatus::StableEqual;
    const double lmin_fwd = min_eigenvalue(diff);
    if (std::abs(lmin_fwd) <= 1e-9) return StabilityStatus::StablePsdZeroMin;
    const double lmin_bwd = min_eigenvalue(sigma1 - sigma2);
    if (std::abs(lmin_bwd) <= 1e-9) return StabilityStatus::StablePsdZeroMin;
    return StabilityStatus::Unknown;
}

// One grid point of the NE-vs-ERM dominance comparison. Distances to the
// ideal predictor are reported both raw and squared (the benchmark metric is
// the squared distance).
struct DominancePoint {
    double pi1 = 0.0;
    double d_ne = 0.0;        // ||ensemble - ideal||
    double d_erm = 0.0;       // ||w_erm - ideal||
    double d_ne_sq = 0.0;
    double d_erm_sq = 0.0;
    bool exception = false;   // measure-zero equality point
};

struct DominanceReport {
    std::vector<DominancePoint> points;
    Vector ensemble;
    bool dominates_everywhere = true;  // ignoring flagged exceptions
};

// Certifies that the NE ensemble is closer to the ideal predictor (gamma, 0)
// than ERM across a pi1 grid, for a confounder-only SEM with orthogonal
// Theta and varying spurious coefficients.
inline DominanceReport dominance_certificate(const SemConfig& cfg,
                                             const std::vector<double>& pi_grid,
                                             const Vector& ideal,
                                             const GameConfig& game = GameConfig{}) {
    cfg.validate();
    if (cfg.n_envs() != 2)
        throw HypothesisViolated("dominance_certificate: exactly 2 environments required");
    for (std::size_t e = 0; e < 2; ++e) {
        if (norm_inf(cfg.envs[e].alpha) > 0.0)
            throw HypothesisViolated("dominance_certificate: alpha must be 0 (confounder-only)");
        const Matrix dev = cfg.envs[e].theta.mul(cfg.envs[e].theta.transpose()) -
                           Matrix::identity(cfg.q);
        if (dev.max_abs() > 1e-8)
            throw HypothesisViolated("dominance_certificate: Theta must be orthogonal");
    }
    if (cfg.spurious_coeffs_vary.has_value() && !*cfg.spurious_coeffs_vary)
        throw HypothesisViolated(
            "dominance_certificate: spurious coefficients do not vary across environments");
    if (ideal.size() != cfg.dim())
        throw DimensionMismatch("dominance_certificate: ideal dim mismatch");

    const LeastSquaresSolution w1 = confounder_closed_form(cfg, 0);
    const LeastSquaresSolution w2 = confounder_closed_form(cfg, 1);
    if (std::max(norm_inf(w1.w_star), norm_inf(w2.w_star)) > game.w_sup)
        throw HypothesisViolated(
            "Assumption 5 (Realizability) violated: a least-squares coefficient exceeds w_sup");

    const EnvironmentMoments m1 = analytic_moments(cfg, 0);
    const EnvironmentMoments m2 = analytic_moments(cfg, 1);

    DominanceReport rep;
    rep.ensemble = nash_ensemble(w1.w_star, w2.w_star, game.tolerance);
    const double d_ne = norm2(sub(rep.ensemble, ideal));
    for (double pi1 : pi_grid) {
        const Vector w_erm = erm_solution(m1, m2, pi1);
        DominancePoint pt;
        pt.pi1 = pi1;
        pt.d_ne = d_ne;
        pt.d_erm = norm2(sub(w_erm, ideal));
        pt.d_ne_sq = d_ne * d_ne;
        pt.d_erm_sq = pt.d_erm * pt.d_erm;
        pt.exception = (pt.d_erm_sq - pt.d_ne_sq) <= 1e-9;  // measure-zero equality
        if (pt.exception && pt.d_ne_sq > pt.d_erm_sq + 1e-9) rep.dominates_everywhere = false;
        rep.points.push_back(pt);
    }
    return rep;
}

}  // namespace clrg
