#pragma once

#include <optional>
#include <string>
#include <vector>

#include "clrg/errors.hpp"
#include "clrg/numerics.hpp"
#include "clrg/sem.hpp"

namespace clrg {

// Population or empirical (mu, Sigma, rho) for one environment. sample_size
// is empty for analytic moments.
struct EnvironmentMoments {
    Matrix sigma;
    Vector rho;
    Vector mu;
    std::optional<std::size_t> sample_size;

    std::size_t dim() const { return rho.size(); }
};

inline EnvironmentMoments moments_from_sample(const EnvSample& s) {
    auto [sigma, rho, mu] = empirical_moments(s.x, s.y);
    return {std::move(sigma), std::move(rho), std::move(mu), s.size()};
}

// Per-environment least-squares solution w* = Sigma^{-1} rho, with the
// invariant/variant split point when SEM-derived (first p components).
struct LeastSquaresSolution {
    Vector w_star;
    std::size_t split = 0;  // 0 when no causal/spurious structure is known

    Vector invariant_part() const { return Vector(w_star.begin(), w_star.begin() + split); }
    Vector variant_part() const { return Vector(w_star.begin() + split, w_star.end()); }
};

inline LeastSquaresSolution least_squares(const EnvironmentMoments& m, std::size_t split = 0) {
    return {solve_spd(m.sigma, m.rho), split};
}

// Population moments for a confounder-only environment (alpha = 0):
// block-diagonal Sigma with X1 block diag(sigma_x1^2) and X2 block
// sigma_h^2 Theta Theta^T + diag(sigma_zeta^2); rho = (Sigma_1 gamma,
// sigma_h^2 Theta eta); mu = 0.
inline EnvironmentMoments analytic_moments(const SemConfig& cfg, std::size_t env) {
    cfg.validate();
    if (env >= cfg.envs.size())
        throw InvalidEnvIndex("analytic_moments: env index out of range");
    const EnvParams& ep = cfg.envs[env];
    if (norm_inf(ep.alpha) > 0.0)
        throw AntiCausalPresent("analytic_moments: requires alpha = 0, got |alpha|_inf = " +
                                std::to_string(norm_inf(ep.alpha)));
    const std::size_t p = cfg.p, q = cfg.q, d = cfg.dim();
    const double h2 = ep.sigma_h * ep.sigma_h;

    EnvironmentMoments m;
    m.sigma = Matrix(d, d);
    m.rho = Vector(d, 0.0);
    m.mu = Vector(d, 0.0);
    for (std::size_t j = 0; j < p; ++j) {
        const double var = ep.sigma_x1[j] * ep.sigma_x1[j];
        m.sigma(j, j) = var;
        m.rho[j] = var * cfg.gamma[j];
    }
    const Matrix gram = ep.theta.mul(ep.theta.transpose());
    for (std::size_t i = 0; i < q; ++i) {
        for (std::size_t j = 0; j < q; ++j) m.sigma(p + i, p + j) = h2 * gram(i, j);
        m.sigma(p + i, p + i) += ep.sigma_zeta[i] * ep.sigma_zeta[i];
    }
    const Vector theta_eta = ep.theta.mul(ep.eta);
    for (std::size_t i = 0; i < q; ++i) m.rho[p + i] = h2 * theta_eta[i];
    return m;
}

// Closed-form least squares for a confounder-only environment:
// (gamma, (Theta Theta^T + diag sigma_zeta^2)^{-1} Theta eta) for a
// unit-variance confounder, with the sigma_h^2 scaling in the general case.
inline LeastSquaresSolution confounder_closed_form(const SemConfig& cfg, std::size_t env) {
    cfg.validate();
    if (env >= cfg.envs.size())
        throw InvalidEnvIndex("confounder_closed_form: env index out of range");
    const EnvParams& ep = cfg.envs[env];
    if (norm_inf(ep.alpha) > 0.0)
        throw AntiCausalPresent(
            "confounder_closed_form: requires alpha = 0, got |alpha|_inf = " +
            std::to_string(norm_inf(ep.alpha)));
    LeastSquaresSolution sol;
    sol.split = cfg.p;
    sol.w_star = cfg.gamma;
    const Vector w_var = detail::variant_coefficients(ep);
    sol.w_star.insert(sol.w_star.end(), w_var.begin(), w_var.end());
    return sol;
}

// ERM solution for environment mixture pi1: the minimizer of the pooled risk,
// (pi1 Sigma1 + (1-pi1) Sigma2)^{-1} (pi1 rho1 + (1-pi1) rho2).
inline Vector erm_solution(const EnvironmentMoments& m1, const EnvironmentMoments& m2,
                           double pi1) {
    if (m1.dim() != m2.dim()) throw DimensionMismatch("erm_solution: moment dims differ");
    if (pi1 < 0.0 || pi1 > 1.0) throw Error("erm_solution: pi1 must be in [0,1]");
    const double pi2 = 1.0 - pi1;
    Matrix sigma = m1.sigma.scaled(pi1) + m2.sigma.scaled(pi2);
    Vector rho = add(scaled(m1.rho, pi1), scaled(m2.rho, pi2));
    return solve_spd(sigma, rho);
}

// Least squares on the concatenated sample; mixture weights are implied by
// the per-environment sample sizes.
inline Vector pooled_empirical_erm(const std::vector<EnvSample>& samples) {
    if (samples.empty()) throw EmptySample("pooled_empirical_erm: no samples");
    const std::size_t d = samples.front().x.cols();
    std::size_t total = 0;
    for (const auto& s : samples) {
        if (s.x.cols() != d) throw DimensionMismatch("pooled_empirical_erm: feature dims differ");
        total += s.size();
    }
    if (total < d)
        throw NotPositiveDefinite("pooled_empirical_erm: fewer samples (" +
                                  std::to_string(total) + ") than features (" +
                                  std::to_string(d) + ")");
    Matrix sigma(d, d);
    Vector rho(d, 0.0);
    for (const auto& s : samples) {
        auto [sg, rh, mu] = empirical_moments(s.x, s.y);
        const double w = static_cast<double>(s.size()) / static_cast<double>(total);
        sigma = sigma + sg.scaled(w);
        rho = add(rho, scaled(rh, w));
    }
    return solve_spd(sigma, rho);
}

}  // namespace clrg
