#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "clrg/errors.hpp"
#include "clrg/numerics.hpp"
#include "clrg/rng.hpp"

namespace clrg {

// Parameters of one environment of the linear SEM:
//   Y  <- gamma^T X1 + eta^T H + eps
//   X2 <- alpha Y + Theta H + zeta
struct EnvParams {
    Vector alpha;        // q, anti-causal weights
    Matrix theta;        // q x s, confounder loading on X2
    Vector eta;          // s, confounder loading on Y
    double sigma_eps = 1.0;
    Vector sigma_zeta;   // q, per-component std-dev of zeta
    double sigma_h = 1.0;
    Vector sigma_x1;     // p, per-component std-dev of X1
};

struct SemConfig {
    std::size_t p = 1;  // causal features
    std::size_t q = 0;  // spurious features
    std::size_t s = 0;  // confounder dimension
    Vector gamma;       // p, shared causal weights
    std::vector<EnvParams> envs;
    // Set by confounder_only_config: whether the variant halves of the
    // per-environment least-squares solutions actually differ.
    std::optional<bool> spurious_coeffs_vary;

    std::size_t dim() const { return p + q; }
    std::size_t n_envs() const { return envs.size(); }

    void validate() const {
        if (p < 1) throw Error("SemConfig: p must be >= 1");
        if (gamma.size() != p) throw DimensionMismatch("SemConfig: gamma dim != p");
        if (envs.size() < 2) throw Error("SemConfig: at least 2 environments required");
        for (const auto& e : envs) {
            if (e.alpha.size() != q || e.sigma_zeta.size() != q)
                throw DimensionMismatch("SemConfig: alpha/sigma_zeta dim != q");
            if (e.theta.rows() != q || e.theta.cols() != s)
                throw DimensionMismatch("SemConfig: theta is not q x s");
            if (e.eta.size() != s) throw DimensionMismatch("SemConfig: eta dim != s");
            if (e.sigma_x1.size() != p) throw DimensionMismatch("SemConfig: sigma_x1 dim != p");
            if (e.sigma_eps <= 0.0) throw Error("SemConfig: sigma_eps must be > 0");
            if (e.sigma_h < 0.0) throw Error("SemConfig: sigma_h must be >= 0");
            for (double v : e.sigma_zeta)
                if (v <= 0.0) throw Error("SemConfig: sigma_zeta components must be > 0");
            for (double v : e.sigma_x1)
                if (v <= 0.0) throw Error("SemConfig: sigma_x1 components must be > 0");
        }
    }
};

// One environment's dataset: features ordered (X1 then X2), one row per draw.
struct EnvSample {
    std::size_t env_index = 0;
    Matrix x;  // n x (p+q)
    Vector y;  // n

    std::size_t size() const { return y.size(); }
};

// Draws n points from the SEM for the given environment. Deterministic given
// (cfg, env, n, seed); the stream is derived from (seed, env) so environments
// are independent.
inline EnvSample sample_environment(const SemConfig& cfg, std::size_t env, std::size_t n,
                                    std::uint64_t seed) {
    cfg.validate();
    if (env >= cfg.envs.size())
        throw InvalidEnvIndex("sample_environment: env index " + std::to_string(env) +
                              " out of range (have " + std::to_string(cfg.envs.size()) +
                              " environments)");
    if (n < 1) throw EmptySample("sample_environment: n must be >= 1");
    const EnvParams& ep = cfg.envs[env];
    Rng rng(derive_seed(seed, env));

    EnvSample out;
    out.env_index = env;
    out.x = Matrix(n, cfg.dim());
    out.y = Vector(n);
    Vector h(cfg.s);
    for (std::size_t i = 0; i < n; ++i) {
        double y = 0.0;
        for (std::size_t j = 0; j < cfg.p; ++j) {
            const double x1 = rng.normal(0.0, ep.sigma_x1[j]);
            out.x(i, j) = x1;
            y += cfg.gamma[j] * x1;
        }
        for (std::size_t k = 0; k < cfg.s; ++k) {
            h[k] = rng.normal(0.0, ep.sigma_h);
            y += ep.eta[k] * h[k];
        }
        y += rng.normal(0.0, ep.sigma_eps);
        out.y[i] = y;
        for (std::size_t j = 0; j < cfg.q; ++j) {
            double x2 = ep.alpha[j] * y + rng.normal(0.0, ep.sigma_zeta[j]);
            for (std::size_t k = 0; k < cfg.s; ++k) x2 += ep.theta(j, k) * h[k];
            out.x(i, cfg.p + j) = x2;
        }
    }
    return out;
}

enum class Setting { F_HOM, P_HOM, F_HET, P_HET };

inline std::string to_string(Setting s) {
    switch (s) {
        case Setting::F_HOM: return "F-HOM";
        case Setting::P_HOM: return "P-HOM";
        case Setting::F_HET: return "F-HET";
        case Setting::P_HET: return "P-HET";
    }
    return "?";
}

inline Setting setting_from_string(const std::string& s) {
    if (s == "F-HOM") return Setting::F_HOM;
    if (s == "P-HOM") return Setting::P_HOM;
    if (s == "F-HET") return Setting::F_HET;
    if (s == "P-HET") return Setting::P_HET;
    throw Error("unknown setting '" + s + "' (expected F-HOM, P-HOM, F-HET, P-HET)");
}

// The two-environment experimental presets. gamma = 1_p; anti-causal weights
// are redrawn i.i.d. N(0,1) per environment; confounder loadings are zero
// under F and i.i.d. N(0,1) under P (with s = q). Noise scales:
//   HOM: sigma_eps = (0.2, 2.0), sigma_zeta = 1 both;
//   HET: sigma_zeta = (0.2, 2.0), sigma_eps = 1 both;
//   sigma_H = (0.2, 2.0) always; X1 is standard normal.
inline SemConfig preset(Setting setting, std::size_t p, std::size_t q, std::uint64_t seed) {
    if (p < 1 || q < 1) throw Error("preset: p and q must be >= 1");
    const bool partial = (setting == Setting::P_HOM || setting == Setting::P_HET);
    const bool het = (setting == Setting::F_HET || setting == Setting::P_HET);

    SemConfig cfg;
    cfg.p = p;
    cfg.q = q;
    cfg.s = q;
    cfg.gamma = Vector(p, 1.0);
    const double sigma_h_by_env[2] = {0.2, 2.0};
    const double sigma_eps_by_env[2] = {het ? 1.0 : 0.2, het ? 1.0 : 2.0};
    const double sigma_zeta_by_env[2] = {het ? 0.2 : 1.0, het ? 2.0 : 1.0};

    for (std::size_t e = 0; e < 2; ++e) {
        Rng rng(derive_seed(seed, e, 0xC0F));
        EnvParams ep;
        ep.alpha.resize(q);
        for (auto& a : ep.alpha) a = rng.normal();
        ep.theta = Matrix(q, q);
        ep.eta = Vector(q, 0.0);
        if (partial) {
            for (std::size_t i = 0; i < q; ++i)
                for (std::size_t j = 0; j < q; ++j) ep.theta(i, j) = rng.normal();
            for (auto& v : ep.eta) v = rng.normal();
        }
        ep.sigma_eps = sigma_eps_by_env[e];
        ep.sigma_zeta = Vector(q, sigma_zeta_by_env[e]);
        ep.sigma_h = sigma_h_by_env[e];
        ep.sigma_x1 = Vector(p, 1.0);
        cfg.envs.push_back(std::move(ep));
    }
    cfg.validate();
    return cfg;
}

namespace detail {
// Variant half of the least-squares solution for a confounder-only
// environment: (sigma_h^2 Theta Theta^T + diag sigma_zeta^2)^{-1} sigma_h^2 Theta eta.
inline Vector variant_coefficients(const EnvParams& ep) {
    const std::size_t q = ep.sigma_zeta.size();
    if (q == 0) return {};
    const double h2 = ep.sigma_h * ep.sigma_h;
    Matrix block = ep.theta.mul(ep.theta.transpose()).scaled(h2);
    for (std::size_t i = 0; i < q; ++i) block(i, i) += ep.sigma_zeta[i] * ep.sigma_zeta[i];
    return solve_spd(block, scaled(ep.theta.mul(ep.eta), h2));
}
}  // namespace detail

// Two-environment confounder-only config (alpha = 0) with orthogonal Theta
// (q = s), unit-variance confounder, standard-normal X1, unit sigma_eps.
// Records whether the variant coefficients actually differ across the two
// environments (the varying-coefficients assumption behind the U/V split).
inline SemConfig confounder_only_config(std::size_t p, std::size_t q, const Matrix& theta,
                                        const Vector& eta1, const Vector& eta2,
                                        const Vector& sigma_zeta1, const Vector& sigma_zeta2,
                                        std::uint64_t /*seed*/ = 0) {
    if (theta.rows() != q || theta.cols() != q)
        throw DimensionMismatch("confounder_only_config: theta must be q x q (q == s)");
    const Matrix gram = theta.mul(theta.transpose());
    const Matrix dev = gram - Matrix::identity(q);
    if (dev.max_abs() > 1e-8)
        throw NotOrthogonal("confounder_only_config: Theta Theta^T deviates from identity by " +
                            std::to_string(dev.max_abs()));

    SemConfig cfg;
    cfg.p = p;
    cfg.q = q;
    cfg.s = q;
    cfg.gamma = Vector(p, 1.0);
    for (int e = 0; e < 2; ++e) {
        EnvParams ep;
        ep.alpha = Vector(q, 0.0);
        ep.theta = theta;
        ep.eta = (e == 0) ? eta1 : eta2;
        ep.sigma_eps = 1.0;
        ep.sigma_zeta = (e == 0) ? sigma_zeta1 : sigma_zeta2;
        ep.sigma_h = 1.0;
        ep.sigma_x1 = Vector(p, 1.0);
        cfg.envs.push_back(std::move(ep));
    }
    cfg.validate();
    const Vector v1 = detail::variant_coefficients(cfg.envs[0]);
    const Vector v2 = detail::variant_coefficients(cfg.envs[1]);
    cfg.spurious_coeffs_vary = norm_inf(sub(v1, v2)) > 1e-12;
    return cfg;
}

}  // namespace clrg
