#include "sbridge/bridge.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace sbridge {

void SamplerConfig::validate() const {
    schedule.validate();
    if (n_steps < 1) throw std::invalid_argument("sampler: n_steps must be >= 1");
    if (!(t_min > 0.0 && t_min < 1.0))
        throw std::invalid_argument("sampler: t_min must lie in (0, 1)");
}

std::pair<GaussianPotential, GaussianPotential> boundary_potentials(
    const ScheduleParams& schedule, double t, const StateVector& x0,
    const StateVector& x1) {
    if (!x0.same_shape(x1))
        throw std::invalid_argument("boundary_potentials: endpoint shape mismatch");
    const ScheduleValues v = evaluate(schedule, t);

    GaussianPotential psi_hat;
    psi_hat.mean = x0;
    for (std::size_t i = 0; i < psi_hat.mean.size(); ++i) psi_hat.mean[i] *= v.alpha;
    psi_hat.variance = v.alpha * v.alpha * v.sigma2;

    GaussianPotential psi;
    psi.mean = x1;
    for (std::size_t i = 0; i < psi.mean.size(); ++i) psi.mean[i] *= v.alpha_bar;
    psi.variance = v.alpha * v.alpha * v.sigma_bar2;

    return {std::move(psi_hat), std::move(psi)};
}

MarginalParams marginal(const ScheduleParams& schedule, double t) {
    const ScheduleValues v = evaluate(schedule, t);
    MarginalParams m;
    m.mean_weight_x0 = v.alpha * v.sigma_bar2 / v.sigma1_2;
    m.mean_weight_x1 = v.alpha_bar * v.sigma2 / v.sigma1_2;
    m.variance = v.alpha * v.alpha * v.sigma_bar2 * v.sigma2 / v.sigma1_2;
    if (m.variance < 0.0) m.variance = 0.0;  // guard tiny negative round-off
    return m;
}

namespace {

void add_noise(StateVector& x, double variance, RngStream& rng) {
    if (variance <= 0.0) return;
    const double std = std::sqrt(variance);
    if (x.is_complex()) {
        for (std::size_t i = 0; i < x.size(); ++i)
            x[i] += std * rng.gaussian_complex();
    } else {
        for (std::size_t i = 0; i < x.size(); ++i) x[i] += std * rng.gaussian();
    }
}

void ensure_finite(const StateVector& x, const char* where) {
    if (!x.all_finite())
        throw std::runtime_error(std::string(where) + ": state went non-finite");
}

}  // namespace

StateVector perturb(const ScheduleParams& schedule, double t, const StateVector& x0,
                    const StateVector& x1, RngStream& rng) {
    if (!x0.same_shape(x1))
        throw std::invalid_argument("perturb: endpoint shape mismatch");
    const MarginalParams m = marginal(schedule, t);
    StateVector x = x0;
    for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = m.mean_weight_x0 * x0[i] + m.mean_weight_x1 * x1[i];
    add_noise(x, m.variance, rng);
    return x;
}

StateVector sample_sde(const SamplerConfig& config, const Denoiser& denoiser,
                       const StateVector& x1, RngStream& rng) {
    config.validate();
    if (!denoiser) throw std::invalid_argument("sample_sde: null denoiser");
    const std::size_t n_steps = config.n_steps;
    const double dtau = (1.0 - config.t_min) / static_cast<double>(n_steps);

    StateVector x = x1;
    for (std::size_t n = n_steps; n >= 1; --n) {
        const double t = config.t_min + static_cast<double>(n) * dtau;
        const double t_prev = config.t_min + static_cast<double>(n - 1) * dtau;
        const ScheduleValues st = evaluate(config.schedule, t);
        const ScheduleValues sp = evaluate(config.schedule, t_prev);

        const StateVector x0_hat = denoiser(x, x1, t);
        if (!x0_hat.same_shape(x))
            throw std::invalid_argument("sample_sde: denoiser changed state shape");

        const double ratio = sp.sigma2 / st.sigma2;
        const double coef_x = (sp.alpha / st.alpha) * ratio;
        const double coef_x0 = sp.alpha * (1.0 - ratio);
        for (std::size_t i = 0; i < x.size(); ++i)
            x[i] = coef_x * x[i] + coef_x0 * x0_hat[i];
        if (n != 1) {
            const double noise_var =
                sp.alpha * sp.alpha * sp.sigma2 * (1.0 - ratio);
            add_noise(x, noise_var, rng);
        }
        ensure_finite(x, "sample_sde");
    }
    return x;
}

StateVector sample_ode(const SamplerConfig& config, const Denoiser& denoiser,
                       const StateVector& x1) {
    config.validate();
    if (!denoiser) throw std::invalid_argument("sample_ode: null denoiser");
    const std::size_t n_steps = config.n_steps;
    const double dtau = (1.0 - config.t_min) / static_cast<double>(n_steps);

    StateVector x = x1;
    for (std::size_t n = n_steps; n >= 1; --n) {
        const double t = config.t_min + static_cast<double>(n) * dtau;
        const double t_prev = config.t_min + static_cast<double>(n - 1) * dtau;
        const MarginalParams mt = marginal(config.schedule, t);
        const MarginalParams mp = marginal(config.schedule, t_prev);

        const StateVector x0_hat = denoiser(x, x1, t);
        if (!x0_hat.same_shape(x))
            throw std::invalid_argument("sample_ode: denoiser changed state shape");

        const double std_t = std::sqrt(mt.variance);
        const double std_p = std::sqrt(mp.variance);
        for (std::size_t i = 0; i < x.size(); ++i) {
            const auto mu_t = mt.mean_weight_x0 * x0_hat[i] + mt.mean_weight_x1 * x1[i];
            const auto mu_p = mp.mean_weight_x0 * x0_hat[i] + mp.mean_weight_x1 * x1[i];
            const auto z = std_t > 0.0 ? (x[i] - mu_t) / std_t
                                       : std::complex<double>(0.0, 0.0);
            x[i] = mu_p + std_p * z;
        }
        ensure_finite(x, "sample_ode");
    }
    return x;
}

}  // namespace sbridge
