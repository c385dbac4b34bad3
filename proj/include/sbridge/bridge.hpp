// Schrödinger-bridge core between paired endpoints (x0, x1): boundary
// potentials, the closed-form marginal of x_t given both endpoints, forward
// perturbation, and the reverse samplers (stochastic and deterministic).

#ifndef SBRIDGE_BRIDGE_HPP
#define SBRIDGE_BRIDGE_HPP

#include <cstdint>
#include <functional>

#include "sbridge/rng.hpp"
#include "sbridge/schedule.hpp"
#include "sbridge/state.hpp"

namespace sbridge {

// Denoiser contract: (x_t, x_1, t) -> estimate of x_0. Deterministic
// implementations give bit-reproducible sampling.
using Denoiser =
    std::function<StateVector(const StateVector& xt, const StateVector& x1, double t)>;

// Coefficients of the bridge marginal
//   x_t | x0, x1  ~  N(w0 x0 + w1 x1, variance I)
// with w0 = alpha_t sigma_bar_t^2 / sigma_1^2, w1 = alpha_bar_t sigma_t^2 / sigma_1^2,
// variance = alpha_t^2 sigma_bar_t^2 sigma_t^2 / sigma_1^2.
struct MarginalParams {
    double mean_weight_x0 = 1.0;
    double mean_weight_x1 = 0.0;
    double variance = 0.0;
};

// Isotropic Gaussian described by a per-dimension mean state and one shared
// variance.
struct GaussianPotential {
    StateVector mean;
    double variance = 0.0;
};

enum class SamplerFamily { SbSde, SbOde };

struct SamplerConfig {
    ScheduleParams schedule;
    std::size_t n_steps = 4;
    double t_min = 1e-4;
    std::uint64_t seed = 0;
    SamplerFamily family = SamplerFamily::SbSde;

    void validate() const;
};

// Boundary potentials at time t:
//   psi_hat = N(alpha_t x0, alpha_t^2 sigma_t^2 I)
//   psi     = N(alpha_bar_t x1, alpha_t^2 sigma_bar_t^2 I)
std::pair<GaussianPotential, GaussianPotential> boundary_potentials(
    const ScheduleParams& schedule, double t, const StateVector& x0,
    const StateVector& x1);

MarginalParams marginal(const ScheduleParams& schedule, double t);

// Draw x_t from the bridge marginal given both endpoints. Complex grids get
// circularly-symmetric noise (variance/2 per real and imaginary part).
StateVector perturb(const ScheduleParams& schedule, double t, const StateVector& x0,
                    const StateVector& x1, RngStream& rng);

// Reverse-time stochastic sampler on the grid t_n = t_min + n (1 - t_min)/N,
// n = N..1, starting from x1 at t_N = 1. Each step contracts toward the
// denoiser estimate and re-injects bridge noise except at the last step.
// Throws std::runtime_error if the state goes non-finite.
StateVector sample_sde(const SamplerConfig& config, const Denoiser& denoiser,
                       const StateVector& x1, RngStream& rng);

// Deterministic re-anchoring sampler: carries the standardized residual
// z = (x_t - mu_t) / std_t between marginals (z = 0 wherever std_t = 0, in
// particular at the first step from t = 1). Exact on Gaussians with an exact
// denoiser; no randomness.
StateVector sample_ode(const SamplerConfig& config, const Denoiser& denoiser,
                       const StateVector& x1);

}  // namespace sbridge

#endif  // SBRIDGE_BRIDGE_HPP
