// Reference samplers compared against the bridge: OUVE score-matching
// diffusion with a Langevin corrector, Euler flow sampling with rectified /
// OT-paired velocity targets, and exact minibatch optimal-transport pairing.

#ifndef SBRIDGE_BASELINES_HPP
#define SBRIDGE_BASELINES_HPP

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "sbridge/rng.hpp"
#include "sbridge/state.hpp"

namespace sbridge {

// Ornstein-Uhlenbeck variance-exploding forward SDE
//   dx = gamma (y - x) dt + g(t) dw,
//   g^2(t) = 2 ln(smax/smin) smin^2 (smax/smin)^{2t},
// whose perturbation kernel mean/variance are closed-form.
struct OuveParams {
    double gamma = 1.5;
    double sigma_min = 0.05;
    double sigma_max = 0.5;
    std::size_t n_corrector = 1;
    double corrector_snr = 0.5;
    double t_min = 1e-4;

    void validate() const;

    double g2(double t) const;
    double kernel_variance(double t) const;
    // weight on x0; the y weight is its complement
    double kernel_mean_weight(double t) const { return std::exp(-gamma * t); }
};

// Gaussian transition score grad log p_{t|0}(x_t | x0, y) =
// -(x_t - mean_t) / var_t with mean_t = e^{-gamma t} x0 + (1 - e^{-gamma t}) y.
// Throws when var_t is zero (t below the floor).
StateVector sgm_score_target(const StateVector& xt, const StateVector& x0,
                             const StateVector& y, double t, const OuveParams& ouve);

// Score callable conditioned on whatever the caller closed over: (x, t) -> score.
using ScoreFn = std::function<StateVector(const StateVector& x, double t)>;

// Reverse-SDE Euler-Maruyama predictor from t = 1 down to t_min on the grid
// t_n = t_min + n (1 - t_min)/N, with n_corrector annealed-Langevin steps after
// each predictor step (step size 2 (snr ||z|| / ||s||)^2). The initial state is
// drawn from the prior N(y, var_1 I).
StateVector sgm_sample(const OuveParams& ouve, const ScoreFn& score, const StateVector& y,
                       std::size_t n_steps, RngStream& rng);

// Rectified-flow regression target (x_t - x0) / t; equals x1 - x0 on the
// linear interpolant. Throws at t = 0.
StateVector rfm_velocity_target(const StateVector& xt, const StateVector& x0, double t);

// Velocity toward the data end, evaluated at descending t.
using VelocityFn = std::function<StateVector(double t, const StateVector& x)>;

// Integrates from x1 at t = 1 down to t = 0 with uniform Euler steps
//   x <- x + (1/N) v(t_n, x),   t_n = n/N, n = N..1,
// where v points toward the t = 0 end (one exact step recovers x0 from a
// constant field x0 - x1). Deterministic.
StateVector flow_euler_sample(const VelocityFn& velocity, const StateVector& x1,
                              std::size_t n_steps);

// Exact assignment minimizing sum ||x0_i - x1_{perm[i]}||^2 over permutations
// (Hungarian algorithm); batch size limited to 64.
std::vector<std::size_t> ot_pair_minibatch(const std::vector<StateVector>& x0_batch,
                                           const std::vector<StateVector>& x1_batch);

}  // namespace sbridge

#endif  // SBRIDGE_BASELINES_HPP
