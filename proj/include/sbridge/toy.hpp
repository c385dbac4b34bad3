// Desk-scale linear-Gaussian world: paired-data generator, closed-form
// conditional oracles for every sampler family, a bucketed affine denoiser
// with exact-gradient training, and the step-count convergence experiment.
//
// The corruption model per dimension is
//   x0 ~ N(mu0, s0^2),   x1 = a x0 + b + sn eps,
// so every conditional the samplers need (posterior of x0 given x1, denoiser
// E[x0 | x_t, x1], score of the OUVE marginal, flow velocity) has a closed
// form that can be cross-checked against dense-covariance conditioning.

#ifndef SBRIDGE_TOY_HPP
#define SBRIDGE_TOY_HPP

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "sbridge/baselines.hpp"
#include "sbridge/bridge.hpp"
#include "sbridge/schedule.hpp"
#include "sbridge/state.hpp"

namespace sbridge {

struct ToyModel {
    double mu0 = 1.0;
    double s0 = 1.0;   // std of x0
    double a = 0.8;    // mixing gain
    double b = 0.2;    // offset
    double sn = 0.5;   // corruption noise std

    void validate() const;

    // Posterior of x0 given x1 = v (per dimension): N(posterior_mean(v), posterior_variance()).
    double posterior_mean(double x1_value) const;
    double posterior_variance() const;

    // Draw an iid pair of dim-dimensional endpoints.
    std::pair<StateVector, StateVector> sample_pair(std::size_t dim, RngStream& rng) const;
};

// E[x0 | x_t, x1] element-wise, by Gaussian conditioning of (x0, x_t) given
// x1 through the bridge marginal at time t. Degenerate conditionals fall back
// to their limits (x_t at t = 0, the x1-posterior mean at t = 1).
StateVector toy_exact_denoiser(const ToyModel& toy, const ScheduleParams& schedule,
                               const StateVector& xt, const StateVector& x1, double t);

Denoiser make_toy_exact_denoiser(const ToyModel& toy, const ScheduleParams& schedule);

// Stochastic variant drawing x0 ~ p(x0 | x_t, x1) instead of returning the
// conditional mean. Makes the reverse SDE chain distributionally exact on
// this toy; used as a reference in tests (not a Denoiser in the deterministic
// sense — it advances the supplied stream).
Denoiser make_toy_posterior_sampling_denoiser(const ToyModel& toy,
                                              const ScheduleParams& schedule,
                                              std::shared_ptr<RngStream> rng);

// Score of the OUVE marginal p_t(x | x1) when the data law is the toy
// posterior p(x0 | x1).
ScoreFn make_toy_exact_score(const ToyModel& toy, const OuveParams& ouve,
                             const StateVector& x1);

// Toward-data velocity of the linear-interpolant flow conditioned on x1.
VelocityFn make_toy_exact_flow_velocity(const ToyModel& toy, const StateVector& x1);

// --- bucketed affine denoiser -------------------------------------------

// Per-time-bucket affine map x0_hat = w_xt x_t + w_x1 x_1 + bias, with
// n_buckets uniform buckets on [t_min, 1]. Initialized to the identity on
// x_t (exact at t = 0).
class LinearDenoiser {
public:
    LinearDenoiser(std::size_t n_buckets, double t_min);

    std::size_t n_buckets() const { return weights_.size(); }
    double t_min() const { return t_min_; }
    std::size_t bucket_of(double t) const;

    std::array<double, 3>& weights(std::size_t bucket) { return weights_[bucket]; }
    const std::array<double, 3>& weights(std::size_t bucket) const {
        return weights_[bucket];
    }

    StateVector predict(const StateVector& xt, const StateVector& x1, double t) const;
    Denoiser as_denoiser() const;

private:
    std::vector<std::array<double, 3>> weights_;
    double t_min_;
};

struct TrainSample {
    StateVector x0;
    StateVector x1;
    StateVector xt;
    double t = 0.0;
};

// One draw of (t, x_t) per batch item through the bridge marginal.
std::vector<TrainSample> perturb_batch(
    const ScheduleParams& schedule, const std::vector<std::pair<StateVector, StateVector>>& batch,
    double t_min, RngStream& rng);

double batch_mse(const LinearDenoiser& denoiser, const std::vector<TrainSample>& samples);

// Exact gradient of batch_mse with respect to each bucket's (w_xt, w_x1, bias).
std::vector<std::array<double, 3>> batch_gradient(const LinearDenoiser& denoiser,
                                                  const std::vector<TrainSample>& samples);

struct TrainStepRecord {
    double mse = 0.0;      // before the update
    double hinge_g = 0.0;  // monitoring only, energy scorers on predictions
    double hinge_d = 0.0;
};

// Algorithm steps: sample t, perturb, predict, descend on the exact MSE
// gradient; adversarial components are evaluated for monitoring only.
TrainStepRecord training_step(const ScheduleParams& schedule, LinearDenoiser& denoiser,
                              const std::vector<std::pair<StateVector, StateVector>>& batch,
                              RngStream& rng, double lr);

// Expected MSE of the exact denoiser (the floor no estimator can beat),
// averaged over t ~ U(t_lo, t_hi) by quadrature.
double bayes_mse_floor(const ToyModel& toy, const ScheduleParams& schedule, double t_lo,
                       double t_hi, std::size_t n_points = 2048);

// Max absolute difference between the closed-form denoiser and dense
// joint-covariance Gaussian conditioning over n_draws random
// (t, x0, x1, x_t) draws with t in [0.01, 0.99], plus the t = 0 and t = 1
// limits.
double oracle_check_max_residual(const ToyModel& toy, const ScheduleParams& schedule,
                                 std::size_t n_draws, std::uint64_t seed);

// --- convergence experiment ----------------------------------------------

enum class ToyFamily { SbSde, SbOde, Sgm, Rfm };

std::string to_string(ToyFamily family);
ToyFamily toy_family_from_string(const std::string& name);

struct ConvergenceConfig {
    ToyModel toy;
    ScheduleParams schedule;
    OuveParams ouve;
    std::vector<ToyFamily> families = {ToyFamily::SbSde, ToyFamily::SbOde, ToyFamily::Sgm,
                                       ToyFamily::Rfm};
    std::vector<std::size_t> steps_list = {1, 2, 4, 8, 16, 32};
    std::size_t n_trajectories = 10000;
    std::size_t dim = 16;
    double x1_value = 2.0;
    double t_min = 1e-4;
    std::uint64_t seed = 0;
};

struct ConvergenceRow {
    ToyFamily family = ToyFamily::SbSde;
    std::size_t n_steps = 0;
    double mean_err = 0.0;  // |sample mean - posterior mean|
    double var_err = 0.0;   // |sample variance - posterior variance|
    double w2 = 0.0;        // sqrt(mean_err^2 + (sd - posterior sd)^2)
    double se_mean = 0.0;   // Monte Carlo resolution of the mean estimate
    double wall_ms = 0.0;
};

// Terminal-moment errors against the analytic x1-posterior for each
// (family, N). Stream i drives trajectory i, so runs are reproducible and
// common random numbers are shared across step counts.
std::vector<ConvergenceRow> convergence_experiment(const ConvergenceConfig& config);

}  // namespace sbridge

#endif  // SBRIDGE_TOY_HPP
