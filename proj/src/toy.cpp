#include "sbridge/toy.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "sbridge/losses.hpp"

namespace sbridge {

void ToyModel::validate() const {
    if (!(s0 > 0.0)) throw std::invalid_argument("toy: s0 must be > 0");
    if (!(sn >= 0.0)) throw std::invalid_argument("toy: sn must be >= 0");
}

double ToyModel::posterior_mean(double x1_value) const {
    const double vx1 = a * a * s0 * s0 + sn * sn;
    const double gain = vx1 > 0.0 ? a * s0 * s0 / vx1 : 0.0;
    return mu0 + gain * (x1_value - a * mu0 - b);
}

double ToyModel::posterior_variance() const {
    const double vx1 = a * a * s0 * s0 + sn * sn;
    if (!(vx1 > 0.0)) return s0 * s0;
    return s0 * s0 - (a * s0 * s0) * (a * s0 * s0) / vx1;
}

std::pair<StateVector, StateVector> ToyModel::sample_pair(std::size_t dim,
                                                          RngStream& rng) const {
    validate();
    std::vector<double> v0(dim), v1(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        v0[i] = mu0 + s0 * rng.gaussian();
        v1[i] = a * v0[i] + b + sn * rng.gaussian();
    }
    return {StateVector::real(std::move(v0)), StateVector::real(std::move(v1))};
}

namespace {

struct DenoiserCoeffs {
    // x0_hat = base + gain * (x_t - w0 m_p - w1 x1) with m_p = pm_icpt + pm_slope x1
    double pm_icpt, pm_slope, gain, w0, w1;
};

DenoiserCoeffs denoiser_coeffs(const ToyModel& toy, const ScheduleParams& schedule,
                               double t) {
    const MarginalParams m = marginal(schedule, t);
    const double v_p = toy.posterior_variance();
    const double vx1 = toy.a * toy.a * toy.s0 * toy.s0 + toy.sn * toy.sn;
    const double pgain = vx1 > 0.0 ? toy.a * toy.s0 * toy.s0 / vx1 : 0.0;

    DenoiserCoeffs c;
    c.pm_icpt = toy.mu0 - pgain * (toy.a * toy.mu0 + toy.b);
    c.pm_slope = pgain;
    c.w0 = m.mean_weight_x0;
    c.w1 = m.mean_weight_x1;
    const double denom = c.w0 * c.w0 * v_p + m.variance;
    c.gain = denom > 0.0 ? c.w0 * v_p / denom : 0.0;
    return c;
}

double conditional_variance(const ToyModel& toy, const ScheduleParams& schedule,
                            double t) {
    const MarginalParams m = marginal(schedule, t);
    const double v_p = toy.posterior_variance();
    const double denom = m.mean_weight_x0 * m.mean_weight_x0 * v_p + m.variance;
    if (denom > 0.0) return v_p * m.variance / denom;
    // degenerate: either x0 is observed (t = 0) or x_t carries nothing (t = 1)
    return m.mean_weight_x0 != 0.0 ? 0.0 : v_p;
}

}  // namespace

StateVector toy_exact_denoiser(const ToyModel& toy, const ScheduleParams& schedule,
                               const StateVector& xt, const StateVector& x1, double t) {
    toy.validate();
    if (!xt.same_shape(x1))
        throw std::invalid_argument("toy_exact_denoiser: shape mismatch");
    const DenoiserCoeffs c = denoiser_coeffs(toy, schedule, t);
    StateVector out = xt;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto m_p = c.pm_icpt + c.pm_slope * x1[i];
        out[i] = m_p + c.gain * (xt[i] - c.w0 * m_p - c.w1 * x1[i]);
    }
    return out;
}

Denoiser make_toy_exact_denoiser(const ToyModel& toy, const ScheduleParams& schedule) {
    return [toy, schedule](const StateVector& xt, const StateVector& x1, double t) {
        return toy_exact_denoiser(toy, schedule, xt, x1, t);
    };
}

Denoiser make_toy_posterior_sampling_denoiser(const ToyModel& toy,
                                              const ScheduleParams& schedule,
                                              std::shared_ptr<RngStream> rng) {
    return [toy, schedule, rng](const StateVector& xt, const StateVector& x1, double t) {
        StateVector mean = toy_exact_denoiser(toy, schedule, xt, x1, t);
        const double std = std::sqrt(conditional_variance(toy, schedule, t));
        if (std > 0.0)
            for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += std * rng->gaussian();
        return mean;
    };
}

ScoreFn make_toy_exact_score(const ToyModel& toy, const OuveParams& ouve,
                             const StateVector& x1) {
    toy.validate();
    ouve.validate();
    const double v_p = toy.posterior_variance();
    return [toy, ouve, x1, v_p](const StateVector& x, double t) {
        if (!x.same_shape(x1))
            throw std::invalid_argument("toy score: shape mismatch");
        const double w = ouve.kernel_mean_weight(t);
        const double var = w * w * v_p + ouve.kernel_variance(t);
        StateVector s = x;
        for (std::size_t i = 0; i < s.size(); ++i) {
            const auto m_p = toy.posterior_mean(x1[i].real());
            const auto mean = w * m_p + (1.0 - w) * x1[i];
            s[i] = -(x[i] - mean) / var;
        }
        return s;
    };
}

VelocityFn make_toy_exact_flow_velocity(const ToyModel& toy, const StateVector& x1) {
    toy.validate();
    return [toy, x1](double t, const StateVector& x) {
        if (!x.same_shape(x1))
            throw std::invalid_argument("toy velocity: shape mismatch");
        StateVector v = x;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (t < 1.0) {
                v[i] = (x[i] - x1[i]) / (1.0 - t);
            } else {
                v[i] = toy.posterior_mean(x1[i].real()) - x1[i];
            }
        }
        return v;
    };
}

// --- LinearDenoiser --------------------------------------------------------

LinearDenoiser::LinearDenoiser(std::size_t n_buckets, double t_min)
    : weights_(n_buckets, {1.0, 0.0, 0.0}), t_min_(t_min) {
    if (n_buckets == 0)
        throw std::invalid_argument("LinearDenoiser: n_buckets must be >= 1");
    if (!(t_min > 0.0 && t_min < 1.0))
        throw std::invalid_argument("LinearDenoiser: t_min must lie in (0, 1)");
}

std::size_t LinearDenoiser::bucket_of(double t) const {
    const double u = (t - t_min_) / (1.0 - t_min_);
    const auto b = static_cast<long>(u * static_cast<double>(weights_.size()));
    return static_cast<std::size_t>(
        std::clamp<long>(b, 0, static_cast<long>(weights_.size()) - 1));
}

StateVector LinearDenoiser::predict(const StateVector& xt, const StateVector& x1,
                                    double t) const {
    if (!xt.same_shape(x1))
        throw std::invalid_argument("LinearDenoiser: shape mismatch");
    const auto& w = weights_[bucket_of(t)];
    StateVector out = xt;
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = w[0] * xt[i] + w[1] * x1[i] + w[2];
    return out;
}

Denoiser LinearDenoiser::as_denoiser() const {
    LinearDenoiser copy = *this;
    return [copy](const StateVector& xt, const StateVector& x1, double t) {
        return copy.predict(xt, x1, t);
    };
}

std::vector<TrainSample> perturb_batch(
    const ScheduleParams& schedule,
    const std::vector<std::pair<StateVector, StateVector>>& batch, double t_min,
    RngStream& rng) {
    std::vector<TrainSample> samples;
    samples.reserve(batch.size());
    for (const auto& [x0, x1] : batch) {
        TrainSample s;
        s.t = rng.uniform(t_min, 1.0);
        s.x0 = x0;
        s.x1 = x1;
        s.xt = perturb(schedule, s.t, x0, x1, rng);
        samples.push_back(std::move(s));
    }
    return samples;
}

double batch_mse(const LinearDenoiser& denoiser, const std::vector<TrainSample>& samples) {
    if (samples.empty()) throw std::invalid_argument("batch_mse: empty batch");
    double acc = 0.0;
    std::size_t count = 0;
    for (const auto& s : samples) {
        const StateVector pred = denoiser.predict(s.xt, s.x1, s.t);
        for (std::size_t i = 0; i < pred.size(); ++i) acc += std::norm(pred[i] - s.x0[i]);
        count += pred.size();
    }
    return acc / static_cast<double>(count);
}

std::vector<std::array<double, 3>> batch_gradient(const LinearDenoiser& denoiser,
                                                  const std::vector<TrainSample>& samples) {
    if (samples.empty()) throw std::invalid_argument("batch_gradient: empty batch");
    std::vector<std::array<double, 3>> grad(denoiser.n_buckets(), {0.0, 0.0, 0.0});
    std::size_t count = 0;
    for (const auto& s : samples) count += s.x0.size();
    for (const auto& s : samples) {
        const std::size_t b = denoiser.bucket_of(s.t);
        const StateVector pred = denoiser.predict(s.xt, s.x1, s.t);
        for (std::size_t i = 0; i < pred.size(); ++i) {
            const double err = (pred[i] - s.x0[i]).real();
            grad[b][0] += 2.0 * err * s.xt[i].real() / static_cast<double>(count);
            grad[b][1] += 2.0 * err * s.x1[i].real() / static_cast<double>(count);
            grad[b][2] += 2.0 * err / static_cast<double>(count);
        }
    }
    return grad;
}

TrainStepRecord training_step(const ScheduleParams& schedule, LinearDenoiser& denoiser,
                              const std::vector<std::pair<StateVector, StateVector>>& batch,
                              RngStream& rng, double lr) {
    if (batch.empty()) throw std::invalid_argument("training_step: empty batch");
    if (!(lr >= 0.0)) throw std::invalid_argument("training_step: lr must be >= 0");

    const std::vector<TrainSample> samples =
        perturb_batch(schedule, batch, denoiser.t_min(), rng);

    TrainStepRecord record;
    record.mse = batch_mse(denoiser, samples);

    // monitoring: energy scorers over the concatenated predictions vs targets
    {
        Waveform est, ref;
        for (const auto& s : samples) {
            const StateVector pred = denoiser.predict(s.xt, s.x1, s.t);
            for (std::size_t i = 0; i < pred.size(); ++i) {
                est.samples.push_back(pred[i].real());
                ref.samples.push_back(s.x0[i].real());
            }
        }
        const auto scorers = mpd_energy_scorers();
        const auto fake = score_all(scorers, est);
        const auto real = score_all(scorers, ref);
        record.hinge_g = hinge_g_loss(fake);
        record.hinge_d = hinge_d_loss(real, fake);
    }

    const auto grad = batch_gradient(denoiser, samples);
    for (std::size_t b = 0; b < denoiser.n_buckets(); ++b)
        for (int j = 0; j < 3; ++j) denoiser.weights(b)[j] -= lr * grad[b][j];
    return record;
}

double bayes_mse_floor(const ToyModel& toy, const ScheduleParams& schedule, double t_lo,
                       double t_hi, std::size_t n_points) {
    toy.validate();
    if (!(t_hi > t_lo)) throw std::invalid_argument("bayes_mse_floor: bad interval");
    double acc = 0.0;
    for (std::size_t i = 0; i < n_points; ++i) {
        const double t =
            t_lo + (t_hi - t_lo) * (static_cast<double>(i) + 0.5) / static_cast<double>(n_points);
        acc += conditional_variance(toy, schedule, t);
    }
    return acc / static_cast<double>(n_points);
}

double oracle_check_max_residual(const ToyModel& toy, const ScheduleParams& schedule,
                                 std::size_t n_draws, std::uint64_t seed) {
    toy.validate();
    RngStream rng(seed, 0);
    const double s0_2 = toy.s0 * toy.s0;
    const double vx1 = toy.a * toy.a * s0_2 + toy.sn * toy.sn;

    double worst = 0.0;
    for (std::size_t it = 0; it < n_draws; ++it) {
        const double t = rng.uniform(0.01, 0.99);
        const MarginalParams m = marginal(schedule, t);
        const double x0 = toy.mu0 + toy.s0 * rng.gaussian();
        const double x1 = toy.a * x0 + toy.b + toy.sn * rng.gaussian();
        const double xt =
            m.mean_weight_x0 * x0 + m.mean_weight_x1 * x1 + std::sqrt(m.variance) * rng.gaussian();

        // dense conditioning of x0 on (x_t, x1)
        const double c_x0_x1 = toy.a * s0_2;
        const double c_x0_xt = m.mean_weight_x0 * s0_2 + m.mean_weight_x1 * c_x0_x1;
        const double c_x1_xt = m.mean_weight_x0 * c_x0_x1 + m.mean_weight_x1 * vx1;
        const double v_xt = m.mean_weight_x0 * m.mean_weight_x0 * s0_2 +
                            m.mean_weight_x1 * m.mean_weight_x1 * vx1 +
                            2.0 * m.mean_weight_x0 * m.mean_weight_x1 * c_x0_x1 + m.variance;
        const double mu_xt =
            m.mean_weight_x0 * toy.mu0 + m.mean_weight_x1 * (toy.a * toy.mu0 + toy.b);

        Eigen::Matrix2d cov;
        cov << v_xt, c_x1_xt, c_x1_xt, vx1;
        Eigen::Vector2d cross(c_x0_xt, c_x0_x1);
        Eigen::Vector2d delta(xt - mu_xt, x1 - (toy.a * toy.mu0 + toy.b));
        const Eigen::Vector2d gain = cov.ldlt().solve(cross);
        const double expected = toy.mu0 + gain.dot(delta);

        const StateVector got = toy_exact_denoiser(
            toy, schedule, StateVector::real({xt}), StateVector::real({x1}), t);
        worst = std::max(worst, std::fabs(got[0].real() - expected));
    }

    // endpoint limits: x_t at t = 0, the x1-posterior mean at t = 1
    {
        const double x0 = toy.mu0 + 1.3 * toy.s0;
        const double x1 = toy.a * x0 + toy.b + toy.sn;
        const StateVector at0 = toy_exact_denoiser(
            toy, schedule, StateVector::real({x0}), StateVector::real({x1}), 0.0);
        worst = std::max(worst, std::fabs(at0[0].real() - x0));
        const StateVector at1 = toy_exact_denoiser(
            toy, schedule, StateVector::real({x1}), StateVector::real({x1}), 1.0);
        worst = std::max(worst, std::fabs(at1[0].real() - toy.posterior_mean(x1)));
    }
    return worst;
}

// --- convergence experiment -------------------------------------------------

std::string to_string(ToyFamily family) {
    switch (family) {
        case ToyFamily::SbSde: return "sb-sde";
        case ToyFamily::SbOde: return "sb-ode";
        case ToyFamily::Sgm: return "sgm";
        case ToyFamily::Rfm: return "rfm";
    }
    return "?";
}

ToyFamily toy_family_from_string(const std::string& name) {
    if (name == "sb-sde" || name == "sb_sde") return ToyFamily::SbSde;
    if (name == "sb-ode" || name == "sb_ode") return ToyFamily::SbOde;
    if (name == "sgm") return ToyFamily::Sgm;
    if (name == "rfm" || name == "otfm") return ToyFamily::Rfm;
    throw std::invalid_argument("unknown sampler family: " + name);
}

std::vector<ConvergenceRow> convergence_experiment(const ConvergenceConfig& config) {
    config.toy.validate();
    config.schedule.validate();
    config.ouve.validate();
    if (config.n_trajectories == 0 || config.dim == 0)
        throw std::invalid_argument("convergence_experiment: empty configuration");

    const StateVector x1 = StateVector::real_filled(config.dim, config.x1_value);
    const double m_p = config.toy.posterior_mean(config.x1_value);
    const double v_p = config.toy.posterior_variance();
    const Denoiser denoiser = make_toy_exact_denoiser(config.toy, config.schedule);
    const ScoreFn score = make_toy_exact_score(config.toy, config.ouve, x1);
    const VelocityFn velocity = make_toy_exact_flow_velocity(config.toy, x1);

    std::vector<ConvergenceRow> rows;
    for (const ToyFamily family : config.families) {
        const bool deterministic = family == ToyFamily::SbOde || family == ToyFamily::Rfm;
        const std::size_t n_traj = deterministic ? 1 : config.n_trajectories;

        for (const std::size_t n_steps : config.steps_list) {
            const auto t0 = std::chrono::steady_clock::now();
            double sum = 0.0, sum2 = 0.0;
            std::size_t count = 0;
            for (std::size_t traj = 0; traj < n_traj; ++traj) {
                RngStream stream(config.seed, traj);
                StateVector out;
                switch (family) {
                    case ToyFamily::SbSde: {
                        SamplerConfig sc;
                        sc.schedule = config.schedule;
                        sc.n_steps = n_steps;
                        sc.t_min = config.t_min;
                        sc.family = SamplerFamily::SbSde;
                        out = sample_sde(sc, denoiser, x1, stream);
                        break;
                    }
                    case ToyFamily::SbOde: {
                        SamplerConfig sc;
                        sc.schedule = config.schedule;
                        sc.n_steps = n_steps;
                        sc.t_min = config.t_min;
                        sc.family = SamplerFamily::SbOde;
                        out = sample_ode(sc, denoiser, x1);
                        break;
                    }
                    case ToyFamily::Sgm: {
                        OuveParams ouve = config.ouve;
                        ouve.t_min = config.t_min;
                        out = sgm_sample(ouve, score, x1, n_steps, stream);
                        break;
                    }
                    case ToyFamily::Rfm:
                        out = flow_euler_sample(velocity, x1, n_steps);
                        break;
                }
                for (std::size_t i = 0; i < out.size(); ++i) {
                    const double v = out[i].real();
                    sum += v;
                    sum2 += v * v;
                }
                count += out.size();
            }
            const auto t1 = std::chrono::steady_clock::now();

            const double n = static_cast<double>(count);
            const double mean = sum / n;
            const double var = count > 1 ? std::max(0.0, (sum2 - n * mean * mean) / (n - 1.0))
                                         : 0.0;
            ConvergenceRow row;
            row.family = family;
            row.n_steps = n_steps;
            row.mean_err = std::fabs(mean - m_p);
            row.var_err = std::fabs(var - v_p);
            const double sd_err = std::sqrt(var) - std::sqrt(v_p);
            row.w2 = std::sqrt(row.mean_err * row.mean_err + sd_err * sd_err);
            row.se_mean = count > 1 ? std::sqrt(var / n) : 0.0;
            row.wall_ms =
                std::chrono::duration<double, std::milli>(t1 - t0).count();
            rows.push_back(row);
        }
    }
    return rows;
}

}  // namespace sbridge
