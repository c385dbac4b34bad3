#include "sbridge/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sbridge {

void OuveParams::validate() const {
    if (!(gamma > 0.0)) throw std::invalid_argument("ouve: gamma must be > 0");
    if (!(sigma_min > 0.0) || !(sigma_max > sigma_min))
        throw std::invalid_argument("ouve: requires sigma_max > sigma_min > 0");
    if (!(corrector_snr > 0.0))
        throw std::invalid_argument("ouve: corrector_snr must be > 0");
    if (!(t_min > 0.0 && t_min < 1.0))
        throw std::invalid_argument("ouve: t_min must lie in (0, 1)");
}

double OuveParams::g2(double t) const {
    const double log_ratio = std::log(sigma_max / sigma_min);
    return 2.0 * log_ratio * sigma_min * sigma_min * std::exp(2.0 * log_ratio * t);
}

double OuveParams::kernel_variance(double t) const {
    const double log_ratio = std::log(sigma_max / sigma_min);
    return sigma_min * sigma_min * log_ratio / (gamma + log_ratio) *
           (std::exp(2.0 * log_ratio * t) - std::exp(-2.0 * gamma * t));
}

StateVector sgm_score_target(const StateVector& xt, const StateVector& x0,
                             const StateVector& y, double t, const OuveParams& ouve) {
    ouve.validate();
    if (!xt.same_shape(x0) || !xt.same_shape(y))
        throw std::invalid_argument("sgm_score_target: shape mismatch");
    const double var = ouve.kernel_variance(t);
    if (!(var > 0.0))
        throw std::invalid_argument("sgm_score_target: zero kernel variance (t below floor)");
    const double w = ouve.kernel_mean_weight(t);
    StateVector score = xt;
    for (std::size_t i = 0; i < score.size(); ++i) {
        const auto mean = w * x0[i] + (1.0 - w) * y[i];
        score[i] = -(xt[i] - mean) / var;
    }
    return score;
}

namespace {

double state_norm(const StateVector& x) {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += std::norm(x[i]);
    return std::sqrt(acc);
}

StateVector draw_noise(const StateVector& like, RngStream& rng) {
    StateVector z = like;
    if (like.is_complex()) {
        for (std::size_t i = 0; i < z.size(); ++i) z[i] = rng.gaussian_complex();
    } else {
        for (std::size_t i = 0; i < z.size(); ++i) z[i] = rng.gaussian();
    }
    return z;
}

void ensure_finite(const StateVector& x, const char* where) {
    if (!x.all_finite())
        throw std::runtime_error(std::string(where) + ": state went non-finite");
}

}  // namespace

StateVector sgm_sample(const OuveParams& ouve, const ScoreFn& score, const StateVector& y,
                       std::size_t n_steps, RngStream& rng) {
    ouve.validate();
    if (n_steps < 1) throw std::invalid_argument("sgm_sample: n_steps must be >= 1");
    if (!score) throw std::invalid_argument("sgm_sample: null score function");

    const double dt = (1.0 - ouve.t_min) / static_cast<double>(n_steps);
    StateVector x = y;
    {
        const double prior_std = std::sqrt(ouve.kernel_variance(1.0));
        const StateVector z = draw_noise(y, rng);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] += prior_std * z[i];
    }

    for (std::size_t n = n_steps; n >= 1; --n) {
        const double t = ouve.t_min + static_cast<double>(n) * dt;
        const double t_next = ouve.t_min + static_cast<double>(n - 1) * dt;

        // predictor: reverse Euler-Maruyama over [t_next, t]
        const StateVector s = score(x, t);
        if (!s.same_shape(x))
            throw std::invalid_argument("sgm_sample: score changed state shape");
        const double g2 = ouve.g2(t);
        const StateVector z = draw_noise(x, rng);
        const double diff = std::sqrt(g2 * dt);
        for (std::size_t i = 0; i < x.size(); ++i) {
            const auto drift = ouve.gamma * (y[i] - x[i]) - g2 * s[i];
            x[i] = x[i] - drift * dt + diff * z[i];
        }
        ensure_finite(x, "sgm_sample");

        // annealed-Langevin corrector at the new time
        for (std::size_t c = 0; c < ouve.n_corrector; ++c) {
            const StateVector sc = score(x, t_next);
            const StateVector zc = draw_noise(x, rng);
            const double nz = state_norm(zc);
            const double ns = state_norm(sc);
            if (ns <= 0.0) continue;
            const double ratio = ouve.corrector_snr * nz / ns;
            const double eps = 2.0 * ratio * ratio;
            const double step_noise = std::sqrt(2.0 * eps);
            for (std::size_t i = 0; i < x.size(); ++i)
                x[i] += eps * sc[i] + step_noise * zc[i];
            ensure_finite(x, "sgm_sample corrector");
        }
    }
    return x;
}

StateVector rfm_velocity_target(const StateVector& xt, const StateVector& x0, double t) {
    if (!xt.same_shape(x0))
        throw std::invalid_argument("rfm_velocity_target: shape mismatch");
    if (!(t > 0.0)) throw std::invalid_argument("rfm_velocity_target: t must be > 0");
    StateVector v = xt;
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = (xt[i] - x0[i]) / t;
    return v;
}

StateVector flow_euler_sample(const VelocityFn& velocity, const StateVector& x1,
                              std::size_t n_steps) {
    if (n_steps < 1) throw std::invalid_argument("flow_euler_sample: n_steps must be >= 1");
    if (!velocity) throw std::invalid_argument("flow_euler_sample: null velocity");
    const double dt = 1.0 / static_cast<double>(n_steps);
    StateVector x = x1;
    for (std::size_t n = n_steps; n >= 1; --n) {
        const double t = static_cast<double>(n) * dt;
        const StateVector v = velocity(t, x);
        if (!v.same_shape(x))
            throw std::invalid_argument("flow_euler_sample: velocity changed state shape");
        for (std::size_t i = 0; i < x.size(); ++i) x[i] += dt * v[i];
        ensure_finite(x, "flow_euler_sample");
    }
    return x;
}

namespace {

// Hungarian algorithm with potentials, O(n^3).
std::vector<std::size_t> min_cost_assignment(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> match(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, kInf);
        std::vector<bool> used(n + 1, false);
        do {
            used[j0] = true;
            const int i0 = match[j0];
            int j1 = -1;
            double delta = kInf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const int j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::size_t> perm(n);
    for (int j = 1; j <= n; ++j) perm[match[j] - 1] = static_cast<std::size_t>(j - 1);
    return perm;
}

}  // namespace

std::vector<std::size_t> ot_pair_minibatch(const std::vector<StateVector>& x0_batch,
                                           const std::vector<StateVector>& x1_batch) {
    if (x0_batch.size() != x1_batch.size())
        throw std::invalid_argument("ot_pair_minibatch: batch size mismatch");
    if (x0_batch.empty()) throw std::invalid_argument("ot_pair_minibatch: empty batch");
    if (x0_batch.size() > 64)
        throw std::invalid_argument("ot_pair_minibatch: batch too large for exact solve (max 64)");

    const std::size_t m = x0_batch.size();
    std::vector<std::vector<double>> cost(m, std::vector<double>(m, 0.0));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            if (!x0_batch[i].same_shape(x1_batch[j]))
                throw std::invalid_argument("ot_pair_minibatch: state shape mismatch");
            double acc = 0.0;
            for (std::size_t k = 0; k < x0_batch[i].size(); ++k)
                acc += std::norm(x0_batch[i][k] - x1_batch[j][k]);
            cost[i][j] = acc;
        }
    return min_cost_assignment(cost);
}

}  // namespace sbridge
