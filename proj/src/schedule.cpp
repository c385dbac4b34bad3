#include "sbridge/schedule.hpp"

#include <cmath>
#include <stdexcept>

namespace sbridge {

ScheduleParams ScheduleParams::gmax(double beta0, double beta1) {
    return {ScheduleKind::Gmax, beta0, beta1, 0.0, 0.0};
}

ScheduleParams ScheduleParams::scaled_vp(double beta0, double beta1, double c) {
    return {ScheduleKind::ScaledVp, beta0, beta1, c, 0.0};
}

ScheduleParams ScheduleParams::ve(double c, double k) {
    return {ScheduleKind::Ve, 0.0, 0.0, c, k};
}

void ScheduleParams::validate() const {
    switch (kind) {
        case ScheduleKind::Gmax:
        case ScheduleKind::ScaledVp:
            if (!(beta0 > 0.0) || !(beta1 > beta0))
                throw std::invalid_argument("schedule: requires beta1 > beta0 > 0");
            if (kind == ScheduleKind::ScaledVp && !(c > 0.0))
                throw std::invalid_argument("schedule: requires c > 0");
            break;
        case ScheduleKind::Ve:
            if (!(c > 0.0)) throw std::invalid_argument("schedule: requires c > 0");
            if (!(k > 1.0)) throw std::invalid_argument("schedule: requires k > 1");
            break;
    }
}

namespace {

void check_time(double t) {
    if (!(t >= 0.0 && t <= 1.0))
        throw std::invalid_argument("schedule: t must lie in [0, 1]");
}

double drift_at(const ScheduleParams& p, double t) {
    if (p.kind == ScheduleKind::ScaledVp)
        return -0.5 * (p.beta0 + t * (p.beta1 - p.beta0));
    return 0.0;
}

double g2_at(const ScheduleParams& p, double t) {
    switch (p.kind) {
        case ScheduleKind::Gmax:
            return p.beta0 + t * (p.beta1 - p.beta0);
        case ScheduleKind::ScaledVp:
            return p.c * (p.beta0 + t * (p.beta1 - p.beta0));
        case ScheduleKind::Ve:
            return p.c * std::pow(p.k, 2.0 * t);
    }
    return 0.0;
}

double alpha_at(const ScheduleParams& p, double t) {
    if (p.kind == ScheduleKind::ScaledVp) {
        const double d = p.beta1 - p.beta0;
        return std::exp(-0.5 * (p.beta0 * t + 0.5 * d * t * t));
    }
    return 1.0;
}

double sigma2_at(const ScheduleParams& p, double t) {
    const double d = p.beta1 - p.beta0;
    switch (p.kind) {
        case ScheduleKind::Gmax:
            return 0.5 * t * t * d + p.beta0 * t;
        case ScheduleKind::ScaledVp:
            // antiderivative of g^2/alpha^2 = c (b0 + d tau) e^{b0 tau + d tau^2/2}
            return p.c * std::expm1(p.beta0 * t + 0.5 * d * t * t);
        case ScheduleKind::Ve:
            return p.c * std::expm1(2.0 * t * std::log(p.k)) / (2.0 * std::log(p.k));
    }
    return 0.0;
}

}  // namespace

ScheduleValues evaluate(const ScheduleParams& params, double t) {
    params.validate();
    check_time(t);
    ScheduleValues v;
    v.t = t;
    v.f = drift_at(params, t);
    v.g2 = g2_at(params, t);
    v.alpha = alpha_at(params, t);
    v.alpha_bar = alpha_at(params, t) / alpha_at(params, 1.0);
    v.sigma1_2 = sigma2_at(params, 1.0);
    v.sigma2 = sigma2_at(params, t);
    v.sigma_bar2 = v.sigma1_2 - v.sigma2;
    return v;
}

QuadratureResiduals verify_quadrature(const ScheduleParams& params, double t,
                                      std::size_t n_points) {
    params.validate();
    check_time(t);
    if (n_points < 16)
        throw std::invalid_argument("verify_quadrature: n_points must be >= 16");
    std::size_t n = n_points;
    if (n % 2 != 0) ++n;

    const double h = t / static_cast<double>(n);
    long double acc_g = 0.0L;   // int g^2 / alpha^2
    long double acc_f = 0.0L;   // int f
    for (std::size_t i = 0; i <= n; ++i) {
        const double tau = h * static_cast<double>(i);
        const double a = alpha_at(params, tau);
        const double ig = g2_at(params, tau) / (a * a);
        const double fi = drift_at(params, tau);
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        acc_g += static_cast<long double>(w * ig);
        acc_f += static_cast<long double>(w * fi);
    }
    const double int_g = static_cast<double>(acc_g) * h / 3.0;
    const double int_f = static_cast<double>(acc_f) * h / 3.0;

    QuadratureResiduals r;
    r.sigma2_residual = std::fabs(int_g - sigma2_at(params, t));
    r.alpha_residual = std::fabs(std::exp(int_f) - alpha_at(params, t));
    return r;
}

std::string to_string(ScheduleKind kind) {
    switch (kind) {
        case ScheduleKind::Gmax: return "gmax";
        case ScheduleKind::ScaledVp: return "scaled-vp";
        case ScheduleKind::Ve: return "ve";
    }
    return "?";
}

ScheduleKind schedule_kind_from_string(const std::string& name) {
    if (name == "gmax") return ScheduleKind::Gmax;
    if (name == "scaled-vp" || name == "scaled_vp" || name == "svp")
        return ScheduleKind::ScaledVp;
    if (name == "ve") return ScheduleKind::Ve;
    throw std::invalid_argument("unknown schedule kind: " + name);
}

}  // namespace sbridge
