// Noise schedules for the bridge reference SDE dx = f(t) x dt + g(t) dw.
//
// Three parameterizations (gmax, scaled VP, VE) with closed-form drift,
// squared diffusion, alpha integrals and accumulated variances. All derived
// samplers and losses pull their coefficients from here.

#ifndef SBRIDGE_SCHEDULE_HPP
#define SBRIDGE_SCHEDULE_HPP

#include <cstddef>
#include <string>

namespace sbridge {

enum class ScheduleKind { Gmax, ScaledVp, Ve };

struct ScheduleParams {
    ScheduleKind kind = ScheduleKind::Gmax;
    double beta0 = 0.01;  // gmax, scaled_vp
    double beta1 = 20.0;  // gmax, scaled_vp
    double c = 0.40;      // scaled_vp (default 0.30), ve (default 0.40)
    double k = 2.6;       // ve only, base of the exponential, > 1

    static ScheduleParams gmax(double beta0 = 0.01, double beta1 = 20.0);
    static ScheduleParams scaled_vp(double beta0 = 0.01, double beta1 = 20.0,
                                    double c = 0.30);
    static ScheduleParams ve(double c = 0.40, double k = 2.6);

    // Throws std::invalid_argument on a violated parameter constraint.
    void validate() const;
};

// All coefficients at one time point.
//   alpha     = exp(int_0^t f)
//   alpha_bar = exp(-int_t^1 f) = alpha_t / alpha_1
//   sigma2    = int_0^t g^2 / alpha^2
//   sigma_bar2 = sigma1_2 - sigma2   (same integrand, complementary interval)
struct ScheduleValues {
    double t = 0.0;
    double f = 0.0;
    double g2 = 0.0;
    double alpha = 1.0;
    double alpha_bar = 1.0;
    double sigma2 = 0.0;
    double sigma_bar2 = 0.0;
    double sigma1_2 = 0.0;
};

// Closed-form evaluation at t in [0, 1]. Throws on out-of-range t or bad
// params.
ScheduleValues evaluate(const ScheduleParams& params, double t);

// Residuals of the closed forms against composite-Simpson quadrature with
// n_points subintervals (rounded up to even, must be >= 16):
//   first  = | numeric int_0^t g^2/alpha^2  -  sigma2(t) |
//   second = | exp(numeric int_0^t f)       -  alpha(t)  |
struct QuadratureResiduals {
    double sigma2_residual = 0.0;
    double alpha_residual = 0.0;
};
QuadratureResiduals verify_quadrature(const ScheduleParams& params, double t,
                                      std::size_t n_points);

std::string to_string(ScheduleKind kind);
ScheduleKind schedule_kind_from_string(const std::string& name);

}  // namespace sbridge

#endif  // SBRIDGE_SCHEDULE_HPP
