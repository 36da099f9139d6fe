#pragma once

namespace genuq {

// Diffusion interpolation coefficients gamma_t = 1 - t, rho_t^2 = t, and the
// drift/diffusion pair they induce. Diffusion time is clamped to
// [t_min, 1]: the reverse ODE integrates from t = 1 down to t_min, where the
// velocity's 1/(2t) pole is still far away.
struct Schedule {
    double t_min = 1e-3;

    explicit Schedule(double t_min_ = 1e-3);

    // gamma(0) = 1, gamma(1) = 0, strictly decreasing.
    double gamma(double t) const;

    // rho2(0) = 0, rho2(1) = 1, strictly increasing.
    double rho2(double t) const;

    // d log gamma / dt = -1/(1-t). Pole at t = 1.
    double delta(double t) const;

    // d rho2/dt - 2 (d log gamma/dt) rho2 = (1+t)/(1-t). Pole at t = 1.
    double tau2(double t) const;
};

}  // namespace genuq
