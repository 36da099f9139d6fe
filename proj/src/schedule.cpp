#include "genuq/schedule.hpp"

#include "genuq/errors.hpp"

namespace genuq {

namespace {

void check_unit(double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw numeric_error("schedule: t outside [0,1]");
}

void check_open(double t) {
    if (!(t >= 0.0 && t < 1.0)) throw numeric_error("schedule: t outside [0,1)");
}

}  // namespace

Schedule::Schedule(double t_min_) : t_min(t_min_) {
    if (!(t_min > 0.0 && t_min < 0.5))
        throw config_error("schedule: t_min must lie in (0, 0.5)");
}

double Schedule::gamma(double t) const {
    check_unit(t);
    return 1.0 - t;
}

double Schedule::rho2(double t) const {
    check_unit(t);
    return t;
}

double Schedule::delta(double t) const {
    check_open(t);
    return -1.0 / (1.0 - t);
}

double Schedule::tau2(double t) const {
    check_open(t);
    return (1.0 + t) / (1.0 - t);
}

}  // namespace genuq
