#ifndef SDP_INTEGRATOR_HPP
#define SDP_INTEGRATOR_HPP

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "sdp/types.hpp"

namespace sdp {

struct StepControl {
    double rtol = 1e-10;
    double atol = 1e-12;
    double max_step = 0.05;
    double min_step = 1e-14;
};

// Dormand-Prince 5(4) tableau.
namespace dp5 {
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                        e6 = 22.0 / 525, e7 = -1.0 / 40;
} // namespace dp5

template <typename State>
struct StepResult {
    State y;     // fifth-order solution
    State error; // difference to the embedded fourth-order solution
    State f_end; // field at y (first stage of the next step)
};

/// One Dormand-Prince step of an autonomous field. f0 = field(y0).
template <typename Field, typename State>
StepResult<State> dopri5_step(Field&& field, const State& y0, const State& f0, double h)
{
    using namespace dp5;
    const State k1 = f0;
    const State k2 = field(State(y0 + h * a21 * k1));
    const State k3 = field(State(y0 + h * (a31 * k1 + a32 * k2)));
    const State k4 = field(State(y0 + h * (a41 * k1 + a42 * k2 + a43 * k3)));
    const State k5 = field(State(y0 + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)));
    const State k6 = field(State(y0 + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)));
    StepResult<State> out;
    out.y = y0 + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    out.f_end = field(out.y);
    out.error = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * out.f_end);
    return out;
}

/// RMS of the error scaled by atol + rtol max(|y0|, |y1|).
template <typename State>
double scaled_error(const State& err, const State& y0, const State& y1, const StepControl& ctl)
{
    const State sc = (ctl.atol + ctl.rtol * y0.cwiseAbs().cwiseMax(y1.cwiseAbs()).array()).matrix();
    return std::sqrt((err.array() / sc.array()).square().mean());
}

/// Step-size controller with the PI gains of Hairer's DOPRI5.
class PIController {
public:
    static constexpr double beta = 0.04;
    static constexpr double exponent = 0.2 - 0.75 * beta;
    static constexpr double safety = 0.9;
    static constexpr double min_factor = 0.2;
    static constexpr double max_factor = 10.0;

    /// Growth factor for the next step. Call accept() once the step is taken.
    double factor(double err) const
    {
        if (err == 0.0)
            return max_factor;
        const double fac = safety * std::pow(err, -exponent) * std::pow(err_old_, beta);
        return std::clamp(fac, min_factor, max_factor);
    }

    void accept(double err) { err_old_ = std::max(err, 1e-4); }

private:
    double err_old_ = 1e-4;
};

/// Starting step from the derivative scale, as in Hairer, Norsett and Wanner.
template <typename Field, typename State>
double initial_step(Field&& field, const State& y0, const State& f0, const StepControl& ctl)
{
    const State sc = (ctl.atol + ctl.rtol * y0.cwiseAbs().array()).matrix();
    const double d0 = std::sqrt((y0.array() / sc.array()).square().mean());
    const double d1 = std::sqrt((f0.array() / sc.array()).square().mean());
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, ctl.max_step);
    const State f1 = field(State(y0 + h0 * f0));
    const double d2 = std::sqrt(((f1 - f0).array() / sc.array()).square().mean()) / h0;
    const double m = std::max(d1, d2);
    const double h1 = m <= 1e-15 ? std::max(1e-6, 1e-3 * h0) : std::pow(0.01 / m, 0.2);
    return std::min({100.0 * h0, h1, ctl.max_step});
}

/// Adaptive integration of an autonomous field over [0, t_end] (t_end may be negative).
/// Returns the state at exactly t_end. Throws IntegrationError on step underflow or when
/// max_steps is exceeded.
template <typename Field, typename State>
State integrate_to(Field&& field, State y, double t_end, const StepControl& ctl = {}, long max_steps = 1000000)
{
    const double dir = t_end < 0.0 ? -1.0 : 1.0;
    auto f = [&](const State& s) -> State { return dir * field(s); };
    const double span = std::abs(t_end);
    State fy = f(y);
    double h = initial_step(f, y, fy, ctl);
    double t = 0.0;
    PIController pi;
    for (long n = 0; t < span; ++n) {
        if (n >= max_steps)
            throw IntegrationError("step limit exceeded");
        h = std::min(h, span - t);
        const auto step = dopri5_step(f, y, fy, h);
        const double err = scaled_error(step.error, y, step.y, ctl);
        if (!std::isfinite(err)) {
            h *= PIController::min_factor;
        } else if (err <= 1.0) {
            t = (span - t <= h) ? span : t + h;
            y = step.y;
            fy = step.f_end;
            h = std::min(h * pi.factor(err), ctl.max_step);
            pi.accept(err);
            continue;
        } else {
            h *= std::max(PIController::min_factor, PIController::safety * std::pow(err, -0.2));
        }
        if (h < ctl.min_step)
            throw IntegrationError("step size underflow");
    }
    return y;
}

} // namespace sdp

#endif // SDP_INTEGRATOR_HPP
