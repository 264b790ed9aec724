#include "sdp/orbits.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/QR>

namespace sdp {

std::string_view to_string(OrbitMode mode)
{
    switch (mode) {
    case OrbitMode::TauTime: return "TauTime";
    case OrbitMode::STime: return "STime";
    case OrbitMode::XTime: return "XTime";
    }
    return "?";
}

std::string_view to_string(Branch branch)
{
    switch (branch) {
    case Branch::UnstablePlus: return "UnstablePlus";
    case Branch::UnstableMinus: return "UnstableMinus";
    case Branch::StablePlus: return "StablePlus";
    case Branch::StableMinus: return "StableMinus";
    }
    return "?";
}

Branch branch_from_string(std::string_view name)
{
    for (Branch b : {Branch::UnstablePlus, Branch::UnstableMinus, Branch::StablePlus, Branch::StableMinus})
        if (to_string(b) == name)
            return b;
    throw InvalidBranchError("unknown branch '" + std::string(name) + "'");
}

std::string_view to_string(EventTag tag)
{
    switch (tag) {
    case EventTag::HitUAxis: return "HitUAxis";
    case EventTag::HitSingularLine: return "HitSingularLine";
    case EventTag::ReachedEquilibrium: return "ReachedEquilibrium";
    case EventTag::EnteredChart: return "EnteredChart";
    case EventTag::LeftChart: return "LeftChart";
    case EventTag::ClosedLoop: return "ClosedLoop";
    case EventTag::StepLimit: return "StepLimit";
    case EventTag::Horizon: return "Horizon";
    }
    return "?";
}

std::string_view to_string(FitForm form)
{
    switch (form) {
    case FitForm::ExpGrowth: return "ExpGrowth";
    case FitForm::ExpDecayToLevel: return "ExpDecayToLevel";
    case FitForm::LinearHit: return "LinearHit";
    case FitForm::PowerBlowup: return "PowerBlowup";
    }
    return "?";
}

std::string_view to_string(Side side) { return side == Side::Left ? "left" : "right"; }

std::size_t Orbit::count(EventTag tag) const
{
    return static_cast<std::size_t>(
        std::count_if(events.begin(), events.end(), [tag](const Event& e) { return e.tag == tag; }));
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Re-expresses a state between frames. Chart points on l1 = 0 cannot move to the interior.
Vec2d express_in(Frame from, const Vec2d& y, Frame to)
{
    if (from == to)
        return y;
    if (from == Frame::Interior)
        return to_chart(chart_of(to), y).lambda;
    const ChartPoint cp{chart_of(from), y};
    if (to == Frame::Interior)
        return from_chart(cp);
    return chart_to_chart(cp, chart_of(to)).lambda;
}

// Chart that takes over once |l2| grows past the switch level: the v-charts for U1/V1, the
// u-charts for U2/V2.
ChartId neighbour_chart(ChartId chart, double l2)
{
    switch (chart) {
    case ChartId::U1: return l2 > 0.0 ? ChartId::U2 : ChartId::V2;
    case ChartId::V1: return l2 < 0.0 ? ChartId::U2 : ChartId::V2;
    case ChartId::U2: return l2 > 0.0 ? ChartId::U1 : ChartId::V1;
    case ChartId::V2: return l2 < 0.0 ? ChartId::U1 : ChartId::V1;
    }
    return chart;
}

struct Target {
    EquilibriumId id;
    Frame frame;
    Vec2d loc;
    bool saddle;
    double radius;
    double level; // H at the saddle
    bool armed;
};

// Finds the first time in (0, h] at which g changes sign along a fresh step from y0, by
// bisection on the step length.
template <typename Field, typename G>
double bisect_event(Field&& field, const Vec2d& y0, const Vec2d& f0, double h, G&& g, double tol, Vec2d& y_at)
{
    const double g0 = g(y0);
    double lo = 0.0, hi = h;
    Vec2d y_hi = dopri5_step(field, y0, f0, h).y;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        const Vec2d ym = dopri5_step(field, y0, f0, mid).y;
        if ((g(ym) > 0.0) == (g0 > 0.0) && g(ym) != 0.0) {
            lo = mid;
        } else {
            hi = mid;
            y_hi = ym;
        }
    }
    y_at = y_hi;
    return hi;
}

// Functions whose sign is that of v and of u + D/(2 alpha), valid in every frame for l1 > 0.
double v_sign_function(Frame frame, const Vec2d& y)
{
    switch (frame) {
    case Frame::Interior: return y[1];
    case Frame::U1: return y[1];
    case Frame::V1: return -y[1];
    case Frame::U2: return 1.0;
    case Frame::V2: return -1.0;
    }
    return 1.0;
}

double singular_function(Frame frame, const Vec2d& y, double s)
{
    switch (frame) {
    case Frame::Interior: return y[0] + s;
    case Frame::U1: return 1.0;
    case Frame::V1: return s * y[0] - 1.0;
    case Frame::U2: return y[1] + s * y[0];
    case Frame::V2: return s * y[0] - y[1];
    }
    return 1.0;
}

struct Pending {
    double dt;
    Event event;
    Vec2d y;
    bool terminal;
};

} // namespace

Orbit integrate(const ModelParams& p, Frame frame, const Vec2d& start, Direction direction,
                const IntegrateOptions& opts)
{
    Orbit orbit;
    orbit.origin.frame = frame;
    orbit.origin.start = start;
    orbit.origin.direction = direction;
    const double dir = direction == Direction::Forward ? 1.0 : -1.0;

    Frame cur = frame;
    auto field = [&](const Vec2d& s) -> Vec2d { return dir * frame_field(p, cur, s); };

    std::vector<Target> targets;
    for (const Equilibrium& e : all_equilibria(p)) {
        if (e.id == EquilibriumId::E0)
            continue;
        Target t{e.id, e.frame, e.location, e.stability == Stability::Saddle, 0.0, 0.0, true};
        t.radius = t.saddle ? opts.saddle_radius * (1.0 + e.location.norm()) : opts.node_radius;
        if (t.saddle)
            t.level = conserved_H(p, e.location);
        if (e.frame == frame && (start - e.location).norm() < 2.0 * t.radius)
            t.armed = false;
        targets.push_back(t);
    }

    const double s_line = p.u_singular();
    Vec2d y = start;
    double t = 0.0;
    orbit.samples.push_back({t, cur, y});

    // Poincare section for ClosedLoop: v = v_start, crossed in the initial direction of v, same sign of u.
    const double v_sec = start[1];
    const double loop_dir = frame == Frame::Interior ? (field(start)[1] > 0.0 ? 1.0 : -1.0) : 0.0;
    const double u_sign = start[0] >= 0.0 ? 1.0 : -1.0;

    std::vector<Vec2d> event_points; // interior position of each recorded crossing, NaN elsewhere
    const Vec2d nowhere = Vec2d::Constant(std::numeric_limits<double>::quiet_NaN());

    Vec2d fy = field(y);
    StepControl ctl = opts.control;
    double h = initial_step(field, y, fy, ctl);
    PIController pi;
    long steps = 0;

    auto finish = [&](EventTag tag, std::optional<EquilibriumId> eq = std::nullopt) {
        orbit.events.push_back({t, tag, eq, std::nullopt});
        event_points.push_back(nowhere);
    };

    while (true) {
        if (steps >= opts.step_limit) {
            finish(EventTag::StepLimit);
            break;
        }
        const double remaining = opts.horizon - std::abs(t);
        if (remaining <= 0.0) {
            finish(EventTag::Horizon);
            break;
        }
        const bool clipped = h >= remaining;
        if (clipped)
            h = remaining;

        const auto step = dopri5_step(field, y, fy, h);
        const double err = scaled_error(step.error, y, step.y, ctl);
        if (!std::isfinite(err) || err > 1.0) {
            const double shrink = std::isfinite(err)
                                      ? std::max(PIController::min_factor, PIController::safety * std::pow(err, -0.2))
                                      : PIController::min_factor;
            h *= shrink;
            if (h < ctl.min_step)
                throw IntegrationError("step size underflow at |t| = " + std::to_string(std::abs(t)));
            continue;
        }
        ++steps;
        const Vec2d y1 = step.y;

        std::vector<Pending> pending;
        auto crossing = [&](EventTag tag, auto g) {
            const double g0 = g(y), g1 = g(y1);
            if ((g0 > 0.0 && g1 <= 0.0) || (g0 < 0.0 && g1 >= 0.0)) {
                Vec2d ya;
                const double dt = bisect_event(field, y, fy, h, g, opts.event_time_tol, ya);
                pending.push_back({dt, {0.0, tag, {}, {}}, ya, false});
            }
        };
        crossing(EventTag::HitUAxis, [&](const Vec2d& s) { return v_sign_function(cur, s); });
        crossing(EventTag::HitSingularLine, [&](const Vec2d& s) { return singular_function(cur, s, -s_line); });
        if (cur == Frame::Interior) {
            if (opts.stop_on_closed_loop && loop_dir != 0.0) {
                const double c0 = (y[1] - v_sec) * loop_dir, c1 = (y1[1] - v_sec) * loop_dir;
                if (c0 < 0.0 && c1 >= 0.0) {
                    Vec2d ya;
                    const double dt = bisect_event(
                        field, y, fy, h, [v_sec](const Vec2d& s) { return s[1] - v_sec; }, opts.event_time_tol, ya);
                    if (ya[0] * u_sign > 0.0)
                        pending.push_back({dt, {0.0, EventTag::ClosedLoop, {}, {}}, ya, true});
                }
            }
        }

        // Equilibrium arrivals.
        for (Target& tg : targets) {
            if (tg.frame != cur)
                continue;
            const double d1 = (y1 - tg.loc).norm();
            if (!tg.armed) {
                if (d1 > 2.0 * tg.radius)
                    tg.armed = true;
                continue;
            }
            if (d1 < opts.node_radius && field(y1).norm() < opts.field_threshold) {
                pending.push_back({h, {0.0, EventTag::ReachedEquilibrium, canonical(tg.id), {}}, y1, true});
                continue;
            }
            if (!tg.saddle)
                continue;
            const double d0 = (y - tg.loc).norm();
            if (std::min(d0, d1) > 2.0 * tg.radius)
                continue;
            auto g = [&](const Vec2d& s) { return (s - tg.loc).dot(field(s)); };
            if (g(y) < 0.0 && g(y1) >= 0.0) {
                Vec2d ya;
                const double dt = bisect_event(field, y, fy, h, g, opts.event_time_tol, ya);
                const double dh = std::abs(conserved_H(p, ya) - tg.level);
                if ((ya - tg.loc).norm() < tg.radius && dh <= opts.level_tol * (1.0 + std::abs(tg.level)))
                    pending.push_back({dt, {0.0, EventTag::ReachedEquilibrium, canonical(tg.id), {}}, ya, true});
            }
        }

        std::sort(pending.begin(), pending.end(), [](const Pending& a, const Pending& b) { return a.dt < b.dt; });
        bool stop = false;
        for (const Pending& ev : pending) {
            Event e = ev.event;
            e.time = t + dir * ev.dt;
            orbit.events.push_back(e);
            event_points.push_back(cur == Frame::Interior ? ev.y : nowhere);
            if (ev.terminal) {
                t = e.time;
                y = ev.y;
                orbit.samples.push_back({t, cur, y});
                stop = true;
                break;
            }
        }
        if (stop)
            break;

        t = clipped ? dir * opts.horizon : t + dir * h;
        y = y1;
        fy = step.f_end;
        orbit.samples.push_back({t, cur, y});
        h = std::min(h * pi.factor(err), ctl.max_step);
        pi.accept(err);

        if (!opts.chart_handoff)
            continue;
        // Frame handoff with hysteresis. The new frame takes over from this sample on.
        std::optional<Frame> next;
        if (cur == Frame::Interior) {
            if (quasi_radius(y) > opts.enter_chart_rho)
                next = frame_of(preferred_chart(y));
        } else {
            const ChartId chart = chart_of(cur);
            if (y[0] > 0.0 && quasi_radius(from_chart({chart, y})) < opts.exit_chart_rho)
                next = Frame::Interior;
            else if (std::abs(y[1]) > opts.chart_switch)
                next = frame_of(neighbour_chart(chart, y[1]));
        }
        if (next) {
            const Frame prev = cur;
            y = express_in(prev, y, *next);
            cur = *next;
            if (cur == Frame::Interior)
                orbit.events.push_back({t, EventTag::LeftChart, {}, chart_of(prev)});
            else
                orbit.events.push_back({t, EventTag::EnteredChart, {}, chart_of(cur)});
            event_points.push_back(nowhere);
            fy = field(y);
            h = initial_step(field, y, fy, ctl);
            pi = PIController{};
            // Points reached in the old frame do not count as departures in the new one.
            for (Target& tg : targets)
                if (tg.frame == cur && (y - tg.loc).norm() < 2.0 * tg.radius)
                    tg.armed = false;
        }
    }

    // Crossings inside the ball of a saddle at either end belong to the hyperbolic pass that
    // the closest-approach rule cuts off, not to the orbit.
    std::vector<Vec2d> balls;
    for (const Target& tg : targets)
        if (tg.saddle && frame == Frame::Interior && (start - tg.loc).norm() < 2.0 * tg.radius)
            balls.push_back(tg.loc);
    const Event* arrival = orbit.terminal();
    if (arrival && arrival->tag == EventTag::ReachedEquilibrium && is_finite(*arrival->eq))
        balls.push_back(equilibrium(p, *arrival->eq).location);
    std::vector<Event> kept;
    for (std::size_t i = 0; i < orbit.events.size(); ++i) {
        const Event& e = orbit.events[i];
        const bool crossing = e.tag == EventTag::HitUAxis || e.tag == EventTag::HitSingularLine;
        const bool in_ball = std::any_of(balls.begin(), balls.end(), [&](const Vec2d& b) {
            return (event_points[i] - b).norm() < 2.0 * opts.saddle_radius * (1.0 + b.norm());
        });
        if (!(crossing && in_ball))
            kept.push_back(e);
    }
    orbit.events = std::move(kept);

    const bool all_interior = std::all_of(orbit.samples.begin(), orbit.samples.end(),
                                          [](const OrbitSample& s) { return s.frame == Frame::Interior; });
    orbit.mode = all_interior ? OrbitMode::TauTime : OrbitMode::STime;

    const Event* last = orbit.terminal();
    if (last && last->tag == EventTag::ReachedEquilibrium) {
        if (direction == Direction::Forward)
            orbit.target = last->eq;
        else
            orbit.source = last->eq;
    }
    return orbit;
}

double default_epsilon(const Equilibrium& eq) { return 1e-7 * (1.0 + eq.location.norm()); }

namespace {

Vec2d real_unit(const Vec2cd& v)
{
    Vec2d r(v[0].real(), v[1].real());
    return r / r.norm();
}

} // namespace

Orbit shoot_saddle(const ModelParams& p, const Equilibrium& eq, Branch branch, std::optional<double> epsilon,
                   const IntegrateOptions& opts)
{
    const double eps = epsilon.value_or(default_epsilon(eq));
    const bool unstable = is_unstable(branch);
    const bool plus = branch == Branch::UnstablePlus || branch == Branch::StablePlus;
    Vec2d dir;
    if (eq.stability == Stability::Saddle) {
        // values[0] is the positive eigenvalue.
        dir = real_unit(eq.eigen.vectors[unstable ? 0 : 1]);
        if (dir[0] < 0.0)
            dir = -dir;
        if (!plus)
            dir = -dir;
    } else if (eq.stability == Stability::UnstableNode || eq.stability == Stability::StableNode) {
        if ((eq.stability == Stability::UnstableNode) != unstable)
            throw InvalidBranchError(std::string(to_string(branch)) + " does not exist at " +
                                     std::string(to_string(eq.id)));
        if (!plus)
            throw InvalidBranchError("only the Plus branch of an infinity node enters the disk");
        return shoot_node(p, eq, 0.0, eps, opts);
    } else {
        throw InvalidBranchError(std::string(to_string(eq.id)) + " is a center");
    }

    Orbit orbit = integrate(p, eq.frame, eq.location + eps * dir,
                            unstable ? Direction::Forward : Direction::Backward, opts);
    orbit.origin.eq = eq.id;
    orbit.origin.branch = branch;
    orbit.origin.epsilon = eps;
    if (unstable)
        orbit.source = canonical(eq.id);
    else
        orbit.target = canonical(eq.id);
    return orbit;
}

Orbit shoot_node(const ModelParams& p, const Equilibrium& eq, double fan_angle, std::optional<double> epsilon,
                 const IntegrateOptions& opts)
{
    if (eq.stability != Stability::UnstableNode && eq.stability != Stability::StableNode)
        throw InvalidBranchError(std::string(to_string(eq.id)) + " is not a node");
    const double eps = epsilon.value_or(default_epsilon(eq));
    // Weak direction: the eigenvalue of smaller modulus.
    const int weak = std::abs(eq.eigen.values[0]) < std::abs(eq.eigen.values[1]) ? 0 : 1;
    Vec2d w = real_unit(eq.eigen.vectors[weak]);
    if (w[0] < 0.0)
        w = -w;
    // Turn from the weak direction toward the circle at infinity on the side of fan_angle,
    // covering the fraction |fan_angle| / (pi/2) of the angular gap.
    const double quarter = 0.5 * std::numbers::pi;
    if (!(std::abs(fan_angle) < quarter))
        throw InvalidBranchError("fan angle must lie in (-pi/2, pi/2)");
    const double phi_w = std::atan2(w[1], w[0]);
    const double edge = fan_angle >= 0.0 ? quarter : -quarter;
    const double phi = phi_w + (std::abs(fan_angle) / quarter) * (edge - phi_w);
    const Vec2d dir(std::cos(phi), std::sin(phi));
    if (dir[0] < 1e-3)
        throw InvalidBranchError("fan direction is tangent to the circle at infinity");
    const bool unstable = eq.stability == Stability::UnstableNode;
    Orbit orbit = integrate(p, eq.frame, eq.location + eps * dir,
                            unstable ? Direction::Forward : Direction::Backward, opts);
    orbit.origin.eq = eq.id;
    orbit.origin.branch = unstable ? Branch::UnstablePlus : Branch::StablePlus;
    orbit.origin.epsilon = eps;
    orbit.origin.fan_angle = fan_angle;
    if (unstable)
        orbit.source = canonical(eq.id);
    else
        orbit.target = canonical(eq.id);
    return orbit;
}

Orbit orbit_through(const ModelParams& p, const PhasePoint& pt, const IntegrateOptions& opts)
{
    const Orbit back = integrate(p, Frame::Interior, pt, Direction::Backward, opts);
    const Orbit fwd = integrate(p, Frame::Interior, pt, Direction::Forward, opts);
    Orbit out;
    out.origin = fwd.origin;
    out.samples.assign(back.samples.rbegin(), back.samples.rend());
    out.samples.insert(out.samples.end(), fwd.samples.begin() + 1, fwd.samples.end());
    out.events.assign(back.events.rbegin(), back.events.rend());
    out.events.insert(out.events.end(), fwd.events.begin(), fwd.events.end());
    // A start on the u-axis is a crossing that neither half sees.
    if (pt[1] == 0.0) {
        const auto at = std::find_if(out.events.begin(), out.events.end(), [](const Event& e) { return e.time >= 0.0; });
        out.events.insert(at, Event{0.0, EventTag::HitUAxis, {}, {}});
    }
    out.source = back.source;
    out.target = fwd.target;
    out.mode = (back.mode == OrbitMode::TauTime && fwd.mode == OrbitMode::TauTime) ? OrbitMode::TauTime
                                                                                   : OrbitMode::STime;
    return out;
}

std::optional<PhasePoint> phase_point(const OrbitSample& s)
{
    if (s.frame == Frame::Interior)
        return s.y;
    if (s.y[0] == 0.0)
        return std::nullopt;
    return from_chart({chart_of(s.frame), s.y});
}

bool x_admissible(const Orbit& orbit, const ModelParams& p, double tol)
{
    const double floor = p.u_singular() - tol;
    for (const OrbitSample& s : orbit.samples) {
        if (auto pt = phase_point(s)) {
            if ((*pt)[0] < floor)
                return false;
        } else if (infinity_u_sign({chart_of(s.frame), s.y}) < 0) {
            return false;
        }
    }
    return true;
}

double h_magnitude(const ModelParams& p, const PhasePoint& pt)
{
    const double u = std::abs(pt[0]), v = pt[1];
    const double a = p.alpha(), m = p.mu(), D = p.D();
    return 0.5 * a * m * u * u * u * u + std::abs(m * (D - 2.0 * a)) / 3.0 * u * u * u + 0.5 * m * D * u * u +
           0.5 * v * v;
}

double h_drift(const Orbit& orbit, const ModelParams& p)
{
    double worst = 0.0;
    std::optional<double> h0;
    double scale = 0.0;
    for (const OrbitSample& s : orbit.samples) {
        if (s.frame != Frame::Interior) {
            h0.reset();
            continue;
        }
        const double h = conserved_H(p, s.y);
        if (!h0) {
            h0 = h;
            scale = 0.0;
        }
        scale = std::max(scale, h_magnitude(p, s.y));
        worst = std::max(worst, std::abs(h - *h0) / (1.0 + scale));
    }
    return worst;
}

namespace {

enum class Clock { X, Tau };

// Rate of the target clock per unit of the frame's own time. Linear in the state.
double clock_rate(const ModelParams& p, Clock clock, Frame frame, const Vec2d& y)
{
    if (clock == Clock::Tau)
        return frame == Frame::Interior ? 1.0 : y[0];
    const double D = p.D(), a2 = 2.0 * p.alpha();
    switch (frame) {
    case Frame::Interior: return D + a2 * y[0];
    case Frame::U1: return D * y[0] + a2;
    case Frame::V1: return D * y[0] - a2;
    case Frame::U2: return D * y[0] + a2 * y[1];
    case Frame::V2: return D * y[0] - a2 * y[1];
    }
    return 0.0;
}

// Samples in increasing physical time.
std::vector<OrbitSample> forward_samples(const Orbit& orbit)
{
    std::vector<OrbitSample> s = orbit.samples;
    if (s.size() >= 2 && s.front().time > s.back().time)
        std::reverse(s.begin(), s.end());
    return s;
}

// Rate of the l1 coordinate at an infinity node in the given chart.
double node_l1_rate(const ModelParams& p, Frame frame, bool stable)
{
    const double r = (frame == Frame::U1 || frame == Frame::V1) ? p.sqrt_alpha_mu()
                                                                 : p.alpha() * p.mu() * std::pow(p.M(), 3);
    return stable ? -r : r;
}

// Integral of a clock rate r = C exp(-|exponent| T) beyond the end of the samples, T being the
// frame time measured from the end inward. C comes from the last decade of the approach.
double tail_integral(const std::vector<double>& times, const std::vector<double>& rates, double exponent)
{
    const double r_end = rates.front();
    if (r_end <= 0.0)
        return 0.0;
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < times.size() && rates[i] <= 10.0 * r_end && rates[i] > 0.0; ++i) {
        sum += std::log(rates[i]) - std::abs(exponent) * times[i];
        ++n;
    }
    const double amp = n >= 3 ? std::exp(sum / static_cast<double>(n)) : r_end;
    return amp / std::abs(exponent);
}

Orbit reparameterize(const Orbit& orbit, const ModelParams& p, Clock clock)
{
    if (orbit.mode == OrbitMode::XTime)
        throw ReparameterizationError("orbit is already in x-time");
    if (clock == Clock::X && !x_admissible(orbit, p))
        throw ReparameterizationError("orbit crosses the singular line u = -D/(2 alpha); x-time reverses there");

    const std::vector<OrbitSample> fs = forward_samples(orbit);
    Orbit out;
    out.mode = clock == Clock::X ? OrbitMode::XTime : OrbitMode::TauTime;
    out.origin = orbit.origin;
    out.source = orbit.source;
    out.target = orbit.target;
    if (fs.empty())
        return out;

    std::vector<double> clk(fs.size(), 0.0);
    for (std::size_t i = 0; i + 1 < fs.size(); ++i) {
        const OrbitSample& a = fs[i];
        const OrbitSample& b = fs[i + 1];
        const Frame fr = std::abs(b.time) >= std::abs(a.time) ? b.frame : a.frame;
        const Vec2d ya = express_in(a.frame, a.y, fr);
        const Vec2d yb = express_in(b.frame, b.y, fr);
        const double dt = b.time - a.time;
        const Vec2d fa = frame_field(p, fr, ya), fb = frame_field(p, fr, yb);
        const Vec2d ym = 0.5 * (ya + yb) + dt * (fa - fb) / 8.0;
        const double inc =
            dt / 6.0 * (clock_rate(p, clock, fr, ya) + 4.0 * clock_rate(p, clock, fr, ym) + clock_rate(p, clock, fr, yb));
        clk[i + 1] = clk[i] + inc;
    }

    // Zero of the new clock at the launch point.
    std::size_t zero = 0;
    for (std::size_t i = 0; i < fs.size(); ++i)
        if (std::abs(fs[i].time) < std::abs(fs[zero].time))
            zero = i;
    const double shift = clk[zero];
    out.samples.reserve(fs.size());
    for (std::size_t i = 0; i < fs.size(); ++i)
        out.samples.push_back({clk[i] - shift, fs[i].frame, fs[i].y});

    // Ends. The clock converges at an end when its rate vanishes at the limit equilibrium.
    auto end_limit = [&](bool right) -> double {
        const std::optional<EquilibriumId> eq = right ? orbit.target : orbit.source;
        const double edge = right ? out.samples.back().time : out.samples.front().time;
        if (!eq)
            return edge;
        const double sign = right ? 1.0 : -1.0;
        const bool finite_end = clock == Clock::X ? *eq == EquilibriumId::E2 : !is_finite(*eq);
        if (!finite_end)
            return sign * kInf;
        // Frame time and rate, measured from the end inward.
        std::vector<double> times, rates;
        const std::size_t n = fs.size();
        const Frame end_frame = right ? fs[n - 1].frame : fs[0].frame;
        for (std::size_t k = 0; k < n; ++k) {
            const OrbitSample& s = right ? fs[n - 1 - k] : fs[k];
            if (s.frame != end_frame)
                break;
            times.push_back(std::abs(s.time - (right ? fs[n - 1].time : fs[0].time)));
            rates.push_back(std::abs(clock_rate(p, clock, s.frame, s.y)));
        }
        double exponent;
        if (clock == Clock::X)
            exponent = p.Lambda_minus(); // decay rate away from E2 in either time direction
        else
            exponent = node_l1_rate(p, end_frame, true);
        return edge + sign * tail_integral(times, rates, exponent);
    };
    out.domain_lo = end_limit(false);
    out.domain_hi = end_limit(true);

    // Events in the new clock: map each event time to the sample with the same original time.
    for (const Event& e : orbit.events) {
        Event m = e;
        auto it = std::min_element(fs.begin(), fs.end(), [&](const OrbitSample& a, const OrbitSample& b) {
            return std::abs(a.time - e.time) < std::abs(b.time - e.time);
        });
        m.time = out.samples[static_cast<std::size_t>(it - fs.begin())].time;
        out.events.push_back(m);
    }
    std::stable_sort(out.events.begin(), out.events.end(),
                     [](const Event& a, const Event& b) { return a.time < b.time; });
    return out;
}

} // namespace

Orbit reparameterize_to_x(const Orbit& orbit, const ModelParams& p) { return reparameterize(orbit, p, Clock::X); }

Orbit reparameterize_to_tau(const Orbit& orbit, const ModelParams& p)
{
    if (orbit.mode == OrbitMode::TauTime && !std::isnan(orbit.domain_lo))
        return orbit;
    return reparameterize(orbit, p, Clock::Tau);
}

AsymptoticFit fit_asymptotics(const Orbit& orbit, const FitWindow& window)
{
    if (orbit.mode == OrbitMode::STime)
        throw FitError("fit_asymptotics needs an orbit in x-time or tau-time");
    const std::size_t n = orbit.samples.size();
    const bool right = window.side == Side::Right;
    const double endpoint = right ? orbit.domain_hi : orbit.domain_lo;
    if ((window.form == FitForm::LinearHit || window.form == FitForm::PowerBlowup) && !std::isfinite(endpoint))
        throw FitError("the " + std::string(to_string(window.side)) + " end of the domain is not finite");

    std::vector<double> xs, ys;
    bool entered = false;
    for (std::size_t k = 0; k < n; ++k) {
        const OrbitSample& s = orbit.samples[right ? n - 1 - k : k];
        const auto pt = phase_point(s);
        if (!pt)
            continue;
        const double u = (*pt)[0];
        bool inside = false;
        double x = s.time, y = 0.0;
        switch (window.form) {
        case FitForm::ExpGrowth:
            inside = u > window.growth_floor;
            if (inside)
                y = std::log(u);
            break;
        case FitForm::ExpDecayToLevel:
            inside = std::abs(u - window.level) < window.band && u != window.level;
            if (inside)
                y = std::log(std::abs(u - window.level));
            break;
        case FitForm::LinearHit:
            inside = std::abs(u - window.level) < window.band;
            y = u;
            break;
        case FitForm::PowerBlowup: {
            const double gap = right ? endpoint - s.time : s.time - endpoint;
            inside = u > window.growth_floor && gap > 0.0;
            if (inside) {
                x = std::log(gap);
                y = std::log(u);
            }
            break;
        }
        }
        if (!inside) {
            if (entered)
                break;
            continue;
        }
        entered = true;
        xs.push_back(x);
        ys.push_back(y);
    }
    if (xs.size() < window.min_samples)
        throw FitError("fit window holds " + std::to_string(xs.size()) + " samples, need " +
                       std::to_string(window.min_samples));

    const Eigen::Index m = static_cast<Eigen::Index>(xs.size());
    Eigen::MatrixXd A(m, 2);
    Eigen::VectorXd b(m);
    const double x0 = xs.front(); // centre for conditioning
    for (Eigen::Index i = 0; i < m; ++i) {
        A(i, 0) = 1.0;
        A(i, 1) = xs[static_cast<std::size_t>(i)] - x0;
        b(i) = ys[static_cast<std::size_t>(i)];
    }
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    if (qr.rank() < 2)
        throw FitError("degenerate fit window");
    const Eigen::Vector2d c = qr.solve(b);
    const double slope = c[1];
    const double intercept = c[0] - slope * x0;

    AsymptoticFit fit;
    fit.form = window.form;
    fit.rate = slope;
    fit.residual = std::sqrt((A * c - b).squaredNorm() / static_cast<double>(m));
    fit.samples = xs.size();
    fit.level = window.level;
    switch (window.form) {
    case FitForm::ExpGrowth:
    case FitForm::ExpDecayToLevel:
    case FitForm::PowerBlowup: fit.amplitude = std::exp(intercept); break;
    case FitForm::LinearHit:
        fit.amplitude = std::abs(slope);
        fit.level = intercept + slope * endpoint;
        break;
    }
    if (window.form == FitForm::LinearHit || window.form == FitForm::PowerBlowup)
        fit.endpoint = endpoint;
    return fit;
}

PeriodResult detect_period(const ModelParams& p, double u0, const IntegrateOptions& opts)
{
    if (!(u0 > 0.0 && u0 < 1.0))
        throw ParameterDomainError("detect_period needs u0 in (0, 1)");
    IntegrateOptions o = opts;
    o.stop_on_closed_loop = true;
    PeriodResult res;
    res.orbit = integrate(p, Frame::Interior, Vec2d(u0, 0.0), Direction::Forward, o);
    const Event* last = res.orbit.terminal();
    if (!last || last->tag != EventTag::ClosedLoop) {
        std::string why = last ? std::string(to_string(last->tag)) : "no event";
        if (last && last->eq)
            why += " " + std::string(to_string(*last->eq));
        throw NonPeriodicError("orbit through (" + std::to_string(u0) + ", 0) is not periodic: " + why);
    }
    res.period = last->time;
    return res;
}

Orbit mirror_orbit(const Orbit& orbit)
{
    Orbit out;
    out.mode = orbit.mode;
    out.origin = orbit.origin;
    if (orbit.origin.eq)
        out.origin.eq = reversal_image(*orbit.origin.eq);
    if (orbit.origin.branch) {
        switch (*orbit.origin.branch) {
        case Branch::UnstablePlus: out.origin.branch = Branch::StablePlus; break;
        case Branch::UnstableMinus: out.origin.branch = Branch::StableMinus; break;
        case Branch::StablePlus: out.origin.branch = Branch::UnstablePlus; break;
        case Branch::StableMinus: out.origin.branch = Branch::UnstableMinus; break;
        }
    }
    out.origin.direction =
        orbit.origin.direction == Direction::Forward ? Direction::Backward : Direction::Forward;
    out.origin.start = symmetry_apply(Symmetry::Reversal, orbit.origin.start);
    if (orbit.target)
        out.source = reversal_image(*orbit.target);
    if (orbit.source)
        out.target = reversal_image(*orbit.source);
    out.domain_lo = -orbit.domain_hi;
    out.domain_hi = -orbit.domain_lo;

    auto mirror_frame = [](Frame f) {
        if (f == Frame::U2)
            return Frame::V2;
        if (f == Frame::V2)
            return Frame::U2;
        return f;
    };
    for (auto it = orbit.samples.rbegin(); it != orbit.samples.rend(); ++it) {
        OrbitSample s = *it;
        s.time = -s.time;
        if (s.frame == Frame::Interior) {
            s.y = symmetry_apply(Symmetry::Reversal, s.y);
        } else {
            const ChartPoint cp = reversal_in_chart({chart_of(s.frame), s.y});
            s.frame = frame_of(cp.chart);
            s.y = cp.lambda;
        }
        out.samples.push_back(s);
    }
    for (auto it = orbit.events.rbegin(); it != orbit.events.rend(); ++it) {
        Event e = *it;
        e.time = -e.time;
        if (e.eq)
            e.eq = reversal_image(*e.eq);
        if (e.chart)
            e.chart = chart_of(mirror_frame(frame_of(*e.chart)));
        out.events.push_back(e);
    }
    return out;
}

double saddle_x_extent(const ModelParams& p, const Equilibrium& eq, Branch branch, double epsilon, double reach)
{
    if (eq.stability != Stability::Saddle || eq.frame != Frame::Interior)
        throw InvalidBranchError("saddle_x_extent needs a finite saddle");
    const bool unstable = is_unstable(branch);
    const bool plus = branch == Branch::UnstablePlus || branch == Branch::StablePlus;
    Vec2d dir = real_unit(eq.eigen.vectors[unstable ? 0 : 1]);
    if (dir[0] < 0.0)
        dir = -dir;
    if (!plus)
        dir = -dir;

    // Taylor coefficients of v' = -mu u (1 - u)(D + 2 alpha u) at u = e (exact, cubic).
    const double D = p.D(), a = p.alpha(), m = p.mu(), e = eq.location[0];
    const double c1 = -m * D - 2.0 * m * (2.0 * a - D) * e + 6.0 * a * m * e * e;
    const double c2 = -m * (2.0 * a - D) + 6.0 * a * m * e;
    const double c3 = 2.0 * a * m;
    const double base = D + 2.0 * a * e; // exactly zero at E2 when computed this way
    const double sgn = unstable ? 1.0 : -1.0;
    auto f = [&](const Vec2d& w) -> Vec2d { return sgn * Vec2d(w[1], w[0] * (c1 + w[0] * (c2 + w[0] * c3))); };
    auto rate = [&](const Vec2d& w) { return eq.id == EquilibriumId::E2 ? 2.0 * a * w[0] : base + 2.0 * a * w[0]; };

    StepControl ctl;
    ctl.atol = 1e-300;
    ctl.max_step = 0.1;
    Vec2d w = epsilon * dir;
    Vec2d fw = f(w);
    double h = initial_step(f, w, fw, ctl);
    PIController pi;
    double x = 0.0;
    // Near the saddle |w| grows like exp(Lambda s); cap the step so the last one lands on reach.
    const double Lambda = std::abs(eq.eigen.values[unstable ? 0 : 1].real());
    for (long n = 0;; ++n) {
        const double left = std::log(reach / w.norm());
        if (left <= 1e-12)
            break;
        if (n > 1000000)
            throw IntegrationError("saddle_x_extent: step limit exceeded");
        h = std::min(h, left / Lambda);
        const auto step = dopri5_step(f, w, fw, h);
        const double err = scaled_error(step.error, w, step.y, ctl);
        if (!std::isfinite(err) || err > 1.0) {
            h *= PIController::min_factor;
            if (h < ctl.min_step)
                throw IntegrationError("saddle_x_extent: step size underflow");
            continue;
        }
        const Vec2d wm = 0.5 * (w + step.y) + h * (fw - step.f_end) / 8.0;
        x += h / 6.0 * (rate(w) + 4.0 * rate(wm) + rate(step.y));
        w = step.y;
        fw = step.f_end;
        h = std::min(h * pi.factor(err), ctl.max_step);
        pi.accept(err);
    }
    return std::abs(x);
}

} // namespace sdp
