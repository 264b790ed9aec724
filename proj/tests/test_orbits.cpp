#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "oracle.hpp"
#include "sdp/orbits.hpp"

using namespace sdp;
using doctest::Approx;

namespace {

const ModelParams P_sub = make_params(1, 1, 1);
const ModelParams P_crit = make_params(2, 1, 1);
const ModelParams P_super = make_params(4, 1, 1);

Equilibrium eq(const ModelParams& p, EquilibriumId id) { return equilibrium(p, id); }

bool increasing(const Orbit& o)
{
    for (std::size_t i = 1; i < o.samples.size(); ++i)
        if (!(o.samples[i].time > o.samples[i - 1].time))
            return false;
    return true;
}

} // namespace

TEST_CASE("integrate stops on a closed loop around E0")
{
    IntegrateOptions opts;
    opts.stop_on_closed_loop = true;
    const Orbit o = integrate(P_sub, Frame::Interior, Vec2d(0.2, 0.0), Direction::Forward, opts);
    REQUIRE(o.terminal() != nullptr);
    CHECK(o.terminal()->tag == EventTag::ClosedLoop);
    CHECK(o.count(EventTag::HitUAxis) >= 1);
    CHECK((o.samples.back().y - o.samples.front().y).norm() < 1e-9);
    CHECK(h_drift(o, P_sub) < 1e-10);
}

TEST_CASE("integrate honours the horizon and the step limit")
{
    IntegrateOptions opts;
    opts.horizon = 1.5;
    const Orbit h = integrate(P_sub, Frame::Interior, Vec2d(0.2, 0.0), Direction::Forward, opts);
    CHECK(h.terminal()->tag == EventTag::Horizon);
    CHECK(h.samples.back().time == Approx(1.5).epsilon(1e-12));

    IntegrateOptions few;
    few.step_limit = 3;
    const Orbit s = integrate(P_sub, Frame::Interior, Vec2d(0.2, 0.0), Direction::Forward, few);
    CHECK(s.terminal()->tag == EventTag::StepLimit);

    IntegrateOptions back;
    back.horizon = 1.0;
    const Orbit b = integrate(P_sub, Frame::Interior, Vec2d(0.2, 0.0), Direction::Backward, back);
    CHECK(b.samples.back().time == Approx(-1.0).epsilon(1e-12));
    for (std::size_t i = 1; i < b.samples.size(); ++i)
        CHECK(b.samples[i].time < b.samples[i - 1].time);
}

TEST_CASE("integrated samples match an RK4 reference")
{
    IntegrateOptions opts;
    opts.horizon = 3.0;
    const Orbit o = integrate(P_sub, Frame::Interior, Vec2d(0.25, -0.1), Direction::Forward, opts);
    const oracle::Field g = [](const oracle::V2& y) { return oracle::tau_field(1, 1, 1, y); };
    for (std::size_t i = 0; i < o.samples.size(); i += 7) {
        const OrbitSample& s = o.samples[i];
        if (s.time == 0.0)
            continue;
        const oracle::V2 r = oracle::rk4(g, {0.25, -0.1}, s.time, 1e-3);
        CHECK(std::abs(s.y[0] - r[0]) < 1e-8);
        CHECK(std::abs(s.y[1] - r[1]) < 1e-8);
    }
}

TEST_CASE("E2 unstable branch closes into a homoclinic loop below the critical ratio")
{
    const Orbit o = shoot_saddle(P_sub, eq(P_sub, EquilibriumId::E2), Branch::UnstablePlus);
    CHECK(o.source == EquilibriumId::E2);
    CHECK(o.target == EquilibriumId::E2);
    CHECK(o.count(EventTag::HitUAxis) == 1);
    CHECK(o.terminal()->tag == EventTag::ReachedEquilibrium);
    CHECK(h_drift(o, P_sub) <= 1e-8);
    CHECK(x_admissible(o, P_sub));
}

TEST_CASE("E1 branches at the reference parameters")
{
    const Orbit up = shoot_saddle(P_sub, eq(P_sub, EquilibriumId::E1), Branch::UnstablePlus);
    CHECK(up.source == EquilibriumId::E1);
    CHECK(up.target == EquilibriumId::E4);
    CHECK(up.count(EventTag::EnteredChart) >= 1);
    CHECK(h_drift(up, P_sub) <= 1e-8);

    const Orbit down = shoot_saddle(P_sub, eq(P_sub, EquilibriumId::E1), Branch::UnstableMinus);
    REQUIRE(down.target.has_value());
    CHECK((canonical(*down.target) == EquilibriumId::E5 || canonical(*down.target) == EquilibriumId::E6));
    CHECK_FALSE(x_admissible(down, P_sub));
    CHECK_THROWS_AS(reparameterize_to_x(down, P_sub), ReparameterizationError);

    const Orbit in = shoot_saddle(P_sub, eq(P_sub, EquilibriumId::E1), Branch::StablePlus);
    CHECK(in.source == EquilibriumId::E3);
    CHECK(in.target == EquilibriumId::E1);
}

TEST_CASE("heteroclinic loop at the critical ratio")
{
    const Orbit a = shoot_saddle(P_crit, eq(P_crit, EquilibriumId::E1), Branch::UnstableMinus);
    CHECK(a.source == EquilibriumId::E1);
    CHECK(a.target == EquilibriumId::E2);
    const Orbit b = shoot_saddle(P_crit, eq(P_crit, EquilibriumId::E2), Branch::UnstablePlus);
    CHECK(b.source == EquilibriumId::E2);
    CHECK(b.target == EquilibriumId::E1);
}

TEST_CASE("E1 homoclinic above the critical ratio")
{
    const Orbit o = shoot_saddle(P_super, eq(P_super, EquilibriumId::E1), Branch::UnstableMinus);
    CHECK(o.source == EquilibriumId::E1);
    CHECK(o.target == EquilibriumId::E1);
    CHECK(h_drift(o, P_super) <= 1e-8);
}

TEST_CASE("branch validation")
{
    CHECK_THROWS_AS(shoot_saddle(P_sub, eq(P_sub, EquilibriumId::E0), Branch::UnstablePlus), InvalidBranchError);
    CHECK_THROWS_AS(shoot_saddle(P_sub, eq(P_sub, EquilibriumId::E3), Branch::StablePlus), InvalidBranchError);
    CHECK_THROWS_AS(shoot_saddle(P_sub, eq(P_sub, EquilibriumId::E3), Branch::UnstableMinus), InvalidBranchError);
    CHECK_THROWS_AS(shoot_node(P_sub, eq(P_sub, EquilibriumId::E1), 0.0), InvalidBranchError);
    CHECK_THROWS_AS(shoot_node(P_sub, eq(P_sub, EquilibriumId::E3), 2.0), InvalidBranchError);
    CHECK_THROWS_AS(branch_from_string("Sideways"), InvalidBranchError);
}

TEST_CASE("node fans leave on opposite sides of the weak direction")
{
    const Equilibrium e3 = eq(P_super, EquilibriumId::E3);
    const Orbit a = shoot_node(P_super, e3, 0.5);
    const Orbit b = shoot_node(P_super, e3, -0.5);
    CHECK(a.source == EquilibriumId::E3);
    const Vec2d da = a.origin.start - e3.location, db = b.origin.start - e3.location;
    const Vec2d w(e3.eigen.vectors[1][0].real(), e3.eigen.vectors[1][1].real()); // weak: |1| < |4|
    const double ca = w[0] * da[1] - w[1] * da[0], cb = w[0] * db[1] - w[1] * db[0];
    CHECK(ca * cb < 0.0);
    CHECK(da[0] > 0.0);
    CHECK(db[0] > 0.0);
}

TEST_CASE("orbit through (3, 0) runs from E3 to E4 with one crossing")
{
    const Orbit o = orbit_through(P_sub, Vec2d(3, 0));
    CHECK(o.source == EquilibriumId::E3);
    CHECK(o.target == EquilibriumId::E4);
    CHECK(o.count(EventTag::HitUAxis) == 1);
}

TEST_CASE("x reparameterization")
{
    const Orbit qs = reparameterize_to_x(shoot_saddle(P_sub, eq(P_sub, EquilibriumId::E2), Branch::UnstablePlus), P_sub);
    CHECK(qs.mode == OrbitMode::XTime);
    CHECK(increasing(qs));
    CHECK(std::isfinite(qs.domain_lo));
    CHECK(std::isfinite(qs.domain_hi));
    CHECK(qs.domain_lo <= qs.samples.front().time);
    CHECK(qs.domain_hi >= qs.samples.back().time);

    const Orbit up = reparameterize_to_x(shoot_saddle(P_sub, eq(P_sub, EquilibriumId::E1), Branch::UnstablePlus), P_sub);
    CHECK(increasing(up));
    CHECK(up.domain_lo == -std::numeric_limits<double>::infinity());
    CHECK(up.domain_hi == std::numeric_limits<double>::infinity());

    // Cross-check dx = (D + 2 alpha u) dtau on the interior part of the E2 loop by the trapezoid rule.
    const Orbit raw = shoot_saddle(P_sub, eq(P_sub, EquilibriumId::E2), Branch::UnstablePlus);
    double x = 0.0;
    for (std::size_t i = 1; i < raw.samples.size(); ++i) {
        const auto& a = raw.samples[i - 1];
        const auto& b = raw.samples[i];
        x += 0.5 * (b.time - a.time) * (time_rescale_factor(P_sub, a.y[0]) + time_rescale_factor(P_sub, b.y[0]));
    }
    CHECK(x == Approx(qs.samples.back().time - qs.samples.front().time).epsilon(1e-4));
}

TEST_CASE("tau reparameterization gives a finite blow-up time")
{
    const Orbit up = shoot_saddle(P_sub, eq(P_sub, EquilibriumId::E1), Branch::UnstablePlus);
    const Orbit t = reparameterize_to_tau(up, P_sub);
    CHECK(t.mode == OrbitMode::TauTime);
    CHECK(increasing(t));
    CHECK(t.domain_lo == -std::numeric_limits<double>::infinity());
    CHECK(std::isfinite(t.domain_hi));
    CHECK(t.domain_hi > t.samples.back().time);
}

TEST_CASE("asymptotic fits at the reference parameters")
{
    const double a = P_sub.alpha(), D = P_sub.D();
    const Orbit up = reparameterize_to_x(shoot_saddle(P_sub, eq(P_sub, EquilibriumId::E1), Branch::UnstablePlus), P_sub);
    const AsymptoticFit g = fit_asymptotics(up, {FitForm::ExpGrowth, Side::Right});
    CHECK(g.rate == Approx(std::sqrt(a * P_sub.mu()) / (2 * a)).epsilon(0.02));
    const AsymptoticFit d = fit_asymptotics(up, {FitForm::ExpDecayToLevel, Side::Left, 1.0});
    CHECK(d.rate == Approx(P_sub.omega_plus() / (2 * a + D)).epsilon(0.02));

    const Orbit in = reparameterize_to_x(shoot_saddle(P_sub, eq(P_sub, EquilibriumId::E1), Branch::StablePlus), P_sub);
    const AsymptoticFit r = fit_asymptotics(in, {FitForm::ExpDecayToLevel, Side::Right, 1.0});
    CHECK(r.rate == Approx(P_sub.omega_minus() / (2 * a + D)).epsilon(0.02));

    const Orbit qs = reparameterize_to_x(shoot_saddle(P_sub, eq(P_sub, EquilibriumId::E2), Branch::UnstablePlus), P_sub);
    FitWindow lw{FitForm::LinearHit, Side::Right, P_sub.u_singular(), 0.01};
    const AsymptoticFit l = fit_asymptotics(qs, lw);
    CHECK(std::abs(l.level - P_sub.u_singular()) < 1e-3);
    CHECK(l.endpoint == qs.domain_hi);

    const Orbit tau = reparameterize_to_tau(shoot_saddle(P_sub, eq(P_sub, EquilibriumId::E1), Branch::UnstablePlus), P_sub);
    const AsymptoticFit pw = fit_asymptotics(tau, {FitForm::PowerBlowup, Side::Right});
    CHECK(pw.rate == Approx(-1.0).epsilon(0.02));
}

TEST_CASE("fit errors")
{
    const Orbit up = reparameterize_to_x(shoot_saddle(P_sub, eq(P_sub, EquilibriumId::E1), Branch::UnstablePlus), P_sub);
    FitWindow big{FitForm::ExpGrowth, Side::Right};
    big.min_samples = 1000000;
    CHECK_THROWS_AS(fit_asymptotics(up, big), FitError);
    CHECK_THROWS_AS(fit_asymptotics(up, {FitForm::LinearHit, Side::Right, 0.0}), FitError);
    const Orbit raw = shoot_saddle(P_sub, eq(P_sub, EquilibriumId::E1), Branch::UnstablePlus);
    Orbit s = raw;
    s.mode = OrbitMode::STime;
    CHECK_THROWS_AS(fit_asymptotics(s, {FitForm::ExpGrowth, Side::Right}), FitError);
}

TEST_CASE("small-amplitude period")
{
    const PeriodResult r = detect_period(P_sub, 0.01);
    const double T0 = 2 * std::numbers::pi / std::sqrt(P_sub.mu() * P_sub.D());
    CHECK(r.period == Approx(T0).epsilon(0.01));
    // RK4 over one period returns to the start.
    const oracle::Field g = [](const oracle::V2& y) { return oracle::tau_field(1, 1, 1, y); };
    const oracle::V2 back = oracle::rk4(g, {0.01, 0.0}, r.period, 1e-3);
    CHECK(std::abs(back[0] - 0.01) < 1e-9);
    CHECK(std::abs(back[1]) < 1e-9);
}

TEST_CASE("period errors")
{
    CHECK_THROWS_AS(detect_period(P_sub, 0.0), ParameterDomainError);
    CHECK_THROWS_AS(detect_period(P_sub, 1.0), ParameterDomainError);
    CHECK_THROWS_AS(detect_period(P_sub, 0.999), NonPeriodicError); // outside the E2 loop
}

TEST_CASE("periods grow toward the E1 homoclinic above the critical ratio")
{
    double last = 0.0;
    for (double u0 : {0.3, 0.9, 0.999}) {
        const double T = detect_period(P_super, u0).period;
        CHECK(T > last);
        last = T;
    }
}

TEST_CASE("mirror_orbit applies the reversal")
{
    const Orbit o = shoot_saddle(P_sub, eq(P_sub, EquilibriumId::E1), Branch::UnstablePlus);
    const Orbit m = mirror_orbit(o);
    CHECK(m.source == reversal_image(*o.target));
    CHECK(m.target == reversal_image(*o.source));
    REQUIRE(m.samples.size() == o.samples.size());
    const OrbitSample& first = o.samples.front();
    const OrbitSample& last = m.samples.back();
    CHECK(last.time == -first.time);
    CHECK(last.y[0] == first.y[0]);
    CHECK(last.y[1] == -first.y[1]);
    // The mirror is the stable branch of E1 coming from E3.
    CHECK(m.source == EquilibriumId::E3);
    CHECK(m.target == EquilibriumId::E1);
}

TEST_CASE("x-length of saddle approaches")
{
    const Equilibrium e1 = eq(P_sub, EquilibriumId::E1), e2 = eq(P_sub, EquilibriumId::E2);
    // Near E1 dx/dtau -> D + 2 alpha, so the length is log(reach / eps) divided by the x-rate.
    const double rate = P_sub.omega_plus() / (P_sub.D() + 2 * P_sub.alpha());
    const double L = saddle_x_extent(P_sub, e1, Branch::UnstablePlus, 1e-300);
    CHECK(L > 1e3);
    CHECK(L == Approx(std::log(0.1 / 1e-300) / rate).epsilon(0.01));
    // Near E2 dx/dtau vanishes and the length converges.
    const double a = saddle_x_extent(P_sub, e2, Branch::UnstablePlus, 1e-8);
    const double b = saddle_x_extent(P_sub, e2, Branch::UnstablePlus, 1e-300);
    CHECK(b < 1.0);
    CHECK(std::abs(a - b) < 1e-7); // the first eps of the branch adds about 2 alpha eps / Lambda
}

TEST_CASE("h_magnitude is the sum of the term sizes")
{
    CHECK(h_magnitude(P_sub, Vec2d(1, 2)) == Approx(0.5 + 0.0 + 0.5 + 2.0 + 1.0 / 3.0 * 1.0));
    CHECK(h_magnitude(P_sub, Vec2d(0, 0)) == 0.0);
}
