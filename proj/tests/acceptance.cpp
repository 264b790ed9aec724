// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "oracle.hpp"
#include "sdp/classify.hpp"

using namespace sdp;

namespace {

const ModelParams P_sub = make_params(1, 1, 1);
const ModelParams P_crit = make_params(2, 1, 1);
const ModelParams P_super = make_params(4, 1, 1);

struct Verdict {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what)
    {
        if (!ok) {
            pass = false;
            if (detail.size() < 400)
                detail += (detail.empty() ? "" : "; ") + what;
        }
    }
};

std::string num(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", x);
    return buf;
}

// Eigenvalues written out by hand for each equilibrium.
std::array<std::complex<double>, 2> closed_form(const ModelParams& p, EquilibriumId id)
{
    const double D = p.D(), a = p.alpha(), m = p.mu();
    const double r = std::sqrt(a * m);
    const double M = std::pow(a * m, -0.25);
    const double w = std::sqrt(m * (D + 2 * a));
    const double L = std::sqrt(m * D * (1 + D / (2 * a)));
    const double q = a * m * M * M * M;
    using C = std::complex<double>;
    switch (id) {
    case EquilibriumId::E0: return {C(0, std::sqrt(m * D)), C(0, -std::sqrt(m * D))};
    case EquilibriumId::E1: return {C(w), C(-w)};
    case EquilibriumId::E2: return {C(L), C(-L)};
    case EquilibriumId::E3:
    case EquilibriumId::E5: return {C(r), C(4 * r)};
    case EquilibriumId::E4:
    case EquilibriumId::E6: return {C(-r), C(-4 * r)};
    case EquilibriumId::E7:
    case EquilibriumId::E9: return {C(q), C(4 * q)};
    case EquilibriumId::E8:
    case EquilibriumId::E10: return {C(-q), C(-4 * q)};
    }
    return {};
}

double pair_distance(const std::array<std::complex<double>, 2>& a, const std::array<std::complex<double>, 2>& b)
{
    return std::min(std::max(std::abs(a[0] - b[0]), std::abs(a[1] - b[1])),
                    std::max(std::abs(a[0] - b[1]), std::abs(a[1] - b[0])));
}

Verdict criterion_1()
{
    Verdict v;
    std::mt19937_64 rng(101);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        const ModelParams p = make_params(oracle::log_uniform(rng, 0.1, 10), oracle::log_uniform(rng, 0.1, 10),
                                          oracle::log_uniform(rng, 0.1, 10));
        for (const Equilibrium& eq : all_equilibria(p)) {
            auto f = [&](const Vec2d& y) { return frame_field(p, eq.frame, y); };
            const EigenPairs e = eigen2(numerical_jacobian(f, eq.location));
            const double d = pair_distance({e.values[0], e.values[1]}, closed_form(p, eq.id));
            worst = std::max(worst, d);
            v.require(d <= 1e-6, std::string(to_string(eq.id)) + " off by " + num(d));
        }
    }
    v.detail = "50 triples x 11 equilibria, worst abs error " + num(worst) + (v.detail.empty() ? "" : "; " + v.detail);
    return v;
}

// Slope of log|residual_v| against log R with the residual computed from the oracle field.
double oracle_slope(const ModelParams& p, double u, double w)
{
    std::vector<double> xs, ys;
    for (double R : {1e1, 1e2, 1e3, 1e4}) {
        const oracle::V2 f = oracle::tau_field(p.D(), p.alpha(), p.mu(), {R * u, R * R * w});
        const double res = (f[1] - R * R * R * 2 * p.alpha() * p.mu() * u * u * u) / (R * R * R);
        xs.push_back(std::log(R));
        ys.push_back(std::log(std::abs(res)));
    }
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Verdict criterion_2()
{
    Verdict v;
    for (const ModelParams& p : {P_sub, P_super}) {
        const QuasiHomogeneityReport r = quasi_homogeneity_check(p, Vec2d(1, 1), {1e1, 1e2, 1e3, 1e4});
        const double s = r.decay_slope(1), o = oracle_slope(p, 1, 1);
        v.detail += (v.detail.empty() ? "" : ", ") + std::string("slope(D=") + num(p.D()) + ") " + num(s);
        v.require(std::abs(s + 1.0) <= 0.1, "slope " + num(s));
        v.require(std::abs(s - o) <= 1e-6, "oracle slope " + num(o));
        v.require(r.certified, "not certified");
    }
    return v;
}

std::vector<ModelParams> grid(std::mt19937_64& rng, Regime regime, int n)
{
    std::uniform_real_distribution<double> below(0.2, 0.9), above(1.1, 3.0);
    std::vector<ModelParams> out;
    for (int i = 0; i < n; ++i) {
        const double a = oracle::log_uniform(rng, 0.2, 5), m = oracle::log_uniform(rng, 0.2, 5);
        const double ratio = regime == Regime::Sub ? below(rng) : regime == Regime::Super ? above(rng) : 1.0;
        out.push_back(make_params(ratio * 2 * a, a, m));
    }
    return out;
}

std::vector<ModelParams> criterion_4_params()
{
    std::mt19937_64 rng(104);
    std::vector<ModelParams> ps{P_sub, P_crit, P_super};
    for (Regime r : {Regime::Sub, Regime::Critical, Regime::Super})
        for (const ModelParams& p : grid(rng, r, 20))
            ps.push_back(p);
    return ps;
}

std::string describe(const ModelParams& p)
{
    return "(" + num(p.D()) + ", " + num(p.alpha()) + ", " + num(p.mu()) + ")";
}

Verdict criterion_3(const std::vector<ModelParams>& ps)
{
    Verdict v;
    double worst = 0.0;
    std::size_t n = 0;
    for (const ModelParams& p : ps) {
        const ConnectionGraph g = connection_graph(p);
        for (std::size_t i = 0; i < g.orbits.size(); ++i) {
            const double d = h_drift(g.orbits[i], p);
            worst = std::max(worst, d);
            ++n;
            v.require(d <= 1e-8, describe(p) + " " + g.launches[i] + " drift " + num(d));
        }
        if (g.periodic_family) {
            const double d = h_drift(detect_period(p, g.probe_u0).orbit, p);
            worst = std::max(worst, d);
            ++n;
            v.require(d <= 1e-8, describe(p) + " periodic drift " + num(d));
        }
    }
    v.detail = std::to_string(n) + " orbits, worst drift " + num(worst) + (v.detail.empty() ? "" : "; " + v.detail);
    return v;
}

struct Classification {
    bool match;
    std::vector<std::string> found;
};

std::array<Classification, 2> classify_both(const ModelParams& p, std::optional<double> eps)
{
    GraphOptions opts;
    opts.epsilon = eps;
    const ConnectionGraph g = connection_graph(p, opts);
    const RegimeReport x = regime_report(p, ClassifyMode::XMode, g);
    const RegimeReport t = regime_report(p, ClassifyMode::TauMode, g);
    return {Classification{x.match, x.found}, Classification{t.match, t.found}};
}

Verdict criterion_4(const std::vector<ModelParams>& ps, std::vector<std::array<Classification, 2>>& out)
{
    Verdict v;
    int matched = 0;
    for (const ModelParams& p : ps) {
        out.push_back(classify_both(p, std::nullopt));
        const bool ok = out.back()[0].match && out.back()[1].match;
        matched += ok;
        v.require(ok, describe(p) + " does not match");
    }
    v.detail = std::to_string(matched) + "/" + std::to_string(ps.size()) + " parameter sets match in x and tau modes" +
               (v.detail.empty() ? "" : "; " + v.detail);
    return v;
}

Verdict criterion_5()
{
    Verdict v;
    std::mt19937_64 rng(105);
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
        const double a = oracle::log_uniform(rng, 0.1, 10), m = oracle::log_uniform(rng, 0.1, 10);
        const ScanResult s = bifurcation_scan(a, m, 0.2 * a, 8 * a);
        const double rel = std::abs(s.D_star - 2 * a) / (2 * a);
        worst = std::max(worst, rel);
        v.require(rel <= 1e-9, "alpha " + num(a) + " D* off by " + num(rel));
        v.require(s.cross_checked, "alpha " + num(a) + " mu " + num(m) + " topology does not flip");
    }
    v.detail = "10 scans, worst relative error " + num(worst) + (v.detail.empty() ? "" : "; " + v.detail);
    return v;
}

Orbit x_orbit(const ModelParams& p, EquilibriumId id, Branch b, const IntegrateOptions& opts = {})
{
    return reparameterize_to_x(shoot_saddle(p, equilibrium(p, id), b, std::nullopt, opts), p);
}

Verdict criterion_6()
{
    Verdict v;
    auto rate = [&](const std::string& name, double got, double want) {
        const double rel = std::abs(got - want) / std::abs(want);
        v.detail += (v.detail.empty() ? "" : ", ") + name + " " + num(rel);
        v.require(rel <= 0.02, name + " off");
    };
    const double a = P_sub.alpha(), D = P_sub.D(), m = P_sub.mu();
    const double omega = std::sqrt(m * (D + 2 * a));
    const Orbit up = x_orbit(P_sub, EquilibriumId::E1, Branch::UnstablePlus);
    rate("growth", fit_asymptotics(up, {FitForm::ExpGrowth, Side::Right}).rate, std::sqrt(a * m) / (2 * a));
    rate("decay+", fit_asymptotics(up, {FitForm::ExpDecayToLevel, Side::Left, 1.0}).rate, omega / (2 * a + D));
    const Orbit in = x_orbit(P_sub, EquilibriumId::E1, Branch::StablePlus);
    rate("decay-", fit_asymptotics(in, {FitForm::ExpDecayToLevel, Side::Right, 1.0}).rate, -omega / (2 * a + D));

    auto level = [&](const std::string& name, const Orbit& o, Side side, const ModelParams& p) {
        const double s = -p.D() / (2 * p.alpha());
        const double got = fit_asymptotics(o, {FitForm::LinearHit, side, s, 0.01}).level;
        v.detail += ", " + name + " level err " + num(std::abs(got - s));
        v.require(std::abs(got - s) <= 1e-3, name + " level off");
    };
    const Orbit qs = x_orbit(P_sub, EquilibriumId::E2, Branch::UnstablePlus);
    level("sub right", qs, Side::Right, P_sub);
    level("sub left", qs, Side::Left, P_sub);
    level("crit", x_orbit(P_crit, EquilibriumId::E1, Branch::UnstableMinus), Side::Right, P_crit);

    const Orbit tau =
        reparameterize_to_tau(shoot_saddle(P_sub, equilibrium(P_sub, EquilibriumId::E1), Branch::UnstablePlus), P_sub);
    rate("power", fit_asymptotics(tau, {FitForm::PowerBlowup, Side::Right}).rate, -1.0);
    return v;
}

Verdict criterion_7()
{
    Verdict v;
    IntegrateOptions fine;
    fine.control.rtol *= 0.1;
    fine.control.atol *= 0.1;
    for (const ModelParams& p : {P_sub, P_crit}) {
        const EquilibriumId id = p.D() < 2 * p.alpha() ? EquilibriumId::E2 : EquilibriumId::E1;
        const Branch b = id == EquilibriumId::E2 ? Branch::UnstablePlus : Branch::UnstableMinus;
        const Orbit a = x_orbit(p, id, b), c = x_orbit(p, id, b, fine);
        if (id == EquilibriumId::E2) {
            const double La = a.domain_hi - a.domain_lo, Lc = c.domain_hi - c.domain_lo;
            const double change = std::abs(La - Lc) / Lc;
            v.detail += "qs length " + num(La) + " (change " + num(change) + ")";
            v.require(std::isfinite(La) && change < 1e-3, "qs length unstable");
        } else {
            // 1 to qs+: the right end is finite, the left end is not.
            const double change = std::abs(a.domain_hi - a.samples.front().time -
                                           (c.domain_hi - c.samples.front().time));
            v.detail += ", 1-qs+ right end change " + num(change);
            v.require(std::isfinite(a.domain_hi) && a.domain_lo == -std::numeric_limits<double>::infinity(), "1 to qs+ domain");
            v.require(change < 1e-3 * (a.domain_hi - a.samples.front().time), "1 to qs+ end unstable");
        }
    }
    const Equilibrium e1 = equilibrium(P_sub, EquilibriumId::E1);
    const Orbit up = x_orbit(P_sub, EquilibriumId::E1, Branch::UnstablePlus);
    const double L = saddle_x_extent(P_sub, e1, Branch::UnstablePlus, 1e-300);
    v.detail += ", 1-inf x-extent " + num(L);
    v.require(up.domain_lo == -std::numeric_limits<double>::infinity(), "1 to inf lower end is finite");
    v.require(L > 1e3, "1 to inf extent below 1e3");
    return v;
}

Verdict criterion_8()
{
    Verdict v;
    const double T = detect_period(P_sub, 0.01).period;
    const double want = 2 * std::numbers::pi / std::sqrt(P_sub.mu() * P_sub.D());
    const double rel = std::abs(T - want) / want;
    v.detail = "T " + num(T) + ", relative error " + num(rel);
    v.require(rel <= 0.01, "period off");
    return v;
}

Verdict criterion_9()
{
    Verdict v;
    std::mt19937_64 rng(109);
    std::uniform_real_distribution<double> U(-0.3, 0.3);
    auto f = [](const Vec2d& y) { return field_tau(P_sub, y); };
    const oracle::Field g = [](const oracle::V2& y) { return oracle::tau_field(1, 1, 1, y); };
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
        const Vec2d y0(U(rng), 0.3 * U(rng));
        for (int k = 1; k <= 10; ++k) {
            const double t = 0.5 * k;
            const Vec2d a = integrate_to(f, y0, t);
            const oracle::V2 b = oracle::rk4(g, {y0[0], y0[1]}, t, 1e-3);
            const double err = std::max(std::abs(a[0] - b[0]), std::abs(a[1] - b[1]));
            worst = std::max(worst, err);
        }
    }
    v.detail = "10 initial conditions, 10 times each, worst error " + num(worst);
    v.require(worst <= 1e-6, "oracle disagreement");
    return v;
}

Verdict criterion_10(const std::vector<ModelParams>& ps, const std::vector<std::array<Classification, 2>>& base)
{
    Verdict v;
    int stable = 0;
    for (std::size_t i = 0; i < ps.size(); ++i) {
        bool same = true;
        for (double eps : {1e-6, 1e-7, 1e-8}) {
            const auto c = classify_both(ps[i], eps);
            for (int m = 0; m < 2; ++m)
                same = same && c[m].match == base[i][m].match && c[m].found == base[i][m].found;
            if (!same) {
                v.require(false, describe(ps[i]) + " changes at eps " + num(eps));
                break;
            }
        }
        stable += same;
    }
    v.detail = std::to_string(stable) + "/" + std::to_string(ps.size()) + " classifications unchanged" +
               (v.detail.empty() ? "" : "; " + v.detail);
    return v;
}

Verdict guarded(const std::function<Verdict()>& f)
{
    try {
        return f();
    } catch (const std::exception& e) {
        return {false, std::string("exception: ") + e.what()};
    }
}

} // namespace

int main()
{
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<ModelParams> ps = criterion_4_params();
    std::vector<std::array<Classification, 2>> base;
    std::vector<Verdict> vs;
    vs.push_back(guarded(criterion_1));
    vs.push_back(guarded(criterion_2));
    vs.push_back(guarded([&] { return criterion_3(ps); }));
    vs.push_back(guarded([&] { return criterion_4(ps, base); }));
    vs.push_back(guarded(criterion_5));
    vs.push_back(guarded(criterion_6));
    vs.push_back(guarded(criterion_7));
    vs.push_back(guarded(criterion_8));
    vs.push_back(guarded(criterion_9));
    vs.push_back(guarded([&] {
        if (base.size() != ps.size())
            return Verdict{false, "criterion 4 did not finish"};
        return criterion_10(ps, base);
    }));

    bool all = true;
    for (std::size_t i = 0; i < vs.size(); ++i) {
        std::printf("%s criterion %zu: %s\n", vs[i].pass ? "PASS" : "FAIL", i + 1, vs[i].detail.c_str());
        all = all && vs[i].pass;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s (%.1f s)\n", all ? "all criteria pass" : "some criteria fail", secs);
    return all ? 0 : 1;
}
