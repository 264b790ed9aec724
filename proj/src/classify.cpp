#include "sdp/classify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace sdp {

std::string_view to_string(ClassifyMode mode) { return mode == ClassifyMode::XMode ? "x" : "tau"; }

std::string_view to_string(EndpointTag tag)
{
    switch (tag) {
    case EndpointTag::One: return "1";
    case EndpointTag::Inf: return "inf";
    case EndpointTag::MinusInf: return "-inf";
    case EndpointTag::QsMinus: return "qs-";
    case EndpointTag::QsPlus: return "qs+";
    case EndpointTag::MinusKInv: return "-1/k";
    }
    return "?";
}

std::string_view to_string(Regime regime)
{
    switch (regime) {
    case Regime::Sub: return "Sub";
    case Regime::Critical: return "Critical";
    case Regime::Super: return "Super";
    }
    return "?";
}

EndpointType classify_endpoint(const Orbit& orbit, Side side, ClassifyMode mode)
{
    const std::optional<EquilibriumId> eq = side == Side::Left ? orbit.source : orbit.target;
    if (!eq) {
        const Event* last = orbit.terminal();
        const std::string why = last ? std::string(to_string(last->tag)) : std::string("no terminal event");
        throw UnclassifiableError("the " + std::string(to_string(side)) + " end has no equilibrium (" + why + ")");
    }
    EndpointType out;
    out.side = side;
    switch (canonical(*eq)) {
    case EquilibriumId::E1: out.tag = EndpointTag::One; break;
    case EquilibriumId::E2:
        if (mode == ClassifyMode::TauMode)
            out.tag = EndpointTag::MinusKInv;
        else
            out.tag = side == Side::Left ? EndpointTag::QsMinus : EndpointTag::QsPlus;
        break;
    case EquilibriumId::E3:
    case EquilibriumId::E4: out.tag = EndpointTag::Inf; break;
    case EquilibriumId::E5:
    case EquilibriumId::E6: out.tag = EndpointTag::MinusInf; break;
    default:
        throw UnclassifiableError("orbit ends at " + std::string(to_string(*eq)) + ", which has no stationary type");
    }
    return out;
}

std::string StationaryType::label() const
{
    if (periodic)
        return "periodic";
    return std::string(left ? to_string(left->tag) : "?") + " to " + std::string(right ? to_string(right->tag) : "?");
}

bool StationaryType::bounded() const
{
    if (periodic)
        return true;
    auto ok = [](const std::optional<EndpointType>& e) {
        return e && e->tag != EndpointTag::Inf && e->tag != EndpointTag::MinusInf;
    };
    return ok(left) && ok(right);
}

StationaryType stationary_type(const Orbit& orbit, ClassifyMode mode)
{
    StationaryType t;
    const Event* last = orbit.terminal();
    if (last && last->tag == EventTag::ClosedLoop) {
        t.periodic = true;
        return t;
    }
    t.left = classify_endpoint(orbit, Side::Left, mode);
    t.right = classify_endpoint(orbit, Side::Right, mode);
    return t;
}

bool ConnectionGraph::has_edge(EquilibriumId source, EquilibriumId target) const
{
    return orbit_for(source, target) != nullptr;
}

const Orbit* ConnectionGraph::orbit_for(EquilibriumId source, EquilibriumId target) const
{
    for (const Edge& e : edges)
        if (e.source == canonical(source) && e.target == canonical(target))
            return &orbits[e.orbit];
    return nullptr;
}

ConnectionGraph connection_graph(const ModelParams& p, const GraphOptions& opts)
{
    ConnectionGraph g;
    const auto eqs = all_equilibria(p);
    auto add = [&](const std::string& launch, auto&& shoot) {
        try {
            Orbit o = shoot();
            g.orbits.push_back(std::move(o));
            g.launches.push_back(launch);
        } catch (const Error& e) {
            g.failures.push_back({launch, e.what()});
        }
    };

    if (opts.seed_interior)
        add("through (3, 0)", [&] { return orbit_through(p, PhasePoint(3.0, 0.0), opts.integrate); });
    for (EquilibriumId id : {EquilibriumId::E1, EquilibriumId::E2}) {
        const Equilibrium& eq = eqs[static_cast<std::size_t>(id)];
        for (Branch b : {Branch::UnstablePlus, Branch::UnstableMinus, Branch::StablePlus, Branch::StableMinus})
            add(std::string(to_string(id)) + " " + std::string(to_string(b)),
                [&] { return shoot_saddle(p, eq, b, opts.epsilon, opts.integrate); });
    }
    for (EquilibriumId id : {EquilibriumId::E3, EquilibriumId::E5, EquilibriumId::E4, EquilibriumId::E6}) {
        const Equilibrium& eq = eqs[static_cast<std::size_t>(id)];
        for (double angle : opts.fan_angles)
            add(std::string(to_string(id)) + " fan " + std::to_string(angle * 180.0 / std::numbers::pi),
                [&] { return shoot_node(p, eq, angle, opts.epsilon, opts.integrate); });
    }

    for (std::size_t i = 0; i < g.orbits.size(); ++i) {
        const Orbit& o = g.orbits[i];
        if (!o.source || !o.target) {
            const Event* last = o.terminal();
            g.failures.push_back({g.launches[i], "no arrival: " + std::string(last ? to_string(last->tag) : "none")});
            continue;
        }
        const EquilibriumId s = canonical(*o.source), t = canonical(*o.target);
        if (!g.has_edge(s, t))
            g.edges.push_back({s, t, i});
    }

    g.probe_u0 = 0.1 * std::min(1.0, p.diffusion_ratio());
    try {
        const PeriodResult pr = detect_period(p, g.probe_u0, opts.integrate);
        g.periodic_family = true;
        g.probe_period = pr.period;
    } catch (const Error& e) {
        g.failures.push_back({"periodic probe", e.what()});
    }
    return g;
}

Regime regime_of(const ModelParams& p)
{
    const double two_a = 2.0 * p.alpha();
    if (std::abs(p.D() - two_a) < kCriticalBand * two_a)
        return Regime::Critical;
    return p.D() < two_a ? Regime::Sub : Regime::Super;
}

std::vector<std::string> expected_types(Regime regime, ClassifyMode mode)
{
    std::vector<std::string> out;
    if (mode == ClassifyMode::XMode) {
        out = {"1 to inf", "inf to inf", "inf to 1", "periodic"};
        switch (regime) {
        case Regime::Sub: out.push_back("qs- to qs+"); break;
        case Regime::Critical:
            out.push_back("1 to qs+");
            out.push_back("qs- to 1");
            break;
        case Regime::Super:
            out.push_back("1 to 1");
            out.push_back("inf to qs+");
            out.push_back("qs- to inf");
            break;
        }
    } else {
        out = {"1 to inf", "inf to 1", "inf to inf", "-inf to -1/k", "-1/k to -inf", "-inf to -inf", "periodic"};
        switch (regime) {
        case Regime::Sub:
            out.push_back("-1/k to -1/k");
            out.push_back("-inf to 1");
            out.push_back("1 to -inf");
            break;
        case Regime::Critical:
            out.push_back("-1/k to 1");
            out.push_back("1 to -1/k");
            break;
        case Regime::Super:
            out.push_back("1 to 1");
            out.push_back("-1/k to inf");
            out.push_back("inf to -1/k");
            break;
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

RegimeReport regime_report(const ModelParams& p, ClassifyMode mode, const GraphOptions& opts)
{
    return regime_report(p, mode, connection_graph(p, opts));
}

RegimeReport regime_report(const ModelParams& p, ClassifyMode mode, ConnectionGraph graph)
{
    RegimeReport r;
    r.mode = mode;
    r.regime = regime_of(p);
    r.within_critical_band = r.regime == Regime::Critical;
    r.expected = expected_types(r.regime, mode);

    std::set<std::string> found, bounded;
    for (const Edge& e : graph.edges) {
        const Orbit& o = graph.orbits[e.orbit];
        EdgeType et{e.source, e.target, "", true};
        if (mode == ClassifyMode::XMode)
            et.admissible = x_admissible(o, p);
        try {
            const StationaryType st = stationary_type(o, mode);
            et.label = st.label();
            if (et.admissible) {
                found.insert(et.label);
                if (st.bounded())
                    bounded.insert(et.label);
            }
        } catch (const UnclassifiableError& err) {
            et.label = "unclassifiable";
        }
        r.edge_types.push_back(et);
    }
    if (graph.periodic_family) {
        found.insert("periodic");
        bounded.insert("periodic");
    }
    r.found.assign(found.begin(), found.end());
    for (const std::string& b : bounded)
        if (!std::binary_search(r.expected.begin(), r.expected.end(), b))
            r.unexpected_bounded.push_back(b);
    const bool covered = std::includes(r.found.begin(), r.found.end(), r.expected.begin(), r.expected.end());
    r.match = covered && r.unexpected_bounded.empty();
    r.graph = std::move(graph);
    return r;
}

double bifurcation_function(double alpha, double mu, double D)
{
    const ModelParams p = make_params(D, alpha, mu);
    return conserved_H(p, Vec2d(1.0, 0.0)) - conserved_H(p, Vec2d(p.u_singular(), 0.0));
}

ScanResult bifurcation_scan(double alpha, double mu, double D_min, double D_max, bool cross_check, double rel_tol)
{
    if (!(D_min > 0.0 && D_max > D_min))
        throw ParameterDomainError("scan range must satisfy 0 < D_min < D_max");
    ScanResult res;
    double lo = D_min, hi = D_max;
    double g_lo = bifurcation_function(alpha, mu, lo);
    const double g_hi = bifurcation_function(alpha, mu, hi);
    for (int i = 0; i <= 8; ++i) {
        const double D = D_min + (D_max - D_min) * i / 8.0;
        res.g_samples.emplace_back(D, bifurcation_function(alpha, mu, D));
    }
    if (g_lo == 0.0 || g_hi == 0.0) {
        res.D_star = g_lo == 0.0 ? lo : hi;
    } else {
        if ((g_lo > 0.0) == (g_hi > 0.0))
            throw BracketError("g(D) has the same sign at both ends of [" + std::to_string(D_min) + ", " +
                               std::to_string(D_max) + "]");
        while (hi - lo > rel_tol * 0.5 * (lo + hi)) {
            const double mid = 0.5 * (lo + hi);
            const double gm = bifurcation_function(alpha, mu, mid);
            ++res.iterations;
            if (gm == 0.0) {
                lo = hi = mid;
                break;
            }
            if ((gm > 0.0) == (g_lo > 0.0)) {
                lo = mid;
                g_lo = gm;
            } else {
                hi = mid;
            }
        }
        res.D_star = 0.5 * (lo + hi);
    }

    if (cross_check) {
        const ConnectionGraph below = connection_graph(make_params(res.D_star * 0.9, alpha, mu));
        const ConnectionGraph above = connection_graph(make_params(res.D_star * 1.1, alpha, mu));
        using E = EquilibriumId;
        res.homoclinic_below = below.has_edge(E::E2, E::E2) && !below.has_edge(E::E1, E::E1);
        res.homoclinic_above = above.has_edge(E::E1, E::E1) && !above.has_edge(E::E2, E::E2);
        res.heteroclinic_off = !below.has_edge(E::E1, E::E2) && !below.has_edge(E::E2, E::E1) &&
                               !above.has_edge(E::E1, E::E2) && !above.has_edge(E::E2, E::E1);
        res.cross_checked = res.homoclinic_below && res.homoclinic_above && res.heteroclinic_off;
    }
    return res;
}

Profile profile(const Orbit& orbit, const ModelParams& p)
{
    if (orbit.mode != OrbitMode::XTime)
        throw ReparameterizationError("profile needs an orbit in x-time");
    Profile out;
    std::optional<StationaryType> type;
    try {
        type = stationary_type(orbit, ClassifyMode::XMode);
        out.type_label = type->label();
    } catch (const UnclassifiableError&) {
        out.type_label = "unclassified";
    }

    // Sign changes of u_x near a finite end equilibrium are the saddle pass, not a feature.
    std::vector<Vec2d> ends;
    for (const auto& eq : {orbit.source, orbit.target})
        if (eq && is_finite(*eq))
            ends.push_back(equilibrium(p, *eq).location);
    auto near_end = [&](const Vec2d& pt) {
        return std::any_of(ends.begin(), ends.end(), [&](const Vec2d& e) { return (pt - e).norm() < 1e-2; });
    };

    bool have_prev = false;
    ProfileSample prev{0.0, 0.0, 0.0};
    std::vector<int> signs; // sign of u_x between features
    for (const OrbitSample& s : orbit.samples) {
        const auto pt = phase_point(s);
        if (!pt)
            continue;
        const double u = (*pt)[0], v = (*pt)[1];
        const double denom = time_rescale_factor(p, u);
        if (denom <= 0.0)
            continue;
        const ProfileSample ps{s.time, u, v / denom};
        out.samples.push_back(ps);
        if (near_end(*pt)) {
            have_prev = false;
            continue;
        }
        if (ps.ux == 0.0)
            continue;
        const int sg = ps.ux > 0.0 ? 1 : -1;
        if (signs.empty())
            signs.push_back(sg);
        if (have_prev && (prev.ux > 0.0) != (ps.ux > 0.0)) {
            const double w = prev.ux / (prev.ux - ps.ux);
            out.features.push_back({"turn", prev.x + w * (ps.x - prev.x), prev.u + w * (ps.u - prev.u)});
            signs.push_back(sg);
        }
        prev = ps;
        have_prev = true;
    }

    const std::string& lbl = out.type_label;
    auto expect = [&](std::vector<int> pattern, const char* name) {
        if (signs != pattern)
            throw PatternViolationError("u_x sign pattern does not match type " + lbl);
        for (FeaturePoint& f : out.features)
            f.name = name;
    };
    if (lbl == "qs- to qs+") {
        expect({1, -1}, "x*");
        const double u_star = out.features.front().u;
        if (!(u_star > 0.0 && u_star < 1.0))
            throw PatternViolationError("u(x*) lies outside (0, 1)");
    } else if (lbl == "1 to 1") {
        expect({-1, 1}, "x_*");
    } else if (lbl == "inf to inf") {
        expect({-1, 1}, "x0");
    }
    return out;
}

} // namespace sdp
