#include "cli.hpp"

#include <cmath>
#include <cstdio>

namespace sdp::cli {

namespace {

std::string sci(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

const std::vector<PhasePoint>& probes()
{
    static const std::vector<PhasePoint> pts{{1.0, 1.0}, {0.3, -0.7}, {-2.0, 0.5}, {2.5, 3.0}, {-0.1, -4.0}};
    return pts;
}

CheckLine quasi_homogeneity(const ModelParams& p)
{
    const QuasiHomogeneityReport r = quasi_homogeneity_check(p, PhasePoint(1.0, 1.0));
    const bool ok = r.certified && r.type_u == 1 && r.type_v == 2 && r.order == 2;
    return {"quasi-homogeneity", ok,
            "type (" + std::to_string(r.type_u) + ", " + std::to_string(r.type_v) + "), order " +
                std::to_string(r.order) + ", v-slope " + sci(r.decay_slope(1))};
}

CheckLine chart_round_trip()
{
    double worst = 0.0;
    for (ChartId c : kAllCharts) {
        for (const PhasePoint& base : probes()) {
            // Push the probe into the chart's half-plane.
            PhasePoint pt = base;
            switch (c) {
            case ChartId::U1: pt[0] = std::abs(pt[0]) + 0.5; break;
            case ChartId::V1: pt[0] = -std::abs(pt[0]) - 0.5; break;
            case ChartId::U2: pt[1] = std::abs(pt[1]) + 0.5; break;
            case ChartId::V2: pt[1] = -std::abs(pt[1]) - 0.5; break;
            }
            const PhasePoint back = from_chart(to_chart(c, pt));
            worst = std::max(worst, (back - pt).norm() / (1.0 + pt.norm()));
        }
    }
    return {"chart round trip", worst <= 1e-12, "max error " + sci(worst)};
}

CheckLine chart_fields(const ModelParams& p)
{
    double worst = 0.0;
    for (ChartId c : kAllCharts) {
        for (double l1 : {0.05, 0.2, 0.7}) {
            for (double l2 : {-1.5, -0.3, 0.4, 1.2}) {
                const ChartPoint cp{c, Vec2d(l1, l2)};
                const PhasePoint pt = from_chart(cp);
                auto to = [&](const Vec2d& y) { return to_chart(c, y).lambda; };
                const Vec2d pushed = l1 * (numerical_jacobian(to, pt) * field_tau(p, pt));
                const Vec2d direct = chart_field(c, cp.lambda, p);
                worst = std::max(worst, (pushed - direct).norm() / (1.0 + direct.norm()));
            }
        }
    }
    return {"chart fields", worst <= 1e-6, "max error " + sci(worst)};
}

std::vector<CheckLine> jacobians(const ModelParams& p)
{
    std::vector<CheckLine> out;
    for (const Equilibrium& eq : all_equilibria(p)) {
        auto field = [&](const Vec2d& y) { return frame_field(p, eq.frame, y); };
        const Mat2d num = numerical_jacobian(field, eq.location);
        const double jerr = (num - eq.jacobian).cwiseAbs().maxCoeff();
        const EigenPairs e = eigen2(num);
        double verr = 0.0;
        for (int i = 0; i < 2; ++i)
            verr = std::max(verr, std::abs(e.values[i] - eq.eigen.values[i]));
        const bool ok = jerr <= 1e-6 * (1.0 + eq.jacobian.norm()) && verr <= 1e-6;
        out.push_back({"jacobian " + std::string(to_string(eq.id)), ok,
                       "matrix " + sci(jerr) + ", eigenvalues " + sci(verr)});
    }
    return out;
}

CheckLine parallel_fields(const ModelParams& p)
{
    double worst = 0.0;
    for (const PhasePoint& pt : probes()) {
        if (std::abs(time_rescale_factor(p, pt[0])) < 1e-3)
            continue;
        const Vec2d a = field_tau(p, pt);
        const Vec2d b = time_rescale_factor(p, pt[0]) * field_x(p, pt);
        worst = std::max(worst, (a - b).norm() / (1.0 + a.norm()));
    }
    return {"field_x parallel to field_tau", worst <= 1e-14, "max error " + sci(worst)};
}

CheckLine reversal(const ModelParams& p)
{
    double worst = 0.0;
    for (const PhasePoint& pt : probes()) {
        const Vec2d w = field_tau(p, pt);
        const Vec2d r = field_tau(p, symmetry_apply(Symmetry::Reversal, pt));
        worst = std::max(worst, (r - Vec2d(-w[0], w[1])).norm() / (1.0 + w.norm()));
    }
    return {"reversal equivariance", worst <= 1e-14, "max residual " + sci(worst)};
}

// field_tau(-u, v) - (w1, -w2) = (0, 2 mu u^2 (D - 2 alpha)): zero exactly when D = 2 alpha.
CheckLine mirror(const ModelParams& p)
{
    double worst = 0.0;
    for (const PhasePoint& pt : probes()) {
        const Vec2d w = field_tau(p, pt);
        const Vec2d m = field_tau(p, symmetry_apply(Symmetry::Mirror, pt));
        const Vec2d res = m - Vec2d(w[0], -w[1]);
        const Vec2d expect(0.0, 2.0 * p.mu() * pt[0] * pt[0] * (p.D() - 2.0 * p.alpha()));
        worst = std::max(worst, (res - expect).norm() / (1.0 + w.norm() + m.norm()));
    }
    return {"mirror residual", worst <= 1e-14, "deviation from 2 mu u^2 (D - 2 alpha): " + sci(worst)};
}

CheckLine aliases(const ModelParams& p)
{
    const std::pair<EquilibriumId, EquilibriumId> pairs[] = {{EquilibriumId::E7, EquilibriumId::E5},
                                                             {EquilibriumId::E8, EquilibriumId::E4},
                                                             {EquilibriumId::E9, EquilibriumId::E3},
                                                             {EquilibriumId::E10, EquilibriumId::E6}};
    double worst = 0.0;
    bool stab = true;
    for (const auto& [a, b] : pairs) {
        const Equilibrium ea = equilibrium(p, a), eb = equilibrium(p, b);
        const ChartPoint moved = chart_to_chart({chart_of(ea.frame), ea.location}, chart_of(eb.frame));
        worst = std::max(worst, (moved.lambda - eb.location).norm());
        stab = stab && ea.stability == eb.stability;
    }
    return {"aliases at infinity", worst <= 1e-12 && stab, "max offset " + sci(worst)};
}

std::vector<CheckLine> conservation(const ModelParams& p, const IntegrateOptions& opts)
{
    std::vector<CheckLine> out;
    GraphOptions go;
    go.integrate = opts;
    const ConnectionGraph g = connection_graph(p, go);
    const double bound = 100.0 * opts.control.rtol;
    double worst = 0.0;
    for (const Orbit& o : g.orbits)
        worst = std::max(worst, h_drift(o, p));
    out.push_back({"H conservation (" + std::to_string(g.orbits.size()) + " orbits)", worst <= bound,
                   "max drift " + sci(worst) + ", bound " + sci(bound)});

    // Reversal maps an orbit s -> t onto one R(t) -> R(s); the graph must be closed under it.
    std::string missing;
    for (const Edge& e : g.edges)
        if (!g.has_edge(canonical(reversal_image(e.target)), canonical(reversal_image(e.source))))
            missing += " " + std::string(to_string(e.source)) + "->" + std::string(to_string(e.target));
    out.push_back({"reversal symmetry of the graph", missing.empty(),
                   missing.empty() ? std::to_string(g.edges.size()) + " edges" : "no image for" + missing});

    out.push_back({"periodic family", g.periodic_family, "probe period " + sci(g.probe_period)});
    return out;
}

} // namespace

std::vector<CheckLine> check_suite(const ModelParams& p, const IntegrateOptions& opts)
{
    std::vector<CheckLine> out;
    auto guarded = [&](const std::string& name, auto&& f) {
        try {
            f();
        } catch (const Error& e) {
            out.push_back({name, false, e.what()});
        }
    };
    guarded("quasi-homogeneity", [&] { out.push_back(quasi_homogeneity(p)); });
    guarded("chart round trip", [&] { out.push_back(chart_round_trip()); });
    guarded("chart fields", [&] { out.push_back(chart_fields(p)); });
    guarded("jacobians", [&] {
        for (CheckLine& c : jacobians(p))
            out.push_back(std::move(c));
    });
    guarded("field_x parallel to field_tau", [&] { out.push_back(parallel_fields(p)); });
    guarded("reversal equivariance", [&] { out.push_back(reversal(p)); });
    guarded("mirror residual", [&] { out.push_back(mirror(p)); });
    guarded("aliases at infinity", [&] { out.push_back(aliases(p)); });
    guarded("orbits", [&] {
        for (CheckLine& c : conservation(p, opts))
            out.push_back(std::move(c));
    });
    return out;
}

} // namespace sdp::cli
