#include "sdp/portrait.hpp"

#include "sdp/serialize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <sstream>

namespace sdp {

Vec2d disk_map(const PhasePoint& pt)
{
    const double rho = quasi_radius(pt);
    const double s = 1.0 + rho;
    return Vec2d(pt[0] / s, pt[1] / (s * s));
}

Vec2d disk_map(Frame frame, const Vec2d& y)
{
    if (frame == Frame::Interior)
        return disk_map(PhasePoint(y));
    // (u, v) = (uh / l1, vh / l1^2) with (uh, vh) fixed by the chart; the scaling cancels.
    const double l1 = y[0], l2 = y[1];
    Vec2d hat;
    switch (frame) {
    case Frame::U1: hat = Vec2d(1.0, l2); break;
    case Frame::V1: hat = Vec2d(-1.0, -l2); break;
    case Frame::U2: hat = Vec2d(l2, 1.0); break;
    default: hat = Vec2d(-l2, -1.0); break;
    }
    const double s = l1 + quasi_radius(hat);
    return Vec2d(hat[0] / s, hat[1] / (s * s));
}

namespace {

// Where the saddle level bounding the E0 annulus meets 0 < u < 1. H(u, 0) decreases there.
double annulus_edge(const ModelParams& p)
{
    const double level = std::max(conserved_H(p, Vec2d(1.0, 0.0)), conserved_H(p, Vec2d(p.u_singular(), 0.0)));
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        (conserved_H(p, Vec2d(mid, 0.0)) > level ? lo : hi) = mid;
    }
    return lo;
}

std::string fmt(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    std::string s(buf);
    return s == "-0.00" ? "0.00" : s;
}

struct Canvas {
    double centre;
    double radius;

    std::pair<double, double> to_px(const Vec2d& d) const { return {centre + radius * d[0], centre - radius * d[1]}; }

    std::string points(const std::vector<Vec2d>& pts) const
    {
        std::string out;
        double lx = 0.0, ly = 0.0;
        bool first = true;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const auto [x, y] = to_px(pts[i]);
            // Drop points closer than half a pixel to the last one kept, but keep the end.
            if (!first && i + 1 < pts.size() && std::hypot(x - lx, y - ly) < 0.5)
                continue;
            if (!first)
                out += ' ';
            out += fmt(x) + ',' + fmt(y);
            lx = x;
            ly = y;
            first = false;
        }
        return out;
    }
};

const char* stability_colour(Stability s)
{
    switch (s) {
    case Stability::Saddle: return "#c0392b";
    case Stability::Center: return "#27ae60";
    case Stability::StableNode: return "#2471a3";
    case Stability::UnstableNode: return "#d68910";
    }
    return "#000000";
}

std::vector<Vec2d> orbit_points(const Orbit& o)
{
    std::vector<Vec2d> pts;
    pts.reserve(o.samples.size());
    for (const OrbitSample& s : o.samples)
        pts.push_back(disk_map(s.frame, s.y));
    return pts;
}

std::string optional_id(const std::optional<EquilibriumId>& id)
{
    return id ? std::string(to_string(*id)) : std::string("none");
}

} // namespace

Portrait render_portrait(const ModelParams& p, const ConnectionGraph& graph, const PortraitOptions& opts)
{
    Portrait out;
    const Canvas c{0.5 * opts.size, 0.45 * opts.size};
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opts.size << "\" height=\"" << opts.size
       << "\" viewBox=\"0 0 " << opts.size << ' ' << opts.size << "\">\n";
    if (opts.version_comment)
        os << "<!-- sdportrait " << SDP_VERSION << " -->\n";
    os << "<desc>D=" << format_real(p.D()) << " alpha=" << format_real(p.alpha()) << " mu=" << format_real(p.mu())
       << "</desc>\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // X^4 + Y^2 = 1.
    std::vector<Vec2d> boundary;
    for (int i = 0; i <= 720; ++i) {
        const double t = 2.0 * std::numbers::pi * i / 720.0;
        const double ct = std::cos(t);
        boundary.emplace_back(std::copysign(std::sqrt(std::abs(ct)), ct), std::sin(t));
    }
    os << "<polygon class=\"boundary\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" points=\""
       << c.points(boundary) << "\"/>\n";

    std::vector<Vec2d> singular;
    for (int i = -400; i <= 400; ++i)
        singular.push_back(disk_map(PhasePoint(p.u_singular(), std::sinh(i / 20.0))));
    os << "<polyline class=\"singular-line\" fill=\"none\" stroke=\"#7f8c8d\" stroke-dasharray=\"6,4\" points=\""
       << c.points(singular) << "\"/>\n";

    const double edge = annulus_edge(p);
    for (double frac : opts.periodic_fractions) {
        try {
            out.periodic.push_back(detect_period(p, frac * edge).orbit);
        } catch (const Error&) {
            // outside the period annulus; nothing to draw
        }
    }
    for (const Orbit& o : out.periodic)
        os << "<polyline class=\"periodic\" fill=\"none\" stroke=\"#27ae60\" stroke-width=\"0.8\" points=\""
           << c.points(orbit_points(o)) << "\"/>\n";

    for (std::size_t i = 0; i < graph.orbits.size(); ++i) {
        const Orbit& o = graph.orbits[i];
        os << "<polyline class=\"orbit\" data-launch=\"" << graph.launches[i] << "\" data-source=\""
           << optional_id(o.source) << "\" data-target=\"" << optional_id(o.target)
           << "\" fill=\"none\" stroke=\"#34495e\" stroke-width=\"1\" points=\"" << c.points(orbit_points(o))
           << "\"/>\n";
    }

    // Aliases at infinity share one marker.
    std::map<int, std::string> labels;
    for (const Equilibrium& eq : all_equilibria(p)) {
        std::string& l = labels[static_cast<int>(canonical(eq.id))];
        l += (l.empty() ? "" : "/") + std::string(to_string(eq.id));
    }
    for (const Equilibrium& eq : all_equilibria(p)) {
        if (canonical(eq.id) != eq.id)
            continue;
        const auto [x, y] = c.to_px(disk_map(eq.frame, eq.location));
        os << "<circle class=\"equilibrium\" data-id=\"" << to_string(eq.id) << "\" data-stability=\""
           << to_string(eq.stability) << "\" cx=\"" << fmt(x) << "\" cy=\"" << fmt(y) << "\" r=\"5\" fill=\""
           << stability_colour(eq.stability) << "\"/>\n";
        os << "<text x=\"" << fmt(x + 7.0) << "\" y=\"" << fmt(y - 7.0) << "\" font-size=\"12\">"
           << labels[static_cast<int>(eq.id)] << "</text>\n";
    }
    os << "</svg>\n";
    out.svg = os.str();
    return out;
}

} // namespace sdp
