#ifndef SDP_PORTRAIT_HPP
#define SDP_PORTRAIT_HPP

#include <string>
#include <vector>

#include "sdp/classify.hpp"

namespace sdp {

/// Disk coordinates (u / (1 + rho), v / (1 + rho)^2), rho the quasi-homogeneous radius.
/// Infinity lands on X^4 + Y^2 = 1; chart samples with l1 = 0 map onto it exactly.
Vec2d disk_map(const PhasePoint& pt);
Vec2d disk_map(Frame frame, const Vec2d& y);

struct PortraitOptions {
    int size = 800;                 // pixels, square canvas
    std::vector<double> periodic_fractions{0.2, 0.4, 0.6, 0.8}; // of the annulus around E0, along u > 0
    bool version_comment = true;
};

struct Portrait {
    std::string svg;
    std::vector<Orbit> periodic; // closed orbits that were drawn
};

/// SVG of the disk: boundary, singular line, equilibria, every orbit of the graph (tagged with
/// data-source / data-target) and a few closed orbits around E0. Output depends only on the
/// inputs, apart from the version comment on the second line.
Portrait render_portrait(const ModelParams& p, const ConnectionGraph& graph, const PortraitOptions& opts = {});

} // namespace sdp

#endif // SDP_PORTRAIT_HPP
