#include "sdp/charts.hpp"

#include <cmath>
#include <string>

namespace sdp {

std::string_view to_string(ChartId chart)
{
    switch (chart) {
    case ChartId::U1: return "U1";
    case ChartId::V1: return "V1";
    case ChartId::U2: return "U2";
    case ChartId::V2: return "V2";
    }
    return "?";
}

ChartId chart_from_string(std::string_view name)
{
    for (ChartId c : kAllCharts)
        if (to_string(c) == name)
            return c;
    throw ChartDomainError("unknown chart '" + std::string(name) + "'");
}

std::string_view to_string(Frame frame)
{
    return frame == Frame::Interior ? std::string_view("interior") : to_string(chart_of(frame));
}

Frame frame_from_string(std::string_view name)
{
    if (name == "interior")
        return Frame::Interior;
    return frame_of(chart_from_string(name));
}

namespace {

// A chart point is a scale l1 together with a direction (uh, vh) such that
// (u, v) = (uh / l1, vh / l1^2). The direction survives l1 = 0.
struct Direction {
    double l1;
    double uh;
    double vh;
};

Direction direction_of(const ChartPoint& c)
{
    switch (c.chart) {
    case ChartId::U1: return {c.l1(), 1.0, c.l2()};
    case ChartId::V1: return {c.l1(), -1.0, -c.l2()};
    case ChartId::U2: return {c.l1(), c.l2(), 1.0};
    case ChartId::V2: return {c.l1(), -c.l2(), -1.0};
    }
    return {c.l1(), 0.0, 0.0};
}

bool covers(const Direction& d, ChartId target)
{
    switch (target) {
    case ChartId::U1: return d.uh > 0.0;
    case ChartId::V1: return d.uh < 0.0;
    case ChartId::U2: return d.vh > 0.0;
    case ChartId::V2: return d.vh < 0.0;
    }
    return false;
}

ChartPoint express(const Direction& d, ChartId target)
{
    if (!covers(d, target))
        throw ChartDomainError("point is outside the domain of chart " + std::string(to_string(target)));
    ChartPoint out;
    out.chart = target;
    switch (target) {
    case ChartId::U1:
        out.lambda = Vec2d(d.l1 / d.uh, d.vh / (d.uh * d.uh));
        break;
    case ChartId::V1:
        out.lambda = Vec2d(-d.l1 / d.uh, -d.vh / (d.uh * d.uh));
        break;
    case ChartId::U2: {
        const double r = std::sqrt(d.vh);
        out.lambda = Vec2d(d.l1 / r, d.uh / r);
        break;
    }
    case ChartId::V2: {
        const double r = std::sqrt(-d.vh);
        out.lambda = Vec2d(d.l1 / r, -d.uh / r);
        break;
    }
    }
    return out;
}

} // namespace

ChartPoint to_chart(ChartId chart, const PhasePoint& pt)
{
    return express({1.0, pt[0], pt[1]}, chart);
}

PhasePoint from_chart(const ChartPoint& cpt)
{
    if (cpt.l1() == 0.0)
        throw InfinityError("chart point lies on the circle at infinity");
    const Direction d = direction_of(cpt);
    return PhasePoint(d.uh / d.l1, d.vh / (d.l1 * d.l1));
}

ChartPoint chart_to_chart(const ChartPoint& cpt, ChartId target)
{
    if (cpt.chart == target)
        return cpt;
    return express(direction_of(cpt), target);
}

bool chart_covers(const ChartPoint& cpt, ChartId target) { return covers(direction_of(cpt), target); }

std::array<ChartPoint, 2> infinity_equilibria(ChartId chart, const ModelParams& p)
{
    const double level = (chart == ChartId::U1 || chart == ChartId::V1) ? p.sqrt_alpha_mu() : p.M();
    return {ChartPoint{chart, Vec2d(0.0, -level)}, ChartPoint{chart, Vec2d(0.0, level)}};
}

ChartId preferred_chart(const PhasePoint& pt)
{
    if (std::abs(pt[0]) >= std::sqrt(std::abs(pt[1])))
        return pt[0] >= 0.0 ? ChartId::U1 : ChartId::V1;
    return pt[1] > 0.0 ? ChartId::U2 : ChartId::V2;
}

int infinity_u_sign(const ChartPoint& cpt)
{
    const double uh = direction_of(cpt).uh;
    return (uh > 0.0) - (uh < 0.0);
}

ChartPoint reversal_in_chart(const ChartPoint& cpt)
{
    Direction d = direction_of(cpt);
    d.vh = -d.vh;
    switch (cpt.chart) {
    case ChartId::U1:
    case ChartId::V1: return express(d, cpt.chart);
    case ChartId::U2: return express(d, ChartId::V2);
    case ChartId::V2: return express(d, ChartId::U2);
    }
    return cpt;
}

} // namespace sdp
