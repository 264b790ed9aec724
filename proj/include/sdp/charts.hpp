#ifndef SDP_CHARTS_HPP
#define SDP_CHARTS_HPP

#include <array>
#include <string_view>

#include "sdp/model.hpp"

namespace sdp {

// Directional charts of the type-(1, 2) compactification.
//   U1: u = 1/l1,     v = l2/l1^2    (u -> +inf)
//   V1: u = -1/l1,    v = -l2/l1^2   (u -> -inf)
//   U2: u = l2/l1,    v = 1/l1^2     (v -> +inf)
//   V2: u = -l2/l1,   v = -1/l1^2    (v -> -inf)
// l1 = 0 is the circle at infinity. Chart fields are written in s-time, ds/dtau = 1/l1.
enum class ChartId { U1, V1, U2, V2 };

inline constexpr std::array<ChartId, 4> kAllCharts{ChartId::U1, ChartId::V1, ChartId::U2, ChartId::V2};

std::string_view to_string(ChartId chart);
ChartId chart_from_string(std::string_view name);

struct ChartPoint {
    ChartId chart = ChartId::U1;
    Vec2d lambda = Vec2d::Zero(); // (l1, l2)

    double l1() const { return lambda[0]; }
    double l2() const { return lambda[1]; }
};

/// Throws ChartDomainError when pt lies outside the chart's open half-plane.
ChartPoint to_chart(ChartId chart, const PhasePoint& pt);

/// Throws InfinityError when l1 = 0.
PhasePoint from_chart(const ChartPoint& cpt);

/// Re-expresses a chart point in another chart. Valid on the circle at infinity as well,
/// as long as the target chart covers the direction. Throws ChartDomainError otherwise.
ChartPoint chart_to_chart(const ChartPoint& cpt, ChartId target);

/// True when the direction of cpt is covered by target (on or off the circle).
bool chart_covers(const ChartPoint& cpt, ChartId target);

/// Desingularized chart vector field in s-time.
template <typename Scalar>
Vec2<Scalar> chart_field(ChartId chart, const Vec2<Scalar>& lam, const ModelParams& p)
{
    const double m = p.mu(), D = p.D(), a = p.alpha();
    const double c = m * (2.0 * a - D);
    const Scalar l1 = lam[0], l2 = lam[1];
    switch (chart) {
    case ChartId::U1:
        return Vec2<Scalar>(-l1 * l2, -m * D * l1 * l1 - c * l1 + 2.0 * a * m - 2.0 * l2 * l2);
    case ChartId::V1:
        return Vec2<Scalar>(-l1 * l2, -m * D * l1 * l1 + c * l1 + 2.0 * a * m - 2.0 * l2 * l2);
    case ChartId::U2: {
        const Scalar l1s = l1 * l1, l2s = l2 * l2;
        return Vec2<Scalar>(0.5 * m * D * l1s * l1 * l2 + 0.5 * c * l1s * l2s - a * m * l1 * l2s * l2,
                            1.0 + 0.5 * m * D * l1s * l2s + 0.5 * c * l1 * l2s * l2 - a * m * l2s * l2s);
    }
    case ChartId::V2: {
        const Scalar l1s = l1 * l1, l2s = l2 * l2;
        return Vec2<Scalar>(0.5 * m * D * l1s * l1 * l2 - 0.5 * c * l1s * l2s - a * m * l1 * l2s * l2,
                            1.0 + 0.5 * m * D * l1s * l2s - 0.5 * c * l1 * l2s * l2 - a * m * l2s * l2s);
    }
    }
    return Vec2<Scalar>::Zero();
}

/// Coordinate frame of a state: the finite plane (tau-time) or one chart (s-time).
enum class Frame { Interior, U1, V1, U2, V2 };

std::string_view to_string(Frame frame);
Frame frame_from_string(std::string_view name);
inline Frame frame_of(ChartId chart) { return static_cast<Frame>(static_cast<int>(chart) + 1); }
inline ChartId chart_of(Frame frame) { return static_cast<ChartId>(static_cast<int>(frame) - 1); }

/// Equilibria on l1 = 0: U1 {E3, E4}, V1 {E5, E6}, U2 {E7, E8}, V2 {E9, E10}, in that order.
std::array<ChartPoint, 2> infinity_equilibria(ChartId chart, const ModelParams& p);

/// Chart preferred for a finite point: compares |u| against |v|^(1/2).
ChartId preferred_chart(const PhasePoint& pt);

/// Quasi-homogeneous radius (u^4 + v^2)^(1/4).
inline double quasi_radius(const PhasePoint& pt) { return std::pow(pt[0] * pt[0] * pt[0] * pt[0] + pt[1] * pt[1], 0.25); }

/// Sign of u along the direction of a chart point when it sits at infinity (+1, -1 or 0).
int infinity_u_sign(const ChartPoint& cpt);

/// Reversal (u, v) -> (u, -v) written in chart coordinates.
ChartPoint reversal_in_chart(const ChartPoint& cpt);

} // namespace sdp

#endif // SDP_CHARTS_HPP
