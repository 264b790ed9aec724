#ifndef SDP_EQUILIBRIA_HPP
#define SDP_EQUILIBRIA_HPP

#include <array>
#include <complex>
#include <optional>
#include <string_view>
#include <vector>

#include "sdp/charts.hpp"
#include "sdp/model.hpp"

namespace sdp {

enum class EquilibriumId { E0, E1, E2, E3, E4, E5, E6, E7, E8, E9, E10 };

inline constexpr int kEquilibriumCount = 11;

std::string_view to_string(EquilibriumId id);
EquilibriumId equilibrium_from_string(std::string_view name);

/// E7..E10 sit at the same points of the circle at infinity as E5, E4, E3 and E6; the
/// canonical id is the one on a u-chart.
EquilibriumId canonical(EquilibriumId id);

/// Image of an equilibrium under (u, v) -> (u, -v).
EquilibriumId reversal_image(EquilibriumId id);

inline bool is_finite(EquilibriumId id) { return static_cast<int>(id) <= 2; }

enum class Stability { Saddle, Center, StableNode, UnstableNode };

std::string_view to_string(Stability s);

struct EigenPairs {
    std::array<std::complex<double>, 2> values{};
    std::array<Vec2cd, 2> vectors{};
    bool repeated = false;
    bool defective = false; // only vectors[0] is meaningful
};

/// Closed-form eigen-decomposition of a real 2x2 matrix. Distinct real eigenvalues are
/// ordered largest first; complex pairs have positive imaginary part first. Eigenvectors are
/// scaled to unit first component when it is nonzero, otherwise to unit norm.
EigenPairs eigen2(const Mat2d& m);

/// Classification by eigenvalue signs. Throws InvariantError for foci or zero eigenvalues.
Stability classify_stability(const EigenPairs& eig);

struct Equilibrium {
    EquilibriumId id = EquilibriumId::E0;
    Frame frame = Frame::Interior;
    Vec2d location = Vec2d::Zero(); // (u, v) or (l1, l2)
    Mat2d jacobian = Mat2d::Zero();
    EigenPairs eigen;
    Stability stability = Stability::Center;
};

/// E0 = (0, 0), E1 = (1, 0), E2 = (-D/(2 alpha), 0) with closed-form Jacobians and eigenvalues.
std::vector<Equilibrium> finite_equilibria(const ModelParams& p);

/// Finite equilibria followed by E3..E10 on the four charts.
std::vector<Equilibrium> all_equilibria(const ModelParams& p);

Equilibrium equilibrium(const ModelParams& p, EquilibriumId id);

/// Central differences, step h per coordinate. The default step is 1e-6 (1 + |pt|).
template <typename Field>
Mat2d numerical_jacobian(Field&& field, const Vec2d& pt, std::optional<double> h = std::nullopt)
{
    const double step = h.value_or(1e-6 * (1.0 + pt.norm()));
    Mat2d J;
    for (int j = 0; j < 2; ++j) {
        Vec2d plus = pt, minus = pt;
        plus[j] += step;
        minus[j] -= step;
        J.col(j) = (field(plus) - field(minus)) / (2.0 * step);
    }
    return J;
}

/// Field evaluated in the frame of an equilibrium (field_tau or the chart field).
Vec2d frame_field(const ModelParams& p, Frame frame, const Vec2d& y);

} // namespace sdp

#endif // SDP_EQUILIBRIA_HPP
