#ifndef SDP_MODEL_HPP
#define SDP_MODEL_HPP

#include <cmath>
#include <utility>
#include <vector>

#include "sdp/types.hpp"

namespace sdp {

/// Coefficients of u_t = {(D + alpha u) u}_xx + mu u (1 - u) together with the
/// constants derived from them. Construct through make_params().
class ModelParams {
public:
    double D() const { return D_; }
    double alpha() const { return alpha_; }
    double mu() const { return mu_; }

    /// Saddle rates at E1: omega_pm = +-sqrt(mu (2 alpha + D)).
    double omega_plus() const { return std::sqrt(mu_ * (2.0 * alpha_ + D_)); }
    double omega_minus() const { return -omega_plus(); }
    /// Saddle rates at E2: Lambda_pm = +-sqrt((mu D^2 + 2 alpha mu D) / (2 alpha)).
    double Lambda_plus() const { return std::sqrt((mu_ * D_ * D_ + 2.0 * alpha_ * mu_ * D_) / (2.0 * alpha_)); }
    double Lambda_minus() const { return -Lambda_plus(); }
    double sqrt_alpha_mu() const { return std::sqrt(alpha_ * mu_); }
    /// Position of the infinity equilibria on the v-charts; the root of 1 = alpha mu M^4.
    double M() const { return std::pow(alpha_ * mu_, -0.25); }
    /// The line D + 2 alpha u = 0.
    double u_singular() const { return -D_ / (2.0 * alpha_); }
    /// D / (2 alpha); equals 1 at the bifurcation.
    double diffusion_ratio() const { return D_ / (2.0 * alpha_); }

    friend ModelParams make_params(double D, double alpha, double mu);

private:
    ModelParams(double D, double alpha, double mu) : D_(D), alpha_(alpha), mu_(mu) {}

    double D_;
    double alpha_;
    double mu_;
};

/// Throws ParameterDomainError unless all three values are finite and positive.
ModelParams make_params(double D, double alpha, double mu);

/// Relative guard used by field_x: |D + 2 alpha u| < singular_tol * (1 + D).
inline constexpr double kSingularLineTol = 1e-12;

/// x-parameterized system: u_x = v / (D + 2 alpha u), v_x = -mu u (1 - u).
template <typename Scalar>
Vec2<Scalar> field_x(const ModelParams& p, const Vec2<Scalar>& pt, double singular_tol = kSingularLineTol)
{
    using std::abs;
    const Scalar u = pt[0];
    const Scalar denom = p.D() + 2.0 * p.alpha() * u;
    if (abs(denom) < singular_tol * (1.0 + p.D()))
        throw SingularLineError("field_x evaluated on the singular line D + 2 alpha u = 0");
    return Vec2<Scalar>(pt[1] / denom, -p.mu() * u * (1.0 - u));
}

/// Desingularized system in tau-time: u' = v, v' = -mu u (1 - u)(D + 2 alpha u).
template <typename Scalar>
Vec2<Scalar> field_tau(const ModelParams& p, const Vec2<Scalar>& pt)
{
    const Scalar u = pt[0];
    return Vec2<Scalar>(pt[1], -p.mu() * u * (1.0 - u) * (p.D() + 2.0 * p.alpha() * u));
}

/// dx/dtau = D + 2 alpha u.
inline double time_rescale_factor(const ModelParams& p, double u) { return p.D() + 2.0 * p.alpha() * u; }

/// First integral of field_tau.
template <typename Scalar>
Scalar conserved_H(const ModelParams& p, const Vec2<Scalar>& pt)
{
    const double a = p.alpha(), m = p.mu(), D = p.D();
    const Scalar u = pt[0], v = pt[1];
    const Scalar u2 = u * u;
    return 0.5 * a * m * u2 * u2 + ((m * D - 2.0 * a * m) / 3.0) * u2 * u - 0.5 * m * D * u2 - 0.5 * v * v;
}

enum class Symmetry { Reversal, Mirror };

/// Reversal: (u, v) -> (u, -v). Mirror: (u, v) -> (-u, v). Both pair with x -> -x,
/// which is left to the caller.
template <typename Scalar>
Vec2<Scalar> symmetry_apply(Symmetry kind, const Vec2<Scalar>& pt)
{
    if (kind == Symmetry::Reversal)
        return Vec2<Scalar>(pt[0], -pt[1]);
    return Vec2<Scalar>(-pt[0], pt[1]);
}

struct QuasiHomogeneitySample {
    double R;
    double residual_u;
    double residual_v;
};

struct QuasiHomogeneityReport {
    int type_u = 0; // alpha_1
    int type_v = 0; // alpha_2
    int order = 0;  // k + 1
    std::vector<QuasiHomogeneitySample> residuals;
    bool certified = false;

    /// Least-squares slope of log|residual| against log R for component 0 (u) or 1 (v).
    /// Components that vanish identically report 0.
    double decay_slope(int component) const;
};

inline const std::vector<double>& default_R_ladder()
{
    static const std::vector<double> ladder{1e1, 1e2, 1e3, 1e4};
    return ladder;
}

/// Evaluates R^{-(k+a_j)} { f_j(R^{a_1} u, R^{a_2} v) - R^{k+a_j} (f_hom)_j(u, v) } along the
/// R ladder, with f_hom = (v, 2 alpha mu u^3) the leading quasi-homogeneous part.
QuasiHomogeneityReport quasi_homogeneity_check(const ModelParams& p, const PhasePoint& probe,
                                               const std::vector<double>& R_ladder = default_R_ladder());

struct CubicLogisticParams {
    double mu_tilde;
    double k;
};

/// (mu D, 2 alpha / D): the coefficients of u_t = u_xx + mu_tilde u (1 - u)(1 + k u) whose
/// stationary problem is field_tau.
inline CubicLogisticParams cubic_logistic_params(const ModelParams& p) { return {p.mu() * p.D(), 2.0 * p.alpha() / p.D()}; }

} // namespace sdp

#endif // SDP_MODEL_HPP
