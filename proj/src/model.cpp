#include "sdp/model.hpp"

#include <cmath>
#include <string>

namespace sdp {

ModelParams make_params(double D, double alpha, double mu)
{
    auto check = [](double value, const char* name) {
        if (!std::isfinite(value) || value <= 0.0)
            throw ParameterDomainError(std::string("parameter ") + name + " must be finite and positive, got " +
                                       std::to_string(value));
    };
    check(D, "D");
    check(alpha, "alpha");
    check(mu, "mu");
    return ModelParams(D, alpha, mu);
}

double QuasiHomogeneityReport::decay_slope(int component) const
{
    Eigen::MatrixXd A(static_cast<Eigen::Index>(residuals.size()), 2);
    Eigen::VectorXd b(A.rows());
    Eigen::Index n = 0;
    for (const auto& s : residuals) {
        const double r = component == 0 ? s.residual_u : s.residual_v;
        if (r == 0.0)
            continue;
        A(n, 0) = 1.0;
        A(n, 1) = std::log(s.R);
        b(n) = std::log(std::abs(r));
        ++n;
    }
    if (n < 2)
        return 0.0;
    const Eigen::Vector2d coef = A.topRows(n).colPivHouseholderQr().solve(b.head(n));
    return coef[1];
}

namespace {

// Weighted degrees of the leading monomials, v in f_1 and u^3 in f_2, fix the type:
//   a_2 = k + a_1,  3 a_1 = k + a_2,  with a_1 normalized to 1.
void leading_type(int& type_u, int& type_v, int& k)
{
    Eigen::Matrix2d A;
    A << 1.0, -1.0,
         1.0,  1.0;
    const Eigen::Vector2d rhs(1.0, 3.0);
    const Eigen::Vector2d sol = A.fullPivLu().solve(rhs);
    type_u = 1;
    type_v = static_cast<int>(std::lround(sol[0]));
    k = static_cast<int>(std::lround(sol[1]));
}

} // namespace

QuasiHomogeneityReport quasi_homogeneity_check(const ModelParams& p, const PhasePoint& probe,
                                               const std::vector<double>& R_ladder)
{
    QuasiHomogeneityReport report;
    int k = 0;
    leading_type(report.type_u, report.type_v, k);
    report.order = k + 1;

    const double two_alpha_mu = 2.0 * p.alpha() * p.mu();
    const double u = probe[0], v = probe[1];
    const double hom_u = v;
    const double hom_v = two_alpha_mu * u * u * u;

    for (double R : R_ladder) {
        const double wu = k + report.type_u;
        const double wv = k + report.type_v;
        const PhasePoint scaled(std::pow(R, report.type_u) * u, std::pow(R, report.type_v) * v);
        const Vec2d f = field_tau(p, scaled);
        const double ru = std::pow(R, -wu) * (f[0] - std::pow(R, wu) * hom_u);
        const double rv = std::pow(R, -wv) * (f[1] - std::pow(R, wv) * hom_v);
        report.residuals.push_back({R, ru, rv});
    }

    // Decay: |r(R_{i+1})| <= 1.1 |r(R_i)| at every rung, and the last rung strictly below
    // the first unless the component vanishes identically.
    auto decays = [&](auto get) {
        for (std::size_t i = 1; i < report.residuals.size(); ++i)
            if (std::abs(get(report.residuals[i])) > 1.1 * std::abs(get(report.residuals[i - 1])) + 1e-300)
                return false;
        if (report.residuals.size() < 2)
            return true;
        const double first = std::abs(get(report.residuals.front()));
        const double last = std::abs(get(report.residuals.back()));
        return first == 0.0 ? last == 0.0 : last < first;
    };
    report.certified = !report.residuals.empty() &&
                       decays([](const QuasiHomogeneitySample& s) { return s.residual_u; }) &&
                       decays([](const QuasiHomogeneitySample& s) { return s.residual_v; });
    return report;
}

} // namespace sdp
