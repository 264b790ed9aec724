#include "sdp/equilibria.hpp"

#include <cmath>
#include <string>

namespace sdp {

namespace {

constexpr std::array<std::string_view, kEquilibriumCount> kNames{"E0", "E1", "E2", "E3", "E4", "E5",
                                                                  "E6", "E7", "E8", "E9", "E10"};

Vec2cd normalized(Vec2cd v)
{
    const double n = v.norm();
    if (n == 0.0)
        return v;
    if (std::abs(v[0]) > 1e-12 * n)
        return v / v[0];
    v /= n;
    // Fix the sign so that the largest component is real positive.
    const int k = std::abs(v[1]) > std::abs(v[0]) ? 1 : 0;
    if (std::abs(v[k]) > 0.0)
        v *= std::abs(v[k]) / v[k];
    return v;
}

Vec2cd eigenvector_for(const Mat2d& m, std::complex<double> lambda)
{
    const double a = m(0, 0), b = m(0, 1), c = m(1, 0), d = m(1, 1);
    Vec2cd v;
    if (std::abs(b) >= std::abs(c) && b != 0.0)
        v << b, lambda - a;
    else if (c != 0.0)
        v << lambda - d, c;
    else if (std::abs(lambda - a) <= std::abs(lambda - d))
        v << 1.0, 0.0;
    else
        v << 0.0, 1.0;
    return normalized(v);
}

} // namespace

std::string_view to_string(EquilibriumId id) { return kNames[static_cast<std::size_t>(id)]; }

EquilibriumId equilibrium_from_string(std::string_view name)
{
    for (std::size_t i = 0; i < kNames.size(); ++i)
        if (kNames[i] == name)
            return static_cast<EquilibriumId>(i);
    throw Error("unknown equilibrium '" + std::string(name) + "'");
}

EquilibriumId canonical(EquilibriumId id)
{
    switch (id) {
    case EquilibriumId::E7: return EquilibriumId::E5;
    case EquilibriumId::E8: return EquilibriumId::E4;
    case EquilibriumId::E9: return EquilibriumId::E3;
    case EquilibriumId::E10: return EquilibriumId::E6;
    default: return id;
    }
}

EquilibriumId reversal_image(EquilibriumId id)
{
    switch (id) {
    case EquilibriumId::E3: return EquilibriumId::E4;
    case EquilibriumId::E4: return EquilibriumId::E3;
    case EquilibriumId::E5: return EquilibriumId::E6;
    case EquilibriumId::E6: return EquilibriumId::E5;
    case EquilibriumId::E7: return EquilibriumId::E10;
    case EquilibriumId::E10: return EquilibriumId::E7;
    case EquilibriumId::E8: return EquilibriumId::E9;
    case EquilibriumId::E9: return EquilibriumId::E8;
    default: return id;
    }
}

std::string_view to_string(Stability s)
{
    switch (s) {
    case Stability::Saddle: return "Saddle";
    case Stability::Center: return "Center";
    case Stability::StableNode: return "StableNode";
    case Stability::UnstableNode: return "UnstableNode";
    }
    return "?";
}

EigenPairs eigen2(const Mat2d& m)
{
    EigenPairs out;
    const double a = m(0, 0), b = m(0, 1), c = m(1, 0), d = m(1, 1);
    const double half_tr = 0.5 * (a + d);
    const double half_diff = 0.5 * (a - d);
    const double disc = half_diff * half_diff + b * c;
    const double scale = m.cwiseAbs().maxCoeff();
    const double disc_tol = 1e-14 * scale * scale;

    if (std::abs(disc) <= disc_tol) {
        out.repeated = true;
        out.values = {half_tr, half_tr};
        const bool scalar = std::abs(b) <= 1e-14 * scale && std::abs(c) <= 1e-14 * scale;
        if (scalar) {
            out.vectors[0] << 1.0, 0.0;
            out.vectors[1] << 0.0, 1.0;
        } else {
            out.defective = true;
            out.vectors[0] = eigenvector_for(m, half_tr);
            out.vectors[1] = out.vectors[0];
        }
        return out;
    }

    if (disc > 0.0) {
        const double sq = std::sqrt(disc);
        // Avoid cancellation in the smaller root.
        const double big = half_tr >= 0.0 ? half_tr + sq : half_tr - sq;
        const double det = a * d - b * c;
        const double other = big != 0.0 ? det / big : half_tr - sq;
        const double hi = std::max(big, other), lo = std::min(big, other);
        out.values = {hi, lo};
    } else {
        const double sq = std::sqrt(-disc);
        out.values = {std::complex<double>(half_tr, sq), std::complex<double>(half_tr, -sq)};
    }
    out.vectors[0] = eigenvector_for(m, out.values[0]);
    out.vectors[1] = eigenvector_for(m, out.values[1]);
    return out;
}

Stability classify_stability(const EigenPairs& eig)
{
    const auto& l0 = eig.values[0];
    const auto& l1 = eig.values[1];
    const double scale = std::max(std::abs(l0), std::abs(l1));
    if (scale == 0.0)
        throw InvariantError("equilibrium with zero linearization");
    if (std::abs(l0.imag()) > 1e-12 * scale) {
        if (std::abs(l0.real()) <= 1e-12 * scale)
            return Stability::Center;
        throw InvariantError("focus-type equilibrium does not occur for this field");
    }
    const double r0 = l0.real(), r1 = l1.real();
    if (std::abs(r0) <= 1e-14 * scale || std::abs(r1) <= 1e-14 * scale)
        throw InvariantError("non-hyperbolic real eigenvalue");
    if (r0 < 0.0 && r1 < 0.0)
        return Stability::StableNode;
    if (r0 > 0.0 && r1 > 0.0)
        return Stability::UnstableNode;
    return Stability::Saddle;
}

namespace {

Equilibrium make(EquilibriumId id, Frame frame, const Vec2d& loc, const Mat2d& J,
                 const std::array<std::complex<double>, 2>& closed_form)
{
    Equilibrium e;
    e.id = id;
    e.frame = frame;
    e.location = loc;
    e.jacobian = J;
    e.eigen.values = closed_form;
    e.eigen.vectors = {eigenvector_for(J, closed_form[0]), eigenvector_for(J, closed_form[1])};
    e.stability = classify_stability(e.eigen);
    return e;
}

} // namespace

std::vector<Equilibrium> finite_equilibria(const ModelParams& p)
{
    const double D = p.D(), a = p.alpha(), m = p.mu();
    std::vector<Equilibrium> out;
    out.reserve(3);

    Mat2d J0;
    J0 << 0.0, 1.0, -m * D, 0.0;
    const double w0 = std::sqrt(m * D);
    out.push_back(make(EquilibriumId::E0, Frame::Interior, Vec2d::Zero(), J0,
                       {std::complex<double>(0.0, w0), std::complex<double>(0.0, -w0)}));

    Mat2d J1;
    J1 << 0.0, 1.0, 2.0 * a * m + m * D, 0.0;
    out.push_back(make(EquilibriumId::E1, Frame::Interior, Vec2d(1.0, 0.0), J1, {p.omega_plus(), p.omega_minus()}));

    Mat2d J2;
    J2 << 0.0, 1.0, m * D * (2.0 * a + D) / (2.0 * a), 0.0;
    out.push_back(
        make(EquilibriumId::E2, Frame::Interior, Vec2d(p.u_singular(), 0.0), J2, {p.Lambda_plus(), p.Lambda_minus()}));
    return out;
}

std::vector<Equilibrium> all_equilibria(const ModelParams& p)
{
    std::vector<Equilibrium> out = finite_equilibria(p);
    const double r = p.sqrt_alpha_mu();
    const double c = p.mu() * (2.0 * p.alpha() - p.D());
    const double M3 = std::pow(p.M(), 3);
    const double q = p.alpha() * p.mu() * M3;
    const double cq = 0.5 * c * M3;

    auto mat = [](double a00, double a10, double a11) {
        Mat2d J;
        J << a00, 0.0, a10, a11;
        return J;
    };

    int next = 3;
    for (ChartId chart : kAllCharts) {
        const auto eqs = infinity_equilibria(chart, p);
        const Frame frame = frame_of(chart);
        Mat2d Jrep, Jatt;
        double rep, att;
        switch (chart) {
        case ChartId::U1:
            Jrep = mat(r, -c, 4.0 * r);
            Jatt = mat(-r, -c, -4.0 * r);
            rep = r;
            break;
        case ChartId::V1:
            Jrep = mat(r, c, 4.0 * r);
            Jatt = mat(-r, c, -4.0 * r);
            rep = r;
            break;
        case ChartId::U2:
            Jrep = mat(q, -cq, 4.0 * q);
            Jatt = mat(-q, cq, -4.0 * q);
            rep = q;
            break;
        case ChartId::V2:
        default:
            Jrep = mat(q, cq, 4.0 * q);
            Jatt = mat(-q, -cq, -4.0 * q);
            rep = q;
            break;
        }
        att = -rep;
        out.push_back(make(static_cast<EquilibriumId>(next++), frame, eqs[0].lambda, Jrep, {4.0 * rep, rep}));
        out.push_back(make(static_cast<EquilibriumId>(next++), frame, eqs[1].lambda, Jatt, {att, 4.0 * att}));
    }
    return out;
}

Equilibrium equilibrium(const ModelParams& p, EquilibriumId id)
{
    if (is_finite(id))
        return finite_equilibria(p)[static_cast<std::size_t>(id)];
    return all_equilibria(p)[static_cast<std::size_t>(id)];
}

Vec2d frame_field(const ModelParams& p, Frame frame, const Vec2d& y)
{
    if (frame == Frame::Interior)
        return field_tau(p, y);
    return chart_field(chart_of(frame), y, p);
}

} // namespace sdp
