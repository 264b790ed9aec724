#ifndef SDP_CLASSIFY_HPP
#define SDP_CLASSIFY_HPP

#include <optional>
#include <string>
#include <vector>

#include "sdp/orbits.hpp"

namespace sdp {

enum class ClassifyMode { XMode, TauMode };

std::string_view to_string(ClassifyMode mode);

enum class EndpointTag { One, Inf, MinusInf, QsMinus, QsPlus, MinusKInv };

std::string_view to_string(EndpointTag tag); // "1", "inf", "-inf", "qs-", "qs+", "-1/k"

struct EndpointType {
    EndpointTag tag = EndpointTag::One;
    Side side = Side::Left;
};

/// Type of the limit at one end of an orbit. E1 gives One; E2 gives QsMinus/QsPlus in x-mode
/// and MinusKInv in tau-mode; the (+inf, -inf) and (+inf, +inf) directions give Inf, the
/// (-inf, +inf) and (-inf, -inf) directions MinusInf. Throws UnclassifiableError when the side
/// has no equilibrium arrival (step limit, horizon, closed loop).
EndpointType classify_endpoint(const Orbit& orbit, Side side, ClassifyMode mode);

struct StationaryType {
    std::optional<EndpointType> left;
    std::optional<EndpointType> right;
    bool periodic = false;

    std::string label() const; // "1 to inf", "qs- to qs+", "periodic"
    /// Both ends bounded (no Inf / MinusInf), or periodic.
    bool bounded() const;
};

StationaryType stationary_type(const Orbit& orbit, ClassifyMode mode);

struct Edge {
    EquilibriumId source;
    EquilibriumId target;
    std::size_t orbit; // index into ConnectionGraph::orbits
};

struct LaunchFailure {
    std::string launch;
    std::string message;
};

struct GraphOptions {
    std::optional<double> epsilon; // launch offset; default per equilibrium
    IntegrateOptions integrate{};
    std::vector<double> fan_angles{0.5235987755982988, -0.5235987755982988}; // +-30 degrees
    bool seed_interior = true; // orbit through (3, 0): a clean inf-inf profile
};

struct ConnectionGraph {
    std::vector<Orbit> orbits;
    std::vector<std::string> launches; // one description per orbit
    std::vector<Edge> edges;           // unique (source, target) pairs
    std::vector<LaunchFailure> failures;
    bool periodic_family = false;
    double probe_u0 = 0.0;
    double probe_period = 0.0;

    bool has_edge(EquilibriumId source, EquilibriumId target) const;
    const Orbit* orbit_for(EquilibriumId source, EquilibriumId target) const;
};

/// Shoots all saddle branches of E1 and E2, node fans out of E3 and E5 and into E4 and E6,
/// and probes the periodic family at u0 = 0.1 min(1, D/(2 alpha)). Failures are collected.
ConnectionGraph connection_graph(const ModelParams& p, const GraphOptions& opts = {});

enum class Regime { Sub, Critical, Super };

std::string_view to_string(Regime regime);

/// |D - 2 alpha| < 1e-6 (2 alpha) counts as Critical.
inline constexpr double kCriticalBand = 1e-6;
Regime regime_of(const ModelParams& p);

/// Stationary types predicted for a regime.
std::vector<std::string> expected_types(Regime regime, ClassifyMode mode);

struct EdgeType {
    EquilibriumId source;
    EquilibriumId target;
    std::string label;
    bool admissible; // x-mode only: the orbit stays in u >= -D/(2 alpha)
};

struct RegimeReport {
    Regime regime = Regime::Sub;
    bool within_critical_band = false;
    ClassifyMode mode = ClassifyMode::XMode;
    std::vector<std::string> expected;
    std::vector<std::string> found;
    std::vector<std::string> unexpected_bounded;
    std::vector<EdgeType> edge_types;
    ConnectionGraph graph;
    bool match = false;
};

/// match: expected is contained in found and no bounded type outside expected was found.
/// In x-mode, orbits leaving u >= -D/(2 alpha) are listed but not matched.
RegimeReport regime_report(const ModelParams& p, ClassifyMode mode, const GraphOptions& opts = {});

/// Same, reusing a graph that was already computed.
RegimeReport regime_report(const ModelParams& p, ClassifyMode mode, ConnectionGraph graph);

/// g(D) = H(1, 0) - H(-D/(2 alpha), 0).
double bifurcation_function(double alpha, double mu, double D);

struct ScanResult {
    double D_star = 0.0;
    int iterations = 0;
    std::vector<std::pair<double, double>> g_samples; // (D, g(D)) on an even grid of the range
    bool cross_checked = false;
    bool homoclinic_below = false;   // E2 -> E2 just below D*
    bool homoclinic_above = false;   // E1 -> E1 just above D*
    bool heteroclinic_off = false;   // no E1 <-> E2 edge on either side
};

/// Bisection for the root of g to relative tolerance rel_tol. When cross_check is set, builds
/// the connection graphs at D* (1 -+ 0.1). Throws BracketError when g does not change sign.
ScanResult bifurcation_scan(double alpha, double mu, double D_min, double D_max, bool cross_check = true,
                            double rel_tol = 1e-10);

struct ProfileSample {
    double x;
    double u;
    double ux;
};

struct FeaturePoint {
    std::string name; // "x0", "x*", "x_*" or "turn"
    double x;
    double u;
};

struct Profile {
    std::vector<ProfileSample> samples;
    std::vector<FeaturePoint> features;
    std::string type_label;
};

/// (x, u, u_x) along an x-time orbit with u_x = v / (D + 2 alpha u), and the zeros of u_x.
/// Throws PatternViolationError when the sign structure of u_x contradicts the type
/// (qs- to qs+: up then down with 0 < u(x*) < 1; 1 to 1 and inf to inf: down then up).
Profile profile(const Orbit& orbit, const ModelParams& p);

} // namespace sdp

#endif // SDP_CLASSIFY_HPP
