#ifndef SDP_ORBITS_HPP
#define SDP_ORBITS_HPP

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "sdp/charts.hpp"
#include "sdp/equilibria.hpp"
#include "sdp/integrator.hpp"
#include "sdp/model.hpp"

namespace sdp {

enum class OrbitMode { TauTime, STime, XTime };
enum class Direction { Forward, Backward };
enum class Branch { UnstablePlus, UnstableMinus, StablePlus, StableMinus };

std::string_view to_string(OrbitMode mode);
std::string_view to_string(Branch branch);
Branch branch_from_string(std::string_view name);
inline bool is_unstable(Branch b) { return b == Branch::UnstablePlus || b == Branch::UnstableMinus; }

enum class EventTag {
    HitUAxis,
    HitSingularLine,
    ReachedEquilibrium,
    EnteredChart,
    LeftChart,
    ClosedLoop,
    StepLimit,
    Horizon, // time budget exhausted
};

std::string_view to_string(EventTag tag);

struct Event {
    double time = 0.0;
    EventTag tag = EventTag::StepLimit;
    std::optional<EquilibriumId> eq;
    std::optional<ChartId> chart;
};

struct OrbitSample {
    double time = 0.0;
    Frame frame = Frame::Interior;
    Vec2d y = Vec2d::Zero(); // (u, v) in the interior, (l1, l2) in a chart
};

struct Origin {
    std::optional<EquilibriumId> eq;
    std::optional<Branch> branch;
    Frame frame = Frame::Interior;
    Vec2d start = Vec2d::Zero();
    Direction direction = Direction::Forward;
    double epsilon = 0.0;
    std::optional<double> fan_angle;
};

/// Samples are stored in integration order; backward integration stores negative, decreasing
/// times. Times switch meaning at chart handoffs (tau in the interior, s in a chart); the step
/// between two neighbouring samples was taken in the frame of the one with larger |time|.
/// Reparameterized orbits are in increasing physical time, and domain_lo/domain_hi hold the
/// limits of the time domain (finite, extrapolated, or +-infinity).
struct Orbit {
    OrbitMode mode = OrbitMode::TauTime;
    std::vector<OrbitSample> samples;
    std::vector<Event> events;
    Origin origin;
    // Equilibria at the alpha- and omega-limits, when known.
    std::optional<EquilibriumId> source;
    std::optional<EquilibriumId> target;
    double domain_lo = std::numeric_limits<double>::quiet_NaN();
    double domain_hi = std::numeric_limits<double>::quiet_NaN();

    const Event* terminal() const { return events.empty() ? nullptr : &events.back(); }
    std::size_t count(EventTag tag) const;
};

struct IntegrateOptions {
    StepControl control{};
    long step_limit = 1000000;
    double horizon = std::numeric_limits<double>::infinity(); // |time| budget
    bool chart_handoff = true;
    double enter_chart_rho = 20.0;
    double exit_chart_rho = 15.0;
    double chart_switch = 2.0;
    // Arrival at nodes: |pt - eq| < node_radius and |field| < field_threshold.
    double node_radius = 1e-8;
    double field_threshold = 1e-8;
    // Arrival at saddles: closest approach inside saddle_radius (1 + |eq|) on the saddle's
    // level of H, to within level_tol (1 + |H|). Points inside node_radius also count.
    double saddle_radius = 1e-3;
    double level_tol = 1e-7;
    bool stop_on_closed_loop = false;
    double event_time_tol = 1e-12;
};

/// Integrates the field of `frame` from start. Backward integration stores decreasing times.
/// Stops at the first of: arrival at an equilibrium other than E0, ClosedLoop (when enabled),
/// the horizon, or the step limit. Throws IntegrationError on step-size underflow.
Orbit integrate(const ModelParams& p, Frame frame, const Vec2d& start, Direction direction,
                const IntegrateOptions& opts = {});

/// Default launch offset 1e-7 (1 + |location|).
double default_epsilon(const Equilibrium& eq);

/// Launch along a saddle branch (Plus: the eigenvector side with larger u). Infinity nodes
/// accept only the Plus branch of their own stability, launched along the weak eigendirection
/// into l1 > 0. Unstable branches integrate forward, stable ones backward. Throws
/// InvalidBranchError when the branch does not exist at eq.
Orbit shoot_saddle(const ModelParams& p, const Equilibrium& eq, Branch branch, std::optional<double> epsilon = {},
                   const IntegrateOptions& opts = {});

/// Node launch turned away from the weak eigendirection toward the circle at infinity:
/// fan_angle in (-pi/2, pi/2) covers the fraction |fan_angle| / (pi/2) of the angle between the
/// weak direction and the boundary on that side. The two signs give orbits on opposite sides
/// of the weak direction.
Orbit shoot_node(const ModelParams& p, const Equilibrium& eq, double fan_angle, std::optional<double> epsilon = {},
                 const IntegrateOptions& opts = {});

/// Orbit through an interior point: backward and forward halves joined in forward order.
Orbit orbit_through(const ModelParams& p, const PhasePoint& pt, const IntegrateOptions& opts = {});

/// Interior phase point of a sample; nullopt on the circle at infinity.
std::optional<PhasePoint> phase_point(const OrbitSample& s);

/// u >= u_singular - tol on every sample (using the direction of u at infinity).
bool x_admissible(const Orbit& orbit, const ModelParams& p, double tol = 1e-9);

/// Sum of the moduli of the terms of H: the size of the numbers whose difference H is.
double h_magnitude(const ModelParams& p, const PhasePoint& pt);

/// Largest drift |H - H0| / (1 + max h_magnitude) over each maximal interior run of samples,
/// H0 being the first value of the run.
double h_drift(const Orbit& orbit, const ModelParams& p);

/// Samples in increasing physical time with x = integral of (D + 2 alpha u) dtau, composite
/// Simpson on cubic Hermite midpoints. Ends at E2 get finite extrapolated limits from an
/// exponential tail fit; other arrivals give +-infinity. Throws ReparameterizationError when
/// the orbit leaves {u >= u_singular}.
Orbit reparameterize_to_x(const Orbit& orbit, const ModelParams& p);

/// Same with tau; chart segments use dtau/ds = l1. Ends at infinity nodes get finite limits.
Orbit reparameterize_to_tau(const Orbit& orbit, const ModelParams& p);

enum class FitForm { ExpGrowth, ExpDecayToLevel, LinearHit, PowerBlowup };
enum class Side { Left, Right };

std::string_view to_string(FitForm form);
std::string_view to_string(Side side);

struct FitWindow {
    FitForm form = FitForm::ExpDecayToLevel;
    Side side = Side::Right;
    double level = 0.0;
    double band = 0.1;         // |u - level| < band for decay and linear fits
    double growth_floor = 10.; // u > growth_floor for growth and power fits
    std::size_t min_samples = 30;
};

struct AsymptoticFit {
    FitForm form = FitForm::ExpDecayToLevel;
    double rate = 0.0;
    double amplitude = 0.0;
    double residual = 0.0;
    double level = 0.0;    // ExpDecayToLevel: the level; LinearHit: u extrapolated to the endpoint
    double endpoint = 0.0; // LinearHit / PowerBlowup: the finite end of the domain
    std::size_t samples = 0;
};

/// Least squares in the transformed space of the form. Throws FitError on short or
/// degenerate windows.
AsymptoticFit fit_asymptotics(const Orbit& orbit, const FitWindow& window);

struct PeriodResult {
    double period = 0.0;
    Orbit orbit;
};

/// Closed orbit through (u0, 0). Throws NonPeriodicError when another stop fires first.
PeriodResult detect_period(const ModelParams& p, double u0, const IntegrateOptions& opts = {});

/// Applies Reversal (x -> -x) to an orbit: v-mirrored samples in reversed order with negated
/// times, endpoint equilibria swapped through reversal_image.
Orbit mirror_orbit(const Orbit& orbit);

/// x-length of the approach to a saddle along a branch, from offset epsilon (which may be far
/// below machine precision relative to the location) out to distance `reach`. Integrated in
/// deviation coordinates with a purely relative tolerance.
double saddle_x_extent(const ModelParams& p, const Equilibrium& eq, Branch branch, double epsilon,
                       double reach = 0.1);

} // namespace sdp

#endif // SDP_ORBITS_HPP
