#include "sdp/serialize.hpp"

#include <cstdlib>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace sdp {

namespace {

template <typename Enum, std::size_t N>
Enum parse_enum(std::string_view name, const Enum (&all)[N], const char* what)
{
    for (Enum e : all)
        if (to_string(e) == name)
            return e;
    throw Error("unknown " + std::string(what) + " '" + std::string(name) + "'");
}

OrbitMode mode_from_string(std::string_view s)
{
    static const OrbitMode all[] = {OrbitMode::TauTime, OrbitMode::STime, OrbitMode::XTime};
    return parse_enum(s, all, "orbit mode");
}

EventTag tag_from_string(std::string_view s)
{
    static const EventTag all[] = {EventTag::HitUAxis,   EventTag::HitSingularLine, EventTag::ReachedEquilibrium,
                                   EventTag::EnteredChart, EventTag::LeftChart,     EventTag::ClosedLoop,
                                   EventTag::StepLimit,  EventTag::Horizon};
    return parse_enum(s, all, "event tag");
}

Json vec_json(const Vec2d& v) { return Json::array({real_json(v[0]), real_json(v[1])}); }

Vec2d vec_from_json(const Json& j) { return Vec2d(real_from_json(j.at(0)), real_from_json(j.at(1))); }

Json complex_json(const std::complex<double>& z) { return Json::array({real_json(z.real()), real_json(z.imag())}); }

template <typename T, typename F>
Json optional_json(const std::optional<T>& o, F&& f)
{
    return o ? f(*o) : Json(nullptr);
}

Json eq_json(EquilibriumId id) { return std::string(to_string(id)); }

std::optional<EquilibriumId> eq_from(const Json& j)
{
    if (j.is_null())
        return std::nullopt;
    return equilibrium_from_string(j.get<std::string>());
}

} // namespace

Json real_json(double x)
{
    if (std::isnan(x))
        return "nan";
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    return x;
}

double real_from_json(const Json& j)
{
    if (j.is_number())
        return j.get<double>();
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "inf")
            return std::numeric_limits<double>::infinity();
        if (s == "-inf")
            return -std::numeric_limits<double>::infinity();
        if (s == "nan")
            return std::numeric_limits<double>::quiet_NaN();
    }
    throw Error("expected a real number, got " + j.dump());
}

Json to_json(const ModelParams& p) { return Json{{"D", p.D()}, {"alpha", p.alpha()}, {"mu", p.mu()}}; }

ModelParams params_from_json(const Json& j)
{
    if (!j.is_object())
        throw Error("params must be an object");
    for (const auto& [key, value] : j.items())
        if (key != "D" && key != "alpha" && key != "mu")
            throw Error("unknown key '" + key + "' in params");
    auto get = [&](const char* key) {
        if (!j.contains(key))
            throw Error(std::string("params.") + key + " is missing");
        if (!j[key].is_number())
            throw Error(std::string("params.") + key + " must be a number");
        return j[key].get<double>();
    };
    return make_params(get("D"), get("alpha"), get("mu"));
}

Json to_json(const EigenPairs& eig)
{
    Json values = Json::array(), vectors = Json::array();
    for (int i = 0; i < 2; ++i) {
        values.push_back(complex_json(eig.values[i]));
        vectors.push_back(Json::array({complex_json(eig.vectors[i][0]), complex_json(eig.vectors[i][1])}));
    }
    return Json{{"values", values}, {"vectors", vectors}, {"repeated", eig.repeated}, {"defective", eig.defective}};
}

Json to_json(const Equilibrium& eq)
{
    Json j;
    j["id"] = eq_json(eq.id);
    j["frame"] = std::string(to_string(eq.frame));
    j["location"] = vec_json(eq.location);
    j["canonical"] = eq_json(canonical(eq.id));
    j["stability"] = std::string(to_string(eq.stability));
    j["jacobian"] = Json::array({vec_json(eq.jacobian.row(0).transpose()), vec_json(eq.jacobian.row(1).transpose())});
    j["eigen"] = to_json(eq.eigen);
    return j;
}

Json equilibria_json(const ModelParams& p)
{
    Json arr = Json::array();
    for (const Equilibrium& eq : all_equilibria(p))
        arr.push_back(to_json(eq));
    return arr;
}

Json to_json(const Event& ev)
{
    Json j{{"time", real_json(ev.time)}, {"tag", std::string(to_string(ev.tag))}};
    j["eq"] = optional_json(ev.eq, eq_json);
    j["chart"] = optional_json(ev.chart, [](ChartId c) { return Json(std::string(to_string(c))); });
    return j;
}

Json to_json(const AsymptoticFit& fit)
{
    return Json{{"form", std::string(to_string(fit.form))}, {"rate", real_json(fit.rate)},
                {"amplitude", real_json(fit.amplitude)},    {"residual", real_json(fit.residual)},
                {"level", real_json(fit.level)},            {"endpoint", real_json(fit.endpoint)},
                {"samples", fit.samples}};
}

Json orbit_header_json(const Orbit& orbit)
{
    Json j;
    j["mode"] = std::string(to_string(orbit.mode));
    const Origin& o = orbit.origin;
    Json origin;
    origin["eq"] = optional_json(o.eq, eq_json);
    origin["branch"] = optional_json(o.branch, [](Branch b) { return Json(std::string(to_string(b))); });
    origin["frame"] = std::string(to_string(o.frame));
    origin["start"] = vec_json(o.start);
    origin["direction"] = o.direction == Direction::Forward ? "forward" : "backward";
    origin["epsilon"] = real_json(o.epsilon);
    origin["fan_angle"] = optional_json(o.fan_angle, real_json);
    j["origin"] = origin;
    j["source"] = optional_json(orbit.source, eq_json);
    j["target"] = optional_json(orbit.target, eq_json);
    j["domain"] = Json::array({real_json(orbit.domain_lo), real_json(orbit.domain_hi)});
    Json events = Json::array();
    for (const Event& ev : orbit.events)
        events.push_back(to_json(ev));
    j["events"] = events;
    j["sample_count"] = orbit.samples.size();
    return j;
}

Orbit orbit_from_json(const Json& j, std::vector<OrbitSample> samples)
{
    Orbit orbit;
    orbit.mode = mode_from_string(j.at("mode").get<std::string>());
    const Json& o = j.at("origin");
    orbit.origin.eq = eq_from(o.at("eq"));
    if (!o.at("branch").is_null())
        orbit.origin.branch = branch_from_string(o.at("branch").get<std::string>());
    orbit.origin.frame = frame_from_string(o.at("frame").get<std::string>());
    orbit.origin.start = vec_from_json(o.at("start"));
    orbit.origin.direction = o.at("direction") == "forward" ? Direction::Forward : Direction::Backward;
    orbit.origin.epsilon = real_from_json(o.at("epsilon"));
    if (!o.at("fan_angle").is_null())
        orbit.origin.fan_angle = real_from_json(o.at("fan_angle"));
    orbit.source = eq_from(j.at("source"));
    orbit.target = eq_from(j.at("target"));
    orbit.domain_lo = real_from_json(j.at("domain").at(0));
    orbit.domain_hi = real_from_json(j.at("domain").at(1));
    for (const Json& e : j.at("events")) {
        Event ev;
        ev.time = real_from_json(e.at("time"));
        ev.tag = tag_from_string(e.at("tag").get<std::string>());
        ev.eq = eq_from(e.at("eq"));
        if (!e.at("chart").is_null())
            ev.chart = chart_from_string(e.at("chart").get<std::string>());
        orbit.events.push_back(ev);
    }
    if (j.contains("sample_count") && j["sample_count"].get<std::size_t>() != samples.size())
        throw Error("sample count does not match the CSV");
    orbit.samples = std::move(samples);
    return orbit;
}

Json to_json(const ConnectionGraph& g)
{
    Json j;
    Json orbits = Json::array();
    for (std::size_t i = 0; i < g.orbits.size(); ++i) {
        const Orbit& o = g.orbits[i];
        const Event* last = o.terminal();
        orbits.push_back(Json{{"launch", g.launches[i]},
                              {"source", optional_json(o.source, eq_json)},
                              {"target", optional_json(o.target, eq_json)},
                              {"stop", last ? std::string(to_string(last->tag)) : std::string("none")},
                              {"samples", o.samples.size()}});
    }
    j["orbits"] = orbits;
    Json edges = Json::array();
    for (const Edge& e : g.edges)
        edges.push_back(Json{{"source", eq_json(e.source)}, {"target", eq_json(e.target)}, {"orbit", e.orbit}});
    j["edges"] = edges;
    Json failures = Json::array();
    for (const LaunchFailure& f : g.failures)
        failures.push_back(Json{{"launch", f.launch}, {"message", f.message}});
    j["failures"] = failures;
    j["periodic_family"] = g.periodic_family;
    j["probe_u0"] = real_json(g.probe_u0);
    j["probe_period"] = real_json(g.probe_period);
    return j;
}

Json to_json(const RegimeReport& r)
{
    Json j;
    j["regime"] = std::string(to_string(r.regime));
    j["within_critical_band"] = r.within_critical_band;
    j["mode"] = std::string(to_string(r.mode));
    j["match"] = r.match;
    j["expected"] = r.expected;
    j["found"] = r.found;
    j["unexpected_bounded"] = r.unexpected_bounded;
    Json types = Json::array();
    for (const EdgeType& t : r.edge_types)
        types.push_back(Json{{"source", eq_json(t.source)},
                             {"target", eq_json(t.target)},
                             {"type", t.label},
                             {"admissible", t.admissible}});
    j["edge_types"] = types;
    j["graph"] = to_json(r.graph);
    return j;
}

Json to_json(const ScanResult& s)
{
    Json j;
    j["D_star"] = real_json(s.D_star);
    j["iterations"] = s.iterations;
    Json samples = Json::array();
    std::string pattern;
    for (const auto& [D, g] : s.g_samples) {
        samples.push_back(Json{{"D", real_json(D)}, {"g", real_json(g)}});
        pattern += g > 0.0 ? '+' : (g < 0.0 ? '-' : '0');
    }
    j["g_samples"] = samples;
    j["sign_pattern"] = pattern;
    j["cross_checked"] = s.cross_checked;
    j["homoclinic_below"] = s.homoclinic_below;
    j["homoclinic_above"] = s.homoclinic_above;
    j["heteroclinic_off"] = s.heteroclinic_off;
    return j;
}

std::string format_real(double x)
{
    char buf[32];
    const int n = std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf, static_cast<std::size_t>(n));
}

void write_orbit_csv(std::ostream& os, const Orbit& orbit, const ModelParams& p)
{
    os << "time,frame,c1,c2,H\n";
    for (const OrbitSample& s : orbit.samples) {
        os << format_real(s.time) << ',' << to_string(s.frame) << ',' << format_real(s.y[0]) << ','
           << format_real(s.y[1]) << ',';
        if (const auto pt = phase_point(s))
            os << format_real(conserved_H(p, *pt));
        os << '\n';
    }
}

namespace {

double parse_real(const std::string& field, std::size_t line)
{
    // strtod reads back inf and nan as printed by %.17g.
    const char* begin = field.c_str();
    char* end = nullptr;
    const double x = std::strtod(begin, &end);
    if (field.empty() || end != begin + field.size())
        throw Error("line " + std::to_string(line) + ": bad number '" + field + "'");
    return x;
}

} // namespace

std::vector<OrbitSample> read_orbit_csv(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line) || line != "time,frame,c1,c2,H")
        throw Error("orbit CSV must start with the header time,frame,c1,c2,H");
    std::vector<OrbitSample> out;
    std::size_t n = 1;
    while (std::getline(is, line)) {
        ++n;
        if (line.empty())
            continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ','))
            fields.push_back(f);
        if (!line.empty() && line.back() == ',')
            fields.emplace_back();
        if (fields.size() != 5)
            throw Error("line " + std::to_string(n) + ": expected 5 fields");
        OrbitSample s;
        s.time = parse_real(fields[0], n);
        try {
            s.frame = frame_from_string(fields[1]);
        } catch (const std::exception&) {
            throw Error("line " + std::to_string(n) + ": unknown frame '" + fields[1] + "'");
        }
        s.y = Vec2d(parse_real(fields[2], n), parse_real(fields[3], n));
        out.push_back(s);
    }
    return out;
}

} // namespace sdp
