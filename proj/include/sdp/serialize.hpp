#ifndef SDP_SERIALIZE_HPP
#define SDP_SERIALIZE_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "sdp/classify.hpp"
#include "sdp/equilibria.hpp"
#include "sdp/orbits.hpp"

namespace sdp {

using Json = nlohmann::ordered_json;

// Non-finite reals are written as the strings "inf", "-inf" and "nan".
Json real_json(double x);
double real_from_json(const Json& j);

Json to_json(const ModelParams& p);
/// Reads {"D", "alpha", "mu"}; other keys are rejected. Throws Error.
ModelParams params_from_json(const Json& j);

Json to_json(const EigenPairs& eig);
Json to_json(const Equilibrium& eq);
Json equilibria_json(const ModelParams& p);

Json to_json(const Event& ev);
Json to_json(const AsymptoticFit& fit);

/// Everything in an Orbit except the samples, which go to CSV.
Json orbit_header_json(const Orbit& orbit);
/// Inverse of orbit_header_json, taking the samples read back from CSV.
Orbit orbit_from_json(const Json& j, std::vector<OrbitSample> samples);

Json to_json(const ConnectionGraph& g);
Json to_json(const RegimeReport& r);
Json to_json(const ScanResult& s);

/// %.17g, so that reading back gives the same double.
std::string format_real(double x);

/// Header `time,frame,c1,c2,H`. H is left empty on the circle at infinity.
void write_orbit_csv(std::ostream& os, const Orbit& orbit, const ModelParams& p);
/// Throws Error on a malformed header or row.
std::vector<OrbitSample> read_orbit_csv(std::istream& is);

} // namespace sdp

#endif // SDP_SERIALIZE_HPP
