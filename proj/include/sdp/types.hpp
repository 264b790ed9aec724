#ifndef SDP_TYPES_HPP
#define SDP_TYPES_HPP

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace sdp {

template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Mat2 = Eigen::Matrix<Scalar, 2, 2>;

using Vec2d = Vec2<double>;
using Mat2d = Eigen::Matrix2d;
using Vec2cd = Eigen::Vector2cd;

// A point of the finite (u, v) plane: [0] = u (density), [1] = v = (D + 2 alpha u) u_x.
using PhasePoint = Vec2d;

// Error hierarchy. Every failure raised by the library derives from Error.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParameterDomainError : Error {
    using Error::Error;
};
struct SingularLineError : Error {
    using Error::Error;
};
struct ChartDomainError : Error {
    using Error::Error;
};
struct InfinityError : Error {
    using Error::Error;
};
struct IntegrationError : Error {
    using Error::Error;
};
struct InvalidBranchError : Error {
    using Error::Error;
};
struct FitError : Error {
    using Error::Error;
};
struct NonPeriodicError : Error {
    using Error::Error;
};
struct UnclassifiableError : Error {
    using Error::Error;
};
struct BracketError : Error {
    using Error::Error;
};
struct PatternViolationError : Error {
    using Error::Error;
};
struct ReparameterizationError : Error {
    using Error::Error;
};
struct InvariantError : Error {
    using Error::Error;
};

} // namespace sdp

#endif // SDP_TYPES_HPP
