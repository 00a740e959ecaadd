#ifndef TCLAB_TYPES_HPP
#define TCLAB_TYPES_HPP

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace tclab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class Backend { Chain, Diffusion };

// All failures surface as typed exceptions rooted here.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NonSubMarkovian : public Error { public: using Error::Error; };
class NotTransient : public Error { public: using Error::Error; };
class NotIrreducible : public Error { public: using Error::Error; };
class OutOfDomain : public Error { public: using Error::Error; };
class SingularSystem : public Error { public: using Error::Error; };
class QuadratureFailure : public Error { public: using Error::Error; };
class ValidationFailed : public Error { public: using Error::Error; };
class BadParameters : public Error { public: using Error::Error; };
class HypothesisFailed : public Error { public: using Error::Error; };
class ModeMismatch : public Error { public: using Error::Error; };
class ExtensionFailed : public Error { public: using Error::Error; };
class CounterexampleFound : public Error { public: using Error::Error; };
class ConfigError : public Error { public: using Error::Error; };
class CheckFailed : public Error { public: using Error::Error; };
class ToleranceExceeded : public Error { public: using Error::Error; };

/// Function-space tag: bounded Borel vs vanishing at infinity.
enum class FuncClass { Bb, C0 };

/// A function on the state space, sampled on the chain's states or the
/// diffusion's grid.  Off-grid diffusion values are linearly interpolated.
struct FunctionOnX {
    Vec values;
    FuncClass cls = FuncClass::Bb;

    FunctionOnX() = default;
    FunctionOnX(Vec v, FuncClass c = FuncClass::Bb) : values(std::move(v)), cls(c) {}

    Eigen::Index size() const { return values.size(); }
    double sup_norm() const { return values.size() ? values.cwiseAbs().maxCoeff() : 0.0; }
};

inline double sup_norm(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

/// Operator sup-norm (maximum absolute row sum).
inline double op_sup_norm(const Mat& a) {
    double r = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) r = std::max(r, a.row(i).cwiseAbs().sum());
    return r;
}

}  // namespace tclab

#endif
