#ifndef QWALK_TYPES_HPP
#define QWALK_TYPES_HPP

#include <complex>
#include <stdexcept>
#include <string>

namespace qwalk {

using cdouble = std::complex<double>;

inline constexpr cdouble I{0.0, 1.0};

enum class Statistics { Fermion, Boson };

inline const char* to_string(Statistics s) {
    return s == Statistics::Fermion ? "fermion" : "boson";
}

/// Thrown when an internal numerical invariant breaks (norm drift, negative
/// eigenvalue beyond clamp tolerance, ...). Indicates a bug, not bad input.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace qwalk

#endif
