#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace halfxtal {

using Cplx = std::complex<double>;

inline constexpr double PI = 3.141592653589793238462643383279502884;

// Thrown when an evaluation would overflow or a growth bound is violated.
struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

// Thrown on malformed configuration / potential specs.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// Value together with its z-derivative, propagated through all closed-form
// cell algebra so Newton steps never need finite differences.
struct Cjet {
    Cplx v{0.0, 0.0};
    Cplx d{0.0, 0.0};

    Cjet() = default;
    Cjet(Cplx value, Cplx deriv) : v(value), d(deriv) {}
    explicit Cjet(double value) : v(value), d(0.0) {}

    friend Cjet operator+(const Cjet& a, const Cjet& b) { return {a.v + b.v, a.d + b.d}; }
    friend Cjet operator-(const Cjet& a, const Cjet& b) { return {a.v - b.v, a.d - b.d}; }
    friend Cjet operator-(const Cjet& a) { return {-a.v, -a.d}; }
    friend Cjet operator*(const Cjet& a, const Cjet& b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
    friend Cjet operator*(double s, const Cjet& a) { return {s * a.v, s * a.d}; }
    friend Cjet operator*(Cplx s, const Cjet& a) { return {s * a.v, s * a.d}; }
    friend Cjet operator/(const Cjet& a, const Cjet& b) {
        Cplx inv = 1.0 / b.v;
        return {a.v * inv, (a.d - a.v * inv * b.d) * inv};
    }
};

// Point on the two-sheeted momentum surface: a complex momentum plus the
// sheet tag that fixes the sign of sin k (and hence which Jost combination
// the point addresses).  For real z inside a gap the tag picks the rim.
enum class Sheet { Physical, Nonphysical };

struct SpectralPoint {
    Cplx z;
    Sheet sheet = Sheet::Physical;
};

inline SpectralPoint physical(Cplx z) { return {z, Sheet::Physical}; }
inline SpectralPoint nonphysical(Cplx z) { return {z, Sheet::Nonphysical}; }

}  // namespace halfxtal
