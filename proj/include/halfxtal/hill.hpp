#pragma once

#include "halfxtal/potential.hpp"
#include "halfxtal/propagator.hpp"
#include "halfxtal/types.hpp"

namespace halfxtal {

// Canonical fundamental system of -y'' + p y = z^2 y with
// theta(0) = phi'(0) = 1, theta'(0) = phi(0) = 0, all with z-derivatives.
struct FundamentalValues {
    Cjet theta, theta_p;  // theta(x), theta'(x)
    Cjet phi, phi_p;      // phi(x),   phi'(x)
};

// Monodromy data over one period: fundamental values at x = 1 plus the
// Lyapunov function delta = (phi'(1)+theta(1))/2 and beta = (phi'(1)-theta(1))/2.
struct MonodromyValues {
    Cjet theta, theta_p, phi, phi_p;
    Cjet delta, beta;
};

// Fundamental system at arbitrary x >= 0 (p extended periodically).
FundamentalValues fundamental_at(const PiecewisePotential& p, Cplx z, double x);

MonodromyValues monodromy(const PiecewisePotential& p, Cplx z);

// Monodromy of the shifted potential p(. + tau), tau in [0,1); the cell
// containing tau is split exactly.  phi_dot(1,z,tau) = phi'(1,z,tau) - theta(1,z,tau)
// is available as beta * 2... (see MonodromyValues, phi_p - theta).
MonodromyValues shifted_monodromy(const PiecewisePotential& p, Cplx z, double tau);

MonodromyValues monodromy_from(const Mat2z& U);

}  // namespace halfxtal
