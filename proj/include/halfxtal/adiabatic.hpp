#pragma once

#include <vector>

#include "halfxtal/band.hpp"
#include "halfxtal/potential.hpp"
#include "halfxtal/states.hpp"

namespace halfxtal {

// Unwrapped Pruefer angle theta(X) of -u'' + v u = lambda u with u(0) = 0,
// u'(0) = 1, theta(0) = 0, computed exactly per cell (zero counts of the
// closed-form cell solution, no ODE stepping).  floor(theta(X)/pi) equals the
// number of Dirichlet eigenvalues below lambda on [0, X].
double pruefer_angle(const CellSequence& seq, double lambda);

// Same for the slow perturbation p + q(./tau) on [0, X].
double pruefer_angle(const PiecewisePotential& p, const PiecewisePotential& q, double tau,
                     double lambda, double X);

// integral over x of [rho(E2 - q(x)) - rho(E1 - q(x))]: the adiabatic bound-state
// density; the integrand vanishes identically beyond the support of q when
// [E1, E2] lies inside a gap.
double dos_integral(const PiecewisePotential& p, const PiecewisePotential& q, double E1, double E2);

struct AdiabaticRow {
    double tau = 0.0;
    long dirichlet_count = 0;   // Pruefer window count on [0, t tau]
    long bound_states = 0;      // eigenvalues of H_tau in (E1, E2) from the state scan
    long antibound_states = 0;  // antibound states on the mirrored interval
    double predicted = 0.0;     // tau * dos_integral
};

struct AdiabaticReport {
    std::vector<AdiabaticRow> rows;
    double E1 = 0.0, E2 = 0.0;
    double slope_rel_err = 0.0;  // |count/predicted - 1| at the largest tau
    bool inequality_ok = true;   // antibound >= 1 + bound at every tau
    bool window_ok = true;       // |dirichlet_count - bound_states| <= 5
};

// Counts bound / antibound states of H_tau = H0 + q(./tau) inside the energy
// window (E1, E2) (contained in a gap) for each tau, against the adiabatic
// prediction tau * dos_integral.
AdiabaticReport adiabatic_check(const PiecewisePotential& p, const PiecewisePotential& q,
                                const std::vector<double>& taus, double E1, double E2,
                                const StatesOptions& opts = {});

}  // namespace halfxtal
