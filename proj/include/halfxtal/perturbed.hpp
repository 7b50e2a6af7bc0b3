#pragma once

#include "halfxtal/band.hpp"
#include "halfxtal/hill.hpp"
#include "halfxtal/potential.hpp"
#include "halfxtal/propagator.hpp"
#include "halfxtal/types.hpp"

namespace halfxtal {

// Values at x = 0 of the perturbed fundamental system (tilde theta / tilde phi
// agree with theta / phi for x >= t and are pulled back through p+q), of the
// auxiliary pair y1, y2 fixed by y2'(t) = y1(t) = 1, y2(t) = y1'(t) = 0, and of
// the Dirichlet-type solution Phi (Phi(0) = 0, Phi'(0) = 1) at x = n_t.
struct PerturbedValues {
    Cjet theta0, theta0_p;
    Cjet phi0, phi0_p;
    Cjet y1_0, y1_0_p;
    Cjet y2_0, y2_0_p;
    Cjet Phi_nt, Phi_nt_p;
    int n_t = 1;
};

// Caches the cell decompositions of a fixed (p, q) pair so scan loops do not
// rebuild them per evaluation.
class FEvaluator {
public:
    FEvaluator(PiecewisePotential p, PiecewisePotential q);

    const PiecewisePotential& p() const { return p_; }
    const PiecewisePotential& q() const { return q_; }
    int n_t() const { return n_t_; }

    MonodromyValues monodromy_at(Cplx z) const;
    PerturbedValues perturbed_at(Cplx z) const;

    // Entire state function with derivative, assembled as
    //   F = phi(1) Phi'(n_t)^2 - 2 beta Phi(n_t) Phi'(n_t) - theta'(1) Phi(n_t)^2.
    // This equals phi(1) th0^2 + 2 beta th0 ph0 - theta'(1) ph0^2 (th0 = tilde
    // theta(0), ph0 = tilde phi(0)) but stays fully conditioned at large
    // |Im z| t, where the tilde form cancels e^{2t|Im z|} digits.
    Cjet F(Cplx z) const;

    // F plus the summand magnitude from the same propagation pass.
    Cjet F(Cplx z, double& scale_out) const;

    // Magnitude scale of the three F summands at z (for relative residuals).
    double F_scale(Cplx z) const;

    // A(+-) = phi(1) * Psi0 on the requested sheet (entire through mu_n),
    // evaluated as xi^{n_t} (phi(1) Phi'(n_t) - (beta + i sin k) Phi(n_t)).
    Cplx jost_numerator(SpectralPoint pt) const;
    // Psi0 = tilde theta(0) + m tilde phi(0), m = (beta + i sin k)/phi(1).
    // Errors out near poles (|phi(1)| < 1e-12); use F there instead.
    Cplx jost(SpectralPoint pt) const;

private:
    PiecewisePotential p_, q_;
    double t_;
    int n_t_;
    CellSequence seq_period_;  // p on [0,1]
    CellSequence seq_pq_t_;    // p+q on [0,t]
    CellSequence seq_p_t_;     // p on [0,t]
    CellSequence seq_pq_nt_;   // p+q on [0,n_t]
};

// n_t = smallest integer >= t.
int support_period_count(double t);

PerturbedValues perturbed_values(const PiecewisePotential& p, const PiecewisePotential& q, Cplx z);

// Phi(x), Phi'(x) for cell-aligned x in [0, n_t].
struct BigPhiValues {
    Cjet value, slope;
};
BigPhiValues big_phi(const PiecewisePotential& p, const PiecewisePotential& q, Cplx z, double x);

Cplx jost(const PiecewisePotential& p, const PiecewisePotential& q, SpectralPoint pt);
Cjet entire_F(const PiecewisePotential& p, const PiecewisePotential& q, Cplx z);

// S(lambda) = conj(D)/D on the unitarity circle, D the modified Jost function
// evaluated on the physical rim of a band point.
Cplx smatrix(const PiecewisePotential& p, const PiecewisePotential& q, double lambda);

// Residual of the self-consistency equation
//   Psi(0,z) = 1 + int_0^t phi(x,z) q(x) Psi(x,z) dx
// via Richardson-extrapolated per-cell trapezoid quadrature.
struct JostConsistency {
    Cplx lhs, rhs;
    double residual;  // |lhs - rhs| / (1 + |lhs|)
};
JostConsistency jost_integral_residual(const PiecewisePotential& p, const PiecewisePotential& q,
                                       SpectralPoint pt, int refine = 6);

}  // namespace halfxtal
