#include "halfxtal/perturbed.hpp"

#include <cmath>
#include <utility>

namespace halfxtal {

int support_period_count(double t) {
    return std::max(1, static_cast<int>(std::ceil(t - 1e-12)));
}

FEvaluator::FEvaluator(PiecewisePotential p, PiecewisePotential q)
    : p_(std::move(p)),
      q_(std::move(q)),
      t_(q_.effective_support()),
      n_t_(support_period_count(t_)),
      seq_period_(CellSequence::of_periodic(p_, 1.0)),
      seq_pq_t_(CellSequence::combined(p_, q_, t_)),
      seq_p_t_(t_ > 0.0 ? CellSequence::of_periodic(p_, t_) : CellSequence::combined(p_, q_, 0.0)),
      seq_pq_nt_(CellSequence::combined(p_, q_, static_cast<double>(n_t_))) {
    if (p_.kind() != PiecewisePotential::Kind::Periodic)
        throw config_error("the background potential must be periodic");
    if (q_.kind() != PiecewisePotential::Kind::Compact)
        throw config_error("the perturbation must be compact");
}

MonodromyValues FEvaluator::monodromy_at(Cplx z) const {
    return monodromy_from(propagate(seq_period_, z));
}

PerturbedValues FEvaluator::perturbed_at(Cplx z) const {
    PerturbedValues out;
    out.n_t = n_t_;

    Mat2z U = propagate(seq_pq_t_, z);  // p+q transfer over [0,t]
    Mat2z W = propagate(seq_p_t_, z);   // p-only transfer over [0,t]
    left_multiply_inverse(U, W);        // columns: (tilde theta, tilde phi) at 0

    out.theta0 = Cjet{W.m[0][0], W.dm[0][0]};
    out.theta0_p = Cjet{W.m[1][0], W.dm[1][0]};
    out.phi0 = Cjet{W.m[0][1], W.dm[0][1]};
    out.phi0_p = Cjet{W.m[1][1], W.dm[1][1]};

    // y1, y2 fixed at x = t: columns of U^{-1} (adjugate, det = 1)
    out.y1_0 = Cjet{U.m[1][1], U.dm[1][1]};
    out.y1_0_p = Cjet{-U.m[1][0], -U.dm[1][0]};
    out.y2_0 = Cjet{-U.m[0][1], -U.dm[0][1]};
    out.y2_0_p = Cjet{U.m[0][0], U.dm[0][0]};

    Mat2z V = propagate(seq_pq_nt_, z);
    out.Phi_nt = Cjet{V.m[0][1], V.dm[0][1]};
    out.Phi_nt_p = Cjet{V.m[1][1], V.dm[1][1]};
    return out;
}

namespace {

// Dirichlet-type solution of p+q at x = n_t, with z-derivatives.
struct PhiPair {
    Cjet value, slope;
};

PhiPair phi_nt(const CellSequence& seq, Cplx z) {
    Mat2z V = propagate(seq, z);
    return PhiPair{Cjet{V.m[0][1], V.dm[0][1]}, Cjet{V.m[1][1], V.dm[1][1]}};
}

}  // namespace

Cjet FEvaluator::F(Cplx z) const {
    double scale = 0.0;
    return F(z, scale);
}

Cjet FEvaluator::F(Cplx z, double& scale_out) const {
    MonodromyValues m = monodromy_at(z);
    PhiPair w = phi_nt(seq_pq_nt_, z);
    double a = std::abs(m.phi.v * w.slope.v * w.slope.v);
    double b = 2.0 * std::abs(m.beta.v * w.value.v * w.slope.v);
    double c = std::abs(m.theta_p.v * w.value.v * w.value.v);
    scale_out = a + b + c + 1e-300;
    return m.phi * (w.slope * w.slope) - 2.0 * (m.beta * (w.value * w.slope)) -
           m.theta_p * (w.value * w.value);
}

double FEvaluator::F_scale(Cplx z) const {
    double scale = 0.0;
    F(z, scale);
    return scale;
}

Cplx FEvaluator::jost_numerator(SpectralPoint pt) const {
    MonodromyValues m = monodromy_at(pt.z);
    PhiPair w = phi_nt(seq_pq_nt_, pt.z);
    Cplx s = sin_k(m, pt);
    Cplx xi = m.delta.v + Cplx(0.0, 1.0) * s;
    Cplx a = m.phi.v * w.slope.v - (m.beta.v + Cplx(0.0, 1.0) * s) * w.value.v;
    return std::pow(xi, n_t_) * a;
}

Cplx FEvaluator::jost(SpectralPoint pt) const {
    MonodromyValues m = monodromy_at(pt.z);
    if (std::abs(m.phi.v) < 1e-12)
        throw numeric_error(
            "Psi(0) has a pole where phi(1, z) vanishes; evaluate the entire F instead");
    PerturbedValues v = perturbed_at(pt.z);
    Cplx s = sin_k(m, pt);
    return v.theta0.v + (m.beta.v + Cplx(0.0, 1.0) * s) / m.phi.v * v.phi0.v;
}

PerturbedValues perturbed_values(const PiecewisePotential& p, const PiecewisePotential& q, Cplx z) {
    return FEvaluator(p, q).perturbed_at(z);
}

BigPhiValues big_phi(const PiecewisePotential& p, const PiecewisePotential& q, Cplx z, double x) {
    CellSequence seq = CellSequence::combined(p, q, x);
    Mat2z V = propagate(seq, z);
    return BigPhiValues{Cjet{V.m[0][1], V.dm[0][1]}, Cjet{V.m[1][1], V.dm[1][1]}};
}

Cplx jost(const PiecewisePotential& p, const PiecewisePotential& q, SpectralPoint pt) {
    return FEvaluator(p, q).jost(pt);
}

Cjet entire_F(const PiecewisePotential& p, const PiecewisePotential& q, Cplx z) {
    return FEvaluator(p, q).F(z);
}

Cplx smatrix(const PiecewisePotential& p, const PiecewisePotential& q, double lambda) {
    if (lambda <= 0.0) throw config_error("the scattering matrix lives on lambda > 0");
    double z = std::sqrt(lambda);
    FEvaluator ev(p, q);
    MonodromyValues m = ev.monodromy_at(Cplx(z, 0.0));
    if (std::abs(m.delta.v.real()) > 1.0)
        throw config_error("lambda lies in a spectral gap; S(lambda) is defined on bands only");
    Cplx num = ev.jost_numerator(nonphysical(Cplx(z, 0.0)));
    Cplx den = ev.jost_numerator(physical(Cplx(z, 0.0)));
    return num / den;
}

JostConsistency jost_integral_residual(const PiecewisePotential& p, const PiecewisePotential& q,
                                       SpectralPoint pt, int refine) {
    FEvaluator ev(p, q);
    Cplx z = pt.z;
    MonodromyValues m = ev.monodromy_at(z);
    PerturbedValues v = ev.perturbed_at(z);
    Cplx s = sin_k(m, pt);
    Cplx mw = (m.beta.v + Cplx(0.0, 1.0) * s) / m.phi.v;  // Weyl m-function of the sheet

    Cplx psi0 = v.theta0.v + mw * v.phi0.v;
    Cplx psi0_p = v.theta0_p.v + mw * v.phi0_p.v;

    // integral of phi(x) q(x) Psi(x) over [0,t], per cell of the merged mesh;
    // trapezoid at two dyadic levels, Richardson-combined
    CellSequence grid = CellSequence::combined(p, q, q.effective_support());
    int fine = 1 << std::max(1, refine);
    Cplx acc(0.0, 0.0);
    Cplx phi_pair[2] = {Cplx(0.0, 0.0), Cplx(1.0, 0.0)};   // (phi, phi')
    Cplx psi_pair[2] = {psi0, psi0_p};
    for (std::size_t i = 0; i < grid.count(); ++i) {
        const Cell& c = grid.cells()[i];
        double mid = grid.boundary(i) + 0.5 * c.width;
        double vp = p.value_at(mid);
        double vq = c.value - vp;
        double h = c.width / fine;
        Mat2z Mp = cell_matrix(Cell{h, vp}, z);
        Mat2z Mq = cell_matrix(Cell{h, c.value}, z);
        Cplx f0[2] = {phi_pair[0], phi_pair[1]};
        Cplx g0[2] = {psi_pair[0], psi_pair[1]};
        Cplx coarse(0.0, 0.0), fine_sum(0.0, 0.0);
        for (int j = 0; j <= fine; ++j) {
            Cplx val = f0[0] * vq * g0[0];
            double wgt = (j == 0 || j == fine) ? 0.5 : 1.0;
            fine_sum += wgt * val;
            if (j % 2 == 0) coarse += ((j == 0 || j == fine) ? 0.5 : 1.0) * val;
            if (j < fine) {
                Cplx a = Mp.m[0][0] * f0[0] + Mp.m[0][1] * f0[1];
                Cplx b = Mp.m[1][0] * f0[0] + Mp.m[1][1] * f0[1];
                f0[0] = a;
                f0[1] = b;
                a = Mq.m[0][0] * g0[0] + Mq.m[0][1] * g0[1];
                b = Mq.m[1][0] * g0[0] + Mq.m[1][1] * g0[1];
                g0[0] = a;
                g0[1] = b;
            }
        }
        Cplx tf = fine_sum * h;
        Cplx tc = coarse * (2.0 * h);
        acc += (4.0 * tf - tc) / 3.0;
        phi_pair[0] = f0[0];
        phi_pair[1] = f0[1];
        psi_pair[0] = g0[0];
        psi_pair[1] = g0[1];
    }

    JostConsistency out;
    out.lhs = psi0;
    out.rhs = 1.0 + acc;
    out.residual = std::abs(out.lhs - out.rhs) / (1.0 + std::abs(out.lhs));
    return out;
}

}  // namespace halfxtal
