#include "halfxtal/hill.hpp"

#include <cmath>

namespace halfxtal {

namespace {

FundamentalValues extract(const Mat2z& U) {
    FundamentalValues f;
    f.theta = Cjet(U.m[0][0], U.dm[0][0]);
    f.theta_p = Cjet(U.m[1][0], U.dm[1][0]);
    f.phi = Cjet(U.m[0][1], U.dm[0][1]);
    f.phi_p = Cjet(U.m[1][1], U.dm[1][1]);
    return f;
}

// Entire-function growth bound for the fundamental system: with
// B = exp(|Im z| x + ||p||_x) and z1 = max(1,|z|),
// |theta| <= B, |theta'| <= z1 B, |phi| <= B / z1, |phi'| <= B.
// Violations indicate a broken propagator, so they throw instead of clipping.
void assert_growth(const FundamentalValues& f, Cplx z, double x, double l1) {
    double logB = std::abs(z.imag()) * x + l1;
    if (logB > 690.0) return;  // the guard already capped the magnitude
    double B = std::exp(logB) * (1.0 + 1e-8) + 1e-14;
    double z1 = std::max(1.0, std::abs(z));
    if (std::abs(f.theta.v) > B || std::abs(f.theta_p.v) > z1 * B ||
        std::abs(f.phi.v) * z1 > B || std::abs(f.phi_p.v) > B) {
        throw numeric_error("fundamental system violates its growth bound");
    }
}

}  // namespace

FundamentalValues fundamental_at(const PiecewisePotential& p, Cplx z, double x) {
    if (x < 0.0) throw config_error("fundamental_at needs x >= 0");
    if (x < 1e-14) {
        FundamentalValues f;
        f.theta = Cjet(1.0);
        f.phi_p = Cjet(1.0);
        return f;
    }
    auto seq = CellSequence::of_periodic(p, x);
    Mat2z U = propagate(seq, z);
    FundamentalValues f = extract(U);
    assert_growth(f, z, x, seq.l1_total());
    return f;
}

MonodromyValues monodromy_from(const Mat2z& U) {
    MonodromyValues m;
    m.theta = Cjet(U.m[0][0], U.dm[0][0]);
    m.theta_p = Cjet(U.m[1][0], U.dm[1][0]);
    m.phi = Cjet(U.m[0][1], U.dm[0][1]);
    m.phi_p = Cjet(U.m[1][1], U.dm[1][1]);
    m.delta = 0.5 * (m.phi_p + m.theta);
    m.beta = 0.5 * (m.phi_p - m.theta);
    return m;
}

MonodromyValues monodromy(const PiecewisePotential& p, Cplx z) {
    auto seq = CellSequence::of_periodic(p, 1.0);
    Mat2z U = propagate(seq, z);
    MonodromyValues m = monodromy_from(U);
    assert_growth(extract(U), z, 1.0, seq.l1_total());
    return m;
}

MonodromyValues shifted_monodromy(const PiecewisePotential& p, Cplx z, double tau) {
    tau -= std::floor(tau);  // into [0,1)
    auto seq = CellSequence::of_periodic(p, 1.0, tau);
    Mat2z U = propagate(seq, z);
    return monodromy_from(U);
}

}  // namespace halfxtal
