#include <cmath>
#include <vector>

#include "doctest.h"
#include "halfxtal/adiabatic.hpp"

using namespace halfxtal;

namespace {

PiecewisePotential mathieu(int cells = 256) {
    return normalized(
        sample_periodic([](double x) { return 2.0 * std::cos(2 * PI * x); }, cells));
}

}  // namespace

TEST_CASE("Pruefer angle is exact on free cells") {
    CellSequence seq = CellSequence::of_periodic(PiecewisePotential::periodic({0.0}), 5.0);
    // u = sin(2x)/2 has three zeros in (0, 5]; the terminal point lies in the
    // third quadrant of the (u', u) plane
    double expected = 3.0 * PI + std::atan(std::tan(10.0) / 2.0);
    CHECK(pruefer_angle(seq, 4.0) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(pruefer_angle(seq, 0.0) == doctest::Approx(std::atan(5.0)).epsilon(1e-12));
    // lambda < 0: u = sinh, the angle saturates below pi/2
    CHECK(pruefer_angle(seq, -1.0) == doctest::Approx(std::atan(std::tanh(5.0))).epsilon(1e-12));
    CHECK(pruefer_angle(seq, 2.0) < pruefer_angle(seq, 4.0));
}

TEST_CASE("Pruefer floor counts Dirichlet eigenvalues") {
    CellSequence box = CellSequence::of_periodic(PiecewisePotential::periodic({0.0}), 1.0);
    double four = 4.0 * PI * PI;
    CHECK(std::floor(pruefer_angle(box, four + 0.1) / PI) == 2.0);
    CHECK(std::floor(pruefer_angle(box, four - 0.1) / PI) == 1.0);
    CHECK(std::floor(pruefer_angle(box, 25.0 * PI * PI + 0.1) / PI) == 5.0);

    // the slow-perturbation overload is the combined sequence with q dilated
    PiecewisePotential p = mathieu(64);
    PiecewisePotential q = PiecewisePotential::compact({-1.0, 2.0}, 1.0);
    double tau = 3.0, lambda = 7.0, X = 4.0;
    CellSequence manual = CellSequence::combined(p, q.dilated(tau), X);
    CHECK(pruefer_angle(p, q, tau, lambda, X) ==
          doctest::Approx(pruefer_angle(manual, lambda)).epsilon(1e-13));
}

TEST_CASE("well Dirichlet count matches its bound state") {
    // -d^2/dx^2 - 4 on [0,1] binds a single state near lambda = -0.407
    PiecewisePotential p0 = PiecewisePotential::periodic({0.0});
    PiecewisePotential q = PiecewisePotential::compact({-4.0}, 1.0);
    CHECK(std::floor(pruefer_angle(p0, q, 1.0, 0.0, 8.0) / PI) == 1.0);
    CHECK(std::floor(pruefer_angle(p0, q, 1.0, -0.5, 8.0) / PI) == 0.0);
    CHECK(std::floor(pruefer_angle(p0, q, 1.0, -0.3, 8.0) / PI) == 1.0);
}

TEST_CASE("dos integral reduces to ids differences") {
    PiecewisePotential p = mathieu();
    BandTable table(p);
    const GapRecord& g1 = table.gap(1);
    double lo = g1.e_minus * g1.e_minus, hi = g1.e_plus * g1.e_plus;
    double E1 = lo + 0.25 * (hi - lo), E2 = lo + 0.75 * (hi - lo);

    PiecewisePotential q1 = PiecewisePotential::compact({-1.0}, 1.0);
    double expected = table.ids(E2 + 1.0) - table.ids(E1 + 1.0);
    CHECK(expected > 0.0);
    CHECK(dos_integral(p, q1, E1, E2) == doctest::Approx(expected).epsilon(1e-9));
    // doubling the support doubles the integral; an empty window gives zero
    PiecewisePotential q2 = PiecewisePotential::compact({-1.0, -1.0}, 2.0);
    CHECK(dos_integral(p, q2, E1, E2) == doctest::Approx(2.0 * expected).epsilon(1e-9));
    CHECK_THROWS_AS(dos_integral(p, q1, E1, E1), config_error);
}

TEST_CASE("adiabatic counts track tau times the dos integral") {
    PiecewisePotential p = mathieu();
    PiecewisePotential q = PiecewisePotential::compact({-1.0}, 1.0);
    BandTable table(p);
    const GapRecord& g1 = table.gap(1);
    double lo = g1.e_minus * g1.e_minus, hi = g1.e_plus * g1.e_plus;
    double E1 = lo + 0.25 * (hi - lo), E2 = lo + 0.75 * (hi - lo);

    AdiabaticReport rep = adiabatic_check(p, q, {2.0, 6.0}, E1, E2);
    REQUIRE(rep.rows.size() == 2);
    CHECK(rep.E1 == E1);
    CHECK(rep.E2 == E2);
    CHECK(rep.window_ok);
    double I = dos_integral(p, q, E1, E2);
    for (const AdiabaticRow& r : rep.rows) {
        CHECK(r.predicted == doctest::Approx(r.tau * I).epsilon(1e-12));
        CHECK(r.bound_states >= 0);
        CHECK(std::abs(static_cast<double>(r.bound_states) - r.predicted) <= 3.0);
    }
    CHECK(rep.rows[1].bound_states >= rep.rows[0].bound_states);
    CHECK(rep.slope_rel_err >= 0.0);
}
