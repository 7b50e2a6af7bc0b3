#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "halfxtal/potential.hpp"

using namespace halfxtal;

TEST_CASE("expression grammar matches closed forms") {
    auto f = parse_potential_expr("2*cos(1)");
    CHECK(f(0.0) == doctest::Approx(2.0));
    CHECK(f(0.25) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(f(0.5) == doctest::Approx(-2.0));

    auto g = parse_potential_expr("sin(1) + 0.6*sin(2)");
    for (double x : {0.0, 0.1, 0.37, 0.93})
        CHECK(g(x) == doctest::Approx(std::sin(2 * PI * x) + 0.6 * std::sin(4 * PI * x)));

    auto s = parse_potential_expr("step(0.25, 0.5, 3) - 1");
    CHECK(s(0.1) == doctest::Approx(-1.0));
    CHECK(s(0.3) == doctest::Approx(2.0));
    CHECK(s(0.5) == doctest::Approx(-1.0));  // right endpoint excluded

    CHECK(parse_potential_expr("-1.5")(0.7) == doctest::Approx(-1.5));
    CHECK_THROWS_AS(parse_potential_expr("cosh(1)"), config_error);
    CHECK_THROWS_AS(parse_potential_expr("2*"), config_error);
}

TEST_CASE("sampling and point evaluation") {
    PiecewisePotential p = sample_periodic([](double) { return 3.5; }, 16);
    CHECK(p.cell_count() == 16);
    CHECK(p.support() == doctest::Approx(1.0));
    CHECK(p.value_at(0.2) == doctest::Approx(3.5));
    CHECK(p.value_at(7.9) == doctest::Approx(3.5));  // periodic extension

    PiecewisePotential q = PiecewisePotential::compact({2.0, -1.0}, 1.0);
    CHECK(q.value_at(0.25) == doctest::Approx(2.0));
    CHECK(q.value_at(0.75) == doctest::Approx(-1.0));
    CHECK(q.value_at(1.5) == 0.0);  // vanishes beyond the support
    CHECK(q.norm_l1(1.0) == doctest::Approx(1.5));
    CHECK(q.total() == doctest::Approx(0.5));
    CHECK(q.min_value() == doctest::Approx(-1.0));
    CHECK(q.max_abs() == doctest::Approx(2.0));
}

TEST_CASE("effective support trims trailing zero cells") {
    CHECK(PiecewisePotential::compact({1.0, 0.0, 0.0}, 3.0).effective_support() ==
          doctest::Approx(1.0));
    CHECK(PiecewisePotential::none().effective_support() == 0.0);
    CHECK(PiecewisePotential::none().is_zero());
    CHECK(PiecewisePotential::compact({0.0, 4.0}, 2.0).effective_support() == doctest::Approx(2.0));
}

TEST_CASE("shift and dilation are exact cell operations") {
    PiecewisePotential q = PiecewisePotential::compact({1.0, -2.0, 0.5}, 1.5);
    PiecewisePotential qs = q.shifted(2.0);
    CHECK(qs.value_at(0.1) == doctest::Approx(3.0));
    CHECK(qs.value_at(0.7) == doctest::Approx(0.0));

    PiecewisePotential qd = q.dilated(4.0);
    CHECK(qd.support() == doctest::Approx(6.0));
    CHECK(qd.cell_count() == q.cell_count());
    for (double x : {0.3, 2.1, 4.4, 5.9})
        CHECK(qd.value_at(x) == doctest::Approx(q.value_at(x / 4.0)));
    CHECK(q_total(qd) == doctest::Approx(4.0 * q_total(q)));
}

TEST_CASE("periodic Fourier data is exact on piecewise-constant cells") {
    // p = 1 on [0, 1/2): p_c1 = 0, p_s1 = 1/pi
    PiecewisePotential p = PiecewisePotential::periodic({1.0, 0.0});
    FourierData f1 = fourier_p(p, 1);
    CHECK(f1.p_cn == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(f1.p_sn == doctest::Approx(1.0 / PI));
    CHECK(std::abs(f1.p_n - Cplx(0.0, -1.0 / PI)) < 1e-14);

    // sampled smooth profile: midpoint sampling converges at second order
    PiecewisePotential m = sample_periodic([](double x) { return 2.0 * std::cos(2 * PI * x); }, 512);
    CHECK(fourier_p(m, 1).p_cn == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(fourier_p(m, 1).p_sn == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(fourier_p(m, 2).p_cn == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("compact Fourier transform against the one-cell closed form") {
    // q = 1 on [0,1]: q_hat(z) = (e^{2iz} - 1) / (2iz), q_hat(0) = 1
    PiecewisePotential q = PiecewisePotential::compact({1.0}, 1.0);
    for (Cplx z : {Cplx(1.3, 0.0), Cplx(0.4, -2.0), Cplx(-5.0, 1.5)}) {
        Cplx expect = (std::exp(Cplx(0, 2) * z) - 1.0) / (Cplx(0, 2) * z);
        CHECK(std::abs(fourier_q(q, z) - expect) < 1e-13 * (1.0 + std::abs(expect)));
    }
    CHECK(std::abs(fourier_q(q, Cplx(0.0, 0.0)) - 1.0) < 1e-15);
    CHECK(std::abs(fourier_q(q, Cplx(1e-9, 0.0)) - 1.0) < 1e-8);  // series branch

    CHECK(q_hat_cn(q, 1) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(q_total(q) == doctest::Approx(1.0));

    // quarter-length barrier picks up a nonzero first harmonic
    PiecewisePotential qq = PiecewisePotential::compact({1.0}, 0.25);
    CHECK(q_hat_cn(qq, 1) == doctest::Approx(1.0 / (2.0 * PI)));
}

TEST_CASE("growth constant closed forms") {
    PiecewisePotential p0 = PiecewisePotential::periodic({0.0});
    CHECK(cf_constant(p0, PiecewisePotential::none()) == doctest::Approx(0.0));

    // ||p||_1 = 0, ||p+q||_t = 1: C = 3 e^2
    PiecewisePotential q1 = PiecewisePotential::compact({1.0}, 1.0);
    CHECK(cf_constant(p0, q1) == doctest::Approx(3.0 * std::exp(2.0)));

    // ||p||_1 = 1, ||p+q||_t = 2: C = 9 e^5
    PiecewisePotential p1 = PiecewisePotential::periodic({1.0});
    CHECK(cf_constant(p1, q1) == doctest::Approx(9.0 * std::exp(5.0)));
}

TEST_CASE("constructor validation") {
    CHECK_THROWS_AS(PiecewisePotential::periodic({}), config_error);
    CHECK_THROWS_AS(PiecewisePotential::compact({1.0}, 0.0), config_error);
    CHECK_THROWS_AS(PiecewisePotential::compact({1.0}, -2.0), config_error);
}
