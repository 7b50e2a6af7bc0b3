#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "doctest.h"
#include "halfxtal/hill.hpp"

using namespace halfxtal;

namespace {

double cdist(Cplx a, Cplx b) { return std::abs(a - b); }

PiecewisePotential random_potential(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> val(-3.0, 3.0);
    return PiecewisePotential::periodic({val(rng), val(rng), val(rng), val(rng)});
}

Cplx random_z(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> re(-8.0, 8.0), im(-3.0, 3.0);
    return {re(rng), im(rng)};
}

}  // namespace

TEST_CASE("free monodromy matches trigonometric closed forms") {
    PiecewisePotential p0 = PiecewisePotential::periodic({0.0});
    for (Cplx z : {Cplx(0.7, 0.0), Cplx(3.2, 1.1), Cplx(-2.0, -0.5), Cplx(0.0, 2.0)}) {
        MonodromyValues m = monodromy(p0, z);
        Cplx sz = std::sin(z), cz = std::cos(z);
        double tol = 1e-12 * (1.0 + std::abs(std::exp(Cplx(0, 1) * z)) + std::abs(std::exp(Cplx(0, -1) * z)));
        CHECK(cdist(m.theta.v, cz) < tol);
        CHECK(cdist(m.theta_p.v, -z * sz) < tol * (1.0 + std::abs(z)));
        CHECK(cdist(m.phi.v, sz / z) < tol);
        CHECK(cdist(m.phi_p.v, cz) < tol);
        CHECK(cdist(m.delta.v, cz) < tol);
        CHECK(cdist(m.beta.v, 0.0) < tol);
        CHECK(cdist(m.delta.d, -sz) < tol * (1.0 + std::abs(z)));
    }
}

TEST_CASE("free discriminant at the origin via the series branch") {
    PiecewisePotential p0 = PiecewisePotential::periodic({0.0});
    MonodromyValues m = monodromy(p0, Cplx(1e-8, 0.0));
    CHECK(cdist(m.delta.v, 1.0) < 1e-14);
    CHECK(cdist(m.phi.v, 1.0) < 1e-14);  // sin z / z -> 1
}

TEST_CASE("Wronskian and discriminant identity at random potentials") {
    std::mt19937_64 rng(20240917);
    for (int trial = 0; trial < 200; ++trial) {
        PiecewisePotential p = random_potential(rng);
        Cplx z = random_z(rng);
        MonodromyValues m = monodromy(p, z);

        Cplx wr = m.theta.v * m.phi_p.v - m.theta_p.v * m.phi.v;
        double wr_scale = std::abs(m.theta.v * m.phi_p.v) + std::abs(m.theta_p.v * m.phi.v) + 1.0;
        CHECK(cdist(wr, 1.0) < 1e-12 * wr_scale);

        // beta^2 + 1 - Delta^2 = -phi(1) theta'(1)
        Cplx lhs = m.beta.v * m.beta.v + 1.0 - m.delta.v * m.delta.v;
        Cplx rhs = -m.phi.v * m.theta_p.v;
        double id_scale = std::norm(m.beta.v) + 1.0 + std::norm(m.delta.v) + std::abs(rhs);
        CHECK(cdist(lhs, rhs) < 1e-12 * id_scale);
    }
}

TEST_CASE("z-derivative jets agree with central differences") {
    std::mt19937_64 rng(77);
    PiecewisePotential p = random_potential(rng);
    const double h = 1e-5;
    for (Cplx z : {Cplx(1.3, 0.4), Cplx(4.7, -1.2), Cplx(0.2, 0.1)}) {
        MonodromyValues m = monodromy(p, z);
        MonodromyValues mp = monodromy(p, z + h);
        MonodromyValues mm = monodromy(p, z - h);
        auto check_jet = [&](Cjet j, Cplx fp, Cplx fm, double scale) {
            Cplx fd = (fp - fm) / (2.0 * h);
            CHECK(cdist(j.d, fd) < 1e-7 * (scale + std::abs(fd)));
        };
        check_jet(m.delta, mp.delta.v, mm.delta.v, 1.0);
        check_jet(m.phi, mp.phi.v, mm.phi.v, 1.0);
        check_jet(m.theta_p, mp.theta_p.v, mm.theta_p.v, 1.0 + std::abs(z));
        check_jet(m.beta, mp.beta.v, mm.beta.v, 1.0);
    }
}

TEST_CASE("fundamental system composes over periods") {
    std::mt19937_64 rng(99);
    PiecewisePotential p = random_potential(rng);
    for (Cplx z : {Cplx(2.1, 0.0), Cplx(1.0, 0.8)}) {
        FundamentalValues one = fundamental_at(p, z, 1.0);
        FundamentalValues two = fundamental_at(p, z, 2.0);
        // transfer matrix over [0,2] is the square of the one over [0,1]
        Cplx th2 = one.theta.v * one.theta.v + one.phi.v * one.theta_p.v;
        Cplx ph2 = one.theta.v * one.phi.v + one.phi.v * one.phi_p.v;
        double sc = std::norm(one.theta.v) + std::abs(one.phi.v * one.theta_p.v) + 1.0;
        CHECK(cdist(two.theta.v, th2) < 1e-12 * sc);
        CHECK(cdist(two.phi.v, ph2) < 1e-12 * sc);
    }
}

TEST_CASE("fundamental system at interior points solves the cell equation") {
    // p = c constant: theta(x) = cos(sqrt(z^2-c) x), phi = sin(w x)/w
    PiecewisePotential p = PiecewisePotential::periodic({2.5});
    Cplx z(1.7, 0.6);
    Cplx w = std::sqrt(z * z - 2.5);
    for (double x : {0.3, 0.75, 1.0}) {
        FundamentalValues f = fundamental_at(p, z, x);
        CHECK(cdist(f.theta.v, std::cos(w * x)) < 1e-13);
        CHECK(cdist(f.phi.v, std::sin(w * x) / w) < 1e-13);
        CHECK(cdist(f.phi_p.v, std::cos(w * x)) < 1e-13);
    }
}

TEST_CASE("shifted monodromy keeps the discriminant and Wronskian") {
    std::mt19937_64 rng(123);
    for (int trial = 0; trial < 20; ++trial) {
        PiecewisePotential p = random_potential(rng);
        Cplx z = random_z(rng);
        MonodromyValues base = monodromy(p, z);
        std::uniform_real_distribution<double> tdist(0.0, 1.0);
        double tau = tdist(rng);
        MonodromyValues sh = shifted_monodromy(p, z, tau);

        double sc = std::abs(base.delta.v) + 1.0;
        CHECK(cdist(sh.delta.v, base.delta.v) < 1e-11 * sc);  // trace is shift invariant
        Cplx wr = sh.theta.v * sh.phi_p.v - sh.theta_p.v * sh.phi.v;
        double wr_scale = std::abs(sh.theta.v * sh.phi_p.v) + std::abs(sh.theta_p.v * sh.phi.v) + 1.0;
        CHECK(cdist(wr, 1.0) < 1e-11 * wr_scale);
    }
}

TEST_CASE("shifted monodromy at tau = 0 is the plain monodromy") {
    std::mt19937_64 rng(5);
    PiecewisePotential p = random_potential(rng);
    Cplx z(2.3, -0.7);
    MonodromyValues a = monodromy(p, z);
    MonodromyValues b = shifted_monodromy(p, z, 0.0);
    CHECK(cdist(a.theta.v, b.theta.v) < 1e-13 * (1.0 + std::abs(a.theta.v)));
    CHECK(cdist(a.phi_p.v, b.phi_p.v) < 1e-13 * (1.0 + std::abs(a.phi_p.v)));
    CHECK(cdist(a.beta.v, b.beta.v) < 1e-13 * (1.0 + std::abs(a.beta.v)));
}

TEST_CASE("propagation guard throws before overflow") {
    PiecewisePotential p0 = PiecewisePotential::periodic({0.0});
    CHECK_THROWS_AS(monodromy(p0, Cplx(0.0, 800.0)), numeric_error);
}
