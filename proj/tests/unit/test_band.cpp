#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "halfxtal/band.hpp"

#ifdef HALFXTAL_HAVE_EIGEN
#include <Eigen/Dense>
#endif

using namespace halfxtal;

namespace {

PiecewisePotential mathieu() {
    return normalized(sample_periodic([](double x) { return 2.0 * std::cos(2 * PI * x); }, 256));
}

PiecewisePotential two_harmonic() {
    return normalized(sample_periodic(
        [](double x) { return std::sin(2 * PI * x) + 0.6 * std::sin(4 * PI * x); }, 256));
}

#ifdef HALFXTAL_HAVE_EIGEN
// Periodic (kappa = 0) and antiperiodic (kappa = pi) eigenvalues of -y'' + p y
// from the truncated Fourier-space operator (kappa + 2 pi n)^2 + hat p, using
// the exact per-cell Fourier data of the sampled potential.
std::vector<double> floquet_eigenvalues(const PiecewisePotential& p, double kappa, int modes) {
    int dim = 2 * modes + 1;
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(dim, dim);
    for (int i = 0; i < dim; ++i) {
        double freq = kappa + 2.0 * PI * (i - modes);
        H(i, i) = freq * freq + p.mean();
        for (int j = 0; j < dim; ++j) {
            int k = i - j;
            if (k == 0) continue;
            FourierData f = fourier_p(p, std::abs(k));
            Cplx coef(f.p_cn, k > 0 ? -f.p_sn : f.p_sn);
            H(i, j) += coef;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(H);
    std::vector<double> eigs(solver.eigenvalues().data(), solver.eigenvalues().data() + dim);
    std::sort(eigs.begin(), eigs.end());
    return eigs;
}
#endif

}  // namespace

TEST_CASE("free potential has no gaps and exact band geometry") {
    PiecewisePotential p0 = PiecewisePotential::periodic({0.0});
    BandTable table(p0);
    for (int n = 1; n <= 6; ++n) {
        const GapRecord& g = table.gap(n);
        CHECK(g.closed);
        CHECK(g.e_minus == doctest::Approx(PI * n).epsilon(1e-12));
        CHECK(g.e_plus == doctest::Approx(PI * n).epsilon(1e-12));
        CHECK(g.mu == doctest::Approx(PI * n).epsilon(1e-12));
        CHECK(g.h0_state == H0Kind::None);
    }
    CHECK(lowest_band_edge(p0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(table.ids(4.0) == doctest::Approx(2.0 / PI));
    CHECK(table.ids(0.25) == doctest::Approx(0.5 / PI));
    CHECK_FALSE(table.locate(1.0).in_gap);
}

TEST_CASE("normalization moves the lowest band edge to zero") {
    PiecewisePotential p = sample_periodic([](double x) { return 2.0 * std::cos(2 * PI * x); }, 256);
    double shift = 0.0;
    PiecewisePotential pn = normalized(p, &shift);
    CHECK(std::abs(lowest_band_edge(pn)) < 1e-9);
    CHECK(pn.mean() == doctest::Approx(p.mean() - shift));
}

#ifdef HALFXTAL_HAVE_EIGEN
TEST_CASE("gap edges match the Fourier-space Floquet eigenvalues") {
    PiecewisePotential p = mathieu();
    BandTable table(p);
    std::vector<double> per = floquet_eigenvalues(p, 0.0, 64);
    std::vector<double> anti = floquet_eigenvalues(p, PI, 64);
    double e0 = per[0];

    for (int n = 1; n <= 8; ++n) {
        const GapRecord& g = table.gap(n);
        // odd gaps carry the antiperiodic pair, even gaps the periodic one
        double lo, hi;
        if (n % 2 == 1) {
            lo = anti[n - 1];
            hi = anti[n];
        } else {
            lo = per[n - 1];
            hi = per[n];
        }
        CHECK(g.e_minus == doctest::Approx(std::sqrt(lo - e0)).epsilon(5e-7));
        CHECK(g.e_plus == doctest::Approx(std::sqrt(hi - e0)).epsilon(5e-7));
    }
}
#endif

TEST_CASE("Dirichlet eigenvalue interlaces every gap") {
    for (PiecewisePotential p : {mathieu(), two_harmonic()}) {
        BandTable table(p);
        for (int n = 1; n <= 10; ++n) {
            const GapRecord& g = table.gap(n);
            CHECK(g.e_minus <= g.mu + 1e-12);
            CHECK(g.mu <= g.e_plus + 1e-12);
            CHECK(g.e_minus <= g.e_extremum);
            CHECK(g.e_extremum <= g.e_plus);
            if (!g.closed) CHECK(g.h_n > 0.0);
        }
    }
}

TEST_CASE("Mathieu Dirichlet points sit at gap edges, detached points do not") {
    PiecewisePotential pm = mathieu();
    BandTable tm(pm);
    for (int n = 1; n <= 3; ++n) {
        CHECK(tm.gap(n).mu_at_edge);
        CHECK((tm.gap(n).h0_state == H0Kind::VirtualLeft ||
               tm.gap(n).h0_state == H0Kind::VirtualRight));
    }
    CHECK(tm.gap(4).closed);  // below the gap tolerance at this mesh
    CHECK(tm.gap(4).h0_state == H0Kind::None);
    PiecewisePotential ph = two_harmonic();
    BandTable th(ph);
    for (int n = 1; n <= 3; ++n) {
        CHECK_FALSE(th.gap(n).mu_at_edge);
        CHECK((th.gap(n).h0_state == H0Kind::Bound || th.gap(n).h0_state == H0Kind::Antibound));
    }
}

TEST_CASE("integrated density of states counts one band per gap") {
    PiecewisePotential p = mathieu();
    BandTable table(p);
    for (int n = 1; n <= 5; ++n) {
        const GapRecord& g = table.gap(n);
        double lo = g.e_minus * g.e_minus, hi = g.e_plus * g.e_plus;
        CHECK(table.ids(lo) == doctest::Approx(static_cast<double>(n)).epsilon(1e-9));
        CHECK(table.ids(hi) == doctest::Approx(static_cast<double>(n)).epsilon(1e-9));
        if (!g.closed)
            CHECK(table.ids(0.5 * (lo + hi)) == doctest::Approx(static_cast<double>(n)).epsilon(1e-9));
    }
    CHECK(table.ids(-1.0) == 0.0);
}

TEST_CASE("sin k satisfies the discriminant relation on both sheets") {
    PiecewisePotential p = two_harmonic();
    for (Cplx z : {Cplx(2.0, 0.5), Cplx(7.3, -1.1), Cplx(0.4, 2.0), Cplx(12.0, 0.01)}) {
        MonodromyValues m = monodromy(p, z);
        Cplx sp = sin_k(m, physical(z));
        Cplx sn = sin_k(m, nonphysical(z));
        double sc = 1.0 + std::norm(m.delta.v);
        CHECK(std::abs(sp * sp + m.delta.v * m.delta.v - 1.0) < 1e-11 * sc);
        CHECK(std::abs(sp + sn) < 1e-13 * (1.0 + std::abs(sp)));
        // physical momentum decays: |e^{ik}| = |Delta + i sin k| <= 1
        CHECK(std::abs(m.delta.v + Cplx(0, 1) * sp) <= 1.0 + 1e-11);
    }
}

TEST_CASE("sin k on a gap rim is imaginary with alternating sign") {
    PiecewisePotential p = mathieu();
    BandTable table(p);
    for (int n = 1; n <= 3; ++n) {
        const GapRecord& g = table.gap(n);
        Cplx s = sin_k(p, physical(Cplx(g.e_extremum, 0.0)));
        CHECK(std::abs(s.real()) < 1e-12 * (1.0 + std::abs(s)));
        CHECK(s.imag() * ((n % 2 == 0) ? 1.0 : -1.0) > 0.0);
        // sinh of the gap height at the extremum
        CHECK(std::abs(s.imag()) == doctest::Approx(std::sinh(g.h_n)).epsilon(1e-9));
    }
}

TEST_CASE("quasimomentum of the free potential is the identity") {
    // the decaying sheet carries k = z in the upper half-plane; below the
    // axis the identity continues onto the nonphysical tag
    PiecewisePotential p0 = PiecewisePotential::periodic({0.0});
    BandTable table(p0);
    for (Cplx z : {Cplx(0.8, 0.0), Cplx(4.4, 0.0), Cplx(2.0, 1.5)}) {
        Cplx k = quasimomentum(table, physical(z));
        CHECK(std::abs(k - z) < 1e-10 * (1.0 + std::abs(z)));
    }
    Cplx below(9.7, -0.3);
    CHECK(std::abs(quasimomentum(table, nonphysical(below)) - below) < 1e-10);
    Cplx k_refl = quasimomentum(table, physical(below));
    CHECK(k_refl.imag() == doctest::Approx(0.3).epsilon(1e-10));
}

TEST_CASE("quasimomentum inverts the discriminant and pins gap rims") {
    PiecewisePotential p = mathieu();
    BandTable table(p);
    for (Cplx z : {Cplx(1.4, 0.0), Cplx(5.1, 0.0), Cplx(2.8, 0.9), Cplx(8.0, -0.6)}) {
        Cplx k = quasimomentum(table, physical(z));
        Cplx d = monodromy(p, z).delta.v;
        CHECK(std::abs(std::cos(k) - d) < 1e-10 * (1.0 + std::abs(d)));
        CHECK(k.imag() >= -1e-12);  // decaying sheet
    }
    for (int n = 1; n <= 3; ++n) {
        const GapRecord& g = table.gap(n);
        Cplx k = quasimomentum(table, physical(Cplx(g.e_extremum, 0.0)));
        CHECK(k.real() == doctest::Approx(PI * n).epsilon(1e-11));
        CHECK(k.imag() == doctest::Approx(g.h_n).epsilon(1e-8));
    }
}

TEST_CASE("floquet multiplier pair multiplies to one") {
    PiecewisePotential p = two_harmonic();
    for (Cplx z : {Cplx(3.1, 0.2), Cplx(6.8, -0.4)}) {
        Cplx a = floquet_multiplier(p, physical(z));
        Cplx b = floquet_multiplier(p, nonphysical(z));
        CHECK(std::abs(a * b - 1.0) < 1e-11);
        CHECK(std::abs(a) <= std::abs(b) + 1e-12);
    }
}

TEST_CASE("operation wrappers agree with the table") {
    PiecewisePotential p = mathieu();
    BandTable table(p);
    auto edges = band_edges(p, 3);
    auto dir = dirichlet_eigs(p, 3);
    REQUIRE(edges.size() == 3);
    REQUIRE(dir.size() == 3);
    for (int n = 1; n <= 3; ++n) {
        CHECK(edges[n - 1].e_minus == doctest::Approx(table.gap(n).e_minus));
        CHECK(dir[n - 1].mu == doctest::Approx(table.gap(n).mu));
    }
    CHECK(ids(p, 10.0) == doctest::Approx(table.ids(10.0)));
}
