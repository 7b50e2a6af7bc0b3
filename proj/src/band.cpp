#include "halfxtal/band.hpp"

#include <algorithm>
#include <cmath>

namespace halfxtal {

const char* to_string(H0Kind k) {
    switch (k) {
        case H0Kind::Bound: return "bound";
        case H0Kind::Antibound: return "antibound";
        case H0Kind::VirtualLeft: return "virtual-left";
        case H0Kind::VirtualRight: return "virtual-right";
        case H0Kind::None: return "none";
    }
    return "?";
}

namespace {

double delta_at_energy(const PiecewisePotential& p, double lambda) {
    Cplx z = lambda >= 0.0 ? Cplx(std::sqrt(lambda), 0.0) : Cplx(0.0, std::sqrt(-lambda));
    return monodromy(p, z).delta.v.real();
}

// Delta and dDelta/dz at real momentum z.
struct DeltaJet {
    double v, d;
};

DeltaJet delta_jet(const PiecewisePotential& p, double z) {
    MonodromyValues m = monodromy(p, Cplx(z, 0.0));
    return {m.delta.v.real(), m.delta.d.real()};
}

}  // namespace

double lowest_band_edge(const PiecewisePotential& p) {
    double lo = p.min_value() - 1e-6 * (1.0 + std::abs(p.min_value()));
    double f_lo = delta_at_energy(p, lo) - 1.0;
    double step = 1.0;
    while (f_lo < 0.0 && step < 1e7) {
        lo -= step;
        step *= 2.0;
        f_lo = delta_at_energy(p, lo) - 1.0;
    }
    if (f_lo < 0.0) throw numeric_error("cannot bracket the lowest band edge from below");

    double h = std::max(0.125, 0.1 * (1.0 + p.max_abs()));
    double hi = lo;
    double f_hi = f_lo;
    while (f_hi >= 0.0) {
        hi += h;
        f_hi = delta_at_energy(p, hi) - 1.0;
        if (hi > lo + 1e7) throw numeric_error("cannot bracket the lowest band edge from above");
    }
    for (int it = 0; it < 100 && hi - lo > 1e-15 * (1.0 + std::abs(lo)); ++it) {
        double mid = 0.5 * (lo + hi);
        if (delta_at_energy(p, mid) - 1.0 >= 0.0) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

PiecewisePotential normalized(const PiecewisePotential& p, double* shift_out) {
    double e0 = lowest_band_edge(p);
    if (shift_out) *shift_out = e0;
    return p.shifted(-e0);
}

BandTable::BandTable(PiecewisePotential p) : p_(std::move(p)) {
    if (p_.kind() != PiecewisePotential::Kind::Periodic)
        throw config_error("band table needs a periodic potential");
}

void BandTable::ensure(int n) {
    while (static_cast<int>(gaps_.size()) < n) {
        int m = static_cast<int>(gaps_.size()) + 1;
        double parity = (m % 2 == 0) ? 1.0 : -1.0;  // (-1)^m

        // March right from the previous Delta' zero; the next one is e_m.
        double z0 = gaps_.empty() ? 1e-3 : gaps_.back().e_extremum + 1e-6 * (1.0 + gaps_.back().e_extremum);
        double e_m = 0.0;
        bool found = false;
        double h = PI / 8.0;
        for (int attempt = 0; attempt < 4 && !found; ++attempt, h *= 0.25) {
            double za = z0;
            double sa = delta_jet(p_, za).d;
            for (double zb = za + h; zb < z0 + 4.0 * PI + 2.0; zb += h) {
                double sb = delta_jet(p_, zb).d;
                if ((sa < 0.0) != (sb < 0.0)) {
                    double a = zb - h, b = zb;
                    for (int it = 0; it < 90 && b - a > 1e-14 * (1.0 + b); ++it) {
                        double mid = 0.5 * (a + b);
                        double sm = delta_jet(p_, mid).d;
                        if ((sm < 0.0) == (sa < 0.0)) a = mid; else b = mid;
                    }
                    e_m = 0.5 * (a + b);
                    found = true;
                    break;
                }
                sa = sb;
            }
            if (found) {
                // Skipping a whole band lands on the wrong-parity extremum.
                double v = parity * delta_jet(p_, e_m).v - 1.0;
                if (v < -1e-6) found = false;  // retry with a smaller step
            }
        }
        if (!found) throw numeric_error("band marching failed to locate the next gap");

        GapRecord g;
        g.n = m;
        g.e_extremum = e_m;
        double v = parity * delta_jet(p_, e_m).v - 1.0;
        v = std::max(v, 0.0);
        g.h_n = std::log1p(v + std::sqrt(v * (v + 2.0)));
        g.h_n_err = std::min(g.h_n + 1e-16, 4e-16 / std::sqrt(std::max(2.0 * v, 1e-300)));

        auto f = [&](double z) { return parity * delta_jet(p_, z).v - 1.0; };
        double closed_len_tol = 1e-9 * m;
        if (v <= 0.0) {
            g.closed = true;
            g.e_minus = g.e_plus = e_m;
        } else {
            // left edge: f < 0 somewhere in band m
            double a = gaps_.empty() ? 1e-9 : gaps_.back().e_extremum;
            double fa = gaps_.empty() ? -2.0 : f(a);
            if (fa >= 0.0) throw numeric_error("left band bracket failed");
            double b = e_m;
            for (int it = 0; it < 100 && b - a > 1e-15 * (1.0 + b); ++it) {
                double mid = 0.5 * (a + b);
                if (f(mid) < 0.0) a = mid; else b = mid;
            }
            g.e_minus = 0.5 * (a + b);
            // right edge: march into band m+1
            double c = e_m, d = e_m;
            double fd = v;
            double hr = std::max(1e-3, 0.25 * (e_m - g.e_minus));
            while (fd >= 0.0) {
                d += hr;
                hr *= 1.5;
                fd = f(d);
                if (d > e_m + 4.0 * PI) throw numeric_error("right band bracket failed");
            }
            for (int it = 0; it < 100 && d - c > 1e-15 * (1.0 + d); ++it) {
                double mid = 0.5 * (c + d);
                if (f(mid) >= 0.0) c = mid; else d = mid;
            }
            g.e_plus = 0.5 * (c + d);
            if (g.e_plus - g.e_minus < closed_len_tol) {
                g.closed = true;
                g.e_minus = g.e_plus = e_m;
            }
        }

        // Dirichlet sqrt-eigenvalue mu_m in the gap closure: root of phi(1, z).
        auto phi1 = [&](double z) {
            MonodromyValues mm = monodromy(p_, Cplx(z, 0.0));
            return std::pair<double, double>(mm.phi.v.real(), mm.phi.d.real());
        };
        if (g.closed) {
            g.mu = e_m;
            g.mu_at_edge = true;
            g.h_sn = 0.0;
            g.h0_state = H0Kind::None;
        } else {
            double mu = 0.0;
            bool have = false;
            const int K = 17;
            double prev_z = g.e_minus;
            double prev_f = phi1(prev_z).first;
            for (int i = 1; i <= K; ++i) {
                double zi = g.e_minus + (g.e_plus - g.e_minus) * i / K;
                double fi = phi1(zi).first;
                if (prev_f == 0.0) { mu = prev_z; have = true; break; }
                if ((prev_f < 0.0) != (fi < 0.0)) {
                    double a = prev_z, b = zi;
                    bool a_neg = prev_f < 0.0;
                    for (int it = 0; it < 90 && b - a > 1e-15 * (1.0 + b); ++it) {
                        double mid = 0.5 * (a + b);
                        if ((phi1(mid).first < 0.0) == a_neg) a = mid; else b = mid;
                    }
                    mu = 0.5 * (a + b);
                    have = true;
                    break;
                }
                prev_z = zi;
                prev_f = fi;
            }
            if (!have) {
                // no interior sign change: the zero sits at one of the edges
                double fm = std::abs(phi1(g.e_minus).first);
                double fp = std::abs(phi1(g.e_plus).first);
                mu = fm <= fp ? g.e_minus : g.e_plus;
            }
            // Newton polish with the carried derivative
            for (int it = 0; it < 40; ++it) {
                auto [fv, fd] = phi1(mu);
                if (fd == 0.0) break;
                double step = fv / fd;
                double next = std::clamp(mu - step, g.e_minus, g.e_plus);
                if (std::abs(next - mu) < 1e-15 * (1.0 + mu)) { mu = next; break; }
                mu = next;
            }
            g.mu = mu;
            double edge_tol = 1e-8 * m;
            g.mu_at_edge = std::min(mu - g.e_minus, g.e_plus - mu) <= edge_tol;
            MonodromyValues mm = monodromy(p_, Cplx(mu, 0.0));
            double beta = mm.beta.v.real();
            g.h_sn = std::asinh(-parity * beta);
            if (g.mu_at_edge)
                g.h0_state = (mu - g.e_minus <= g.e_plus - mu) ? H0Kind::VirtualLeft
                                                               : H0Kind::VirtualRight;
            else
                g.h0_state = g.h_sn > 0.0 ? H0Kind::Bound : H0Kind::Antibound;
        }
        gaps_.push_back(g);
    }
}

const GapRecord& BandTable::gap(int n) {
    if (n < 1) throw config_error("gap index must be >= 1");
    ensure(n);
    return gaps_[static_cast<std::size_t>(n - 1)];
}

BandTable::Location BandTable::locate(double z) {
    z = std::abs(z);
    int guess = static_cast<int>(z / PI) + 2;
    ensure(guess);
    while (gaps_.back().e_plus < z) ensure(static_cast<int>(gaps_.size()) + 2);
    for (const auto& g : gaps_) {
        if (z < g.e_minus) return {false, g.n};       // band n = (e_{n-1}+, e_n-)
        if (z <= g.e_plus) return {true, g.n};
    }
    return {false, static_cast<int>(gaps_.size()) + 1};
}

double BandTable::ids(double lambda) {
    if (lambda <= 0.0) return 0.0;
    double z = std::sqrt(lambda);
    Location loc = locate(z);
    if (loc.in_gap) return static_cast<double>(loc.n);
    double d = std::clamp(delta_jet(p_, z).v, -1.0, 1.0);
    double k0 = std::acos(d);
    double k = (loc.n % 2 == 1) ? PI * (loc.n - 1) + k0 : PI * loc.n - k0;
    return k / PI;
}

std::vector<GapRecord> band_edges(const PiecewisePotential& p, int n_max) {
    BandTable t(p);
    t.gap(n_max);
    std::vector<GapRecord> out;
    out.reserve(static_cast<std::size_t>(n_max));
    for (int n = 1; n <= n_max; ++n) out.push_back(t.gap(n));
    return out;
}

std::vector<GapRecord> dirichlet_eigs(const PiecewisePotential& p, int n_max) {
    return band_edges(p, n_max);
}

double ids(const PiecewisePotential& p, double lambda) {
    BandTable t(p);
    return t.ids(lambda);
}

Cplx sin_k(const MonodromyValues& m, SpectralPoint pt) {
    Cplx D = m.delta.v;
    bool phys = pt.sheet == Sheet::Physical;
    if (pt.z.imag() != 0.0) {
        Cplx r = std::sqrt(D * D - 1.0);
        Cplx big = (std::abs(D + r) >= std::abs(D - r)) ? D + r : D - r;
        Cplx xin = 1.0 / big;
        Cplx s = (xin - big) / Cplx(0.0, 2.0);
        return phys ? s : -s;
    }
    double d = D.real();
    if (std::abs(d) <= 1.0) {
        // band interior / edge: rim limit from Im z > 0 of the |xi| < 1 root
        double s = std::sqrt(std::max(0.0, (1.0 - d) * (1.0 + d)));
        double sign = m.delta.d.real() > 0.0 ? -1.0 : 1.0;
        if (pt.z.real() == 0.0) sign = 1.0;  // z = 0 edge
        return Cplx(phys ? sign * s : -sign * s, 0.0);
    }
    double r = std::sqrt((d - 1.0) * (d + 1.0));
    double big = d > 0.0 ? d + r : d - r;
    double xin = 1.0 / big;
    Cplx s(0.0, -(xin - big) * 0.5);
    return phys ? s : -s;
}

Cplx sin_k(const PiecewisePotential& p, SpectralPoint pt) {
    return sin_k(monodromy(p, pt.z), pt);
}

Cplx floquet_multiplier(const PiecewisePotential& p, SpectralPoint pt) {
    MonodromyValues m = monodromy(p, pt.z);
    return m.delta.v + Cplx(0.0, 1.0) * sin_k(m, pt);
}

Cplx quasimomentum(BandTable& table, SpectralPoint pt) {
    Cplx z = pt.z;
    if (std::abs(z) < 1e-14) return Cplx(0.0, 0.0);
    if (z.imag() == 0.0 && z.real() > 0.0) {
        double x = z.real();
        auto loc = table.locate(x);
        MonodromyValues m = monodromy(table.p(), Cplx(x, 0.0));
        if (!loc.in_gap) {
            double d = std::clamp(m.delta.v.real(), -1.0, 1.0);
            double k0 = std::acos(d);
            double k = (loc.n % 2 == 1) ? PI * (loc.n - 1) + k0 : PI * loc.n - k0;
            return Cplx(k, 0.0);
        }
        int n = loc.n;
        double parity = (n % 2 == 0) ? 1.0 : -1.0;
        Cplx s = sin_k(m, pt);
        // sin(pi n + i v) = (-1)^n i sinh v  =>  v = asinh((-1)^n Im s... via -i s)
        double sinh_v = (parity * Cplx(0.0, -1.0) * s).real();
        return Cplx(PI * n, std::asinh(sinh_v));
    }
    // complex momentum (or the imaginary axis): e^{ik} on the requested sheet,
    // unwrapped toward k ~ z
    MonodromyValues m = monodromy(table.p(), z);
    Cplx s = sin_k(m, pt);
    Cplx xi = m.delta.v + Cplx(0.0, 1.0) * s;
    Cplx k0 = Cplx(0.0, -1.0) * std::log(xi);
    double shift = std::round((z.real() - k0.real()) / (2.0 * PI));
    return k0 + 2.0 * PI * shift;
}

Cplx quasimomentum(const PiecewisePotential& p, SpectralPoint pt) {
    BandTable t(p);
    return quasimomentum(t, pt);
}

}  // namespace halfxtal
