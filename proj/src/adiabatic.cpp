#include "halfxtal/adiabatic.hpp"

#include <algorithm>
#include <cmath>

#include "halfxtal/perturbed.hpp"
#include "halfxtal/propagator.hpp"

namespace halfxtal {

namespace {

// Gap index of a normalized energy: 0 below the spectrum, n >= 1 inside gap n
// (closure), -1 on a band interior.
int gap_index_of(BandTable& table, double e) {
    if (e <= 0.0) return 0;
    auto loc = table.locate(std::sqrt(e));
    return loc.in_gap ? loc.n : -1;
}

}  // namespace

double pruefer_angle(const CellSequence& seq, double lambda) {
    double u = 0.0, up = 1.0;
    long zeros = 0;
    for (const Cell& c : seq.cells()) {
        double w2 = lambda - c.value;
        double h = c.width;
        double ub, upb;
        if (w2 * h * h > 1e-12) {
            double om = std::sqrt(w2);
            double psi = std::atan2(om * u, up);
            if (psi < 0.0) psi += PI;
            zeros += static_cast<long>(std::floor((psi + om * h) / PI));
            double cs = std::cos(om * h), sn = std::sin(om * h);
            ub = u * cs + up * sn / om;
            upb = -u * om * sn + up * cs;
        } else if (w2 * h * h < -1e-12) {
            double ka = std::sqrt(-w2);
            double ch = std::cosh(std::min(ka * h, 700.0));
            double sh = std::sinh(std::min(ka * h, 700.0));
            ub = u * ch + up * sh / ka;
            upb = u * ka * sh + up * ch;
            if (u != 0.0 && (ub == 0.0 || (u > 0.0) != (ub > 0.0))) ++zeros;
        } else {
            ub = u + up * h;
            upb = up;
            if (u != 0.0 && (ub == 0.0 || (u > 0.0) != (ub > 0.0))) ++zeros;
        }
        u = ub;
        up = upb;
        double m = std::max(std::abs(u), std::abs(up));
        if (m > 1e150) {
            u /= m;
            up /= m;
        }
    }
    double r;
    if (u == 0.0)
        r = 0.0;
    else if (u > 0.0)
        r = std::atan2(u, up);
    else
        r = std::atan2(-u, -up);
    return PI * static_cast<double>(zeros) + r;
}

double pruefer_angle(const PiecewisePotential& p, const PiecewisePotential& q, double tau,
                     double lambda, double X) {
    CellSequence seq = CellSequence::combined(p, q.dilated(tau), X);
    return pruefer_angle(seq, lambda);
}

double dos_integral(const PiecewisePotential& p, const PiecewisePotential& q, double E1,
                    double E2) {
    if (!(E2 > E1)) throw config_error("need E1 < E2");
    double shift = 0.0;
    PiecewisePotential pn = normalized(p, &shift);
    BandTable table(pn);
    double e1 = E1 - shift, e2 = E2 - shift;
    int g1 = gap_index_of(table, e1), g2 = gap_index_of(table, e2);
    if (g1 < 0 || g1 != g2)
        throw config_error("the energy window must lie inside one spectral gap");
    if (q.is_zero()) return 0.0;
    double sum = 0.0;
    double h = q.mesh();
    for (double v : q.values()) sum += h * (table.ids(e2 - v) - table.ids(e1 - v));
    return sum;
}

AdiabaticReport adiabatic_check(const PiecewisePotential& p, const PiecewisePotential& q,
                                const std::vector<double>& taus, double E1, double E2,
                                const StatesOptions& opts) {
    AdiabaticReport rep;
    rep.E1 = E1;
    rep.E2 = E2;
    double dos = dos_integral(p, q, E1, E2);

    double shift = 0.0;
    PiecewisePotential pn = normalized(p, &shift);
    BandTable table(pn);
    double e1 = E1 - shift, e2 = E2 - shift;
    int g = gap_index_of(table, e1);

    for (double tau : taus) {
        AdiabaticRow row;
        row.tau = tau;
        row.predicted = tau * dos;

        PiecewisePotential qtau = q.dilated(tau);
        FEvaluator ev(pn, qtau);
        double X = std::max(qtau.effective_support(), 1.0);
        CellSequence seq = CellSequence::combined(pn, qtau, X);
        long d2 = static_cast<long>(std::floor(pruefer_angle(seq, e2) / PI));
        long d1 = static_cast<long>(std::floor(pruefer_angle(seq, e1) / PI));
        row.dirichlet_count = d2 - d1;

        if (g >= 1) {
            double z1 = std::sqrt(std::max(e1, 0.0)), z2 = std::sqrt(std::max(e2, 0.0));
            auto recs = real_gap_states(ev, table.gap(g), opts);
            for (const auto& r : recs) {
                double z = r.z.real();
                if (z <= z1 || z >= z2) continue;
                if (r.kind == StateKind::Bound) row.bound_states += r.multiplicity;
                if (r.kind == StateKind::Antibound) row.antibound_states += r.multiplicity;
            }
        } else {
            double y1 = std::sqrt(std::max(-e2, 0.0)), y2 = std::sqrt(std::max(-e1, 0.0));
            auto recs = imaginary_axis_states(ev, y2 + 1.0, opts);
            for (const auto& r : recs) {
                double y = std::abs(r.z.imag());
                if (y <= y1 || y >= y2) continue;
                if (r.kind == StateKind::Bound) row.bound_states += r.multiplicity;
                if (r.kind == StateKind::Antibound) row.antibound_states += r.multiplicity;
            }
        }

        if (row.antibound_states < 1 + row.bound_states) rep.inequality_ok = false;
        if (std::abs(row.dirichlet_count - row.bound_states) > 5) rep.window_ok = false;
        rep.rows.push_back(row);
    }

    if (!rep.rows.empty()) {
        const AdiabaticRow* top = &rep.rows.front();
        for (const auto& r : rep.rows)
            if (r.tau > top->tau) top = &r;
        if (top->predicted > 0.0)
            rep.slope_rel_err = std::abs(top->bound_states / top->predicted - 1.0);
        else
            rep.slope_rel_err = top->bound_states == 0 ? 0.0 : 1e300;
    }
    return rep;
}

}  // namespace halfxtal
