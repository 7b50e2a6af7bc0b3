#pragma once

#include <vector>

#include "halfxtal/hill.hpp"
#include "halfxtal/potential.hpp"
#include "halfxtal/types.hpp"

namespace halfxtal {

// Kind of the unperturbed half-line state sitting at the Dirichlet eigenvalue
// mu_n inside gap n (None for a collapsed gap, where mu_n is no state at all).
enum class H0Kind { Bound, Antibound, VirtualLeft, VirtualRight, None };

const char* to_string(H0Kind k);

// Geometry and state data of momentum gap n >= 1.
struct GapRecord {
    int n = 0;
    double e_minus = 0.0;   // momentum gap edges, e_minus <= e_plus
    double e_plus = 0.0;
    double e_extremum = 0.0;  // zero of Delta' (the gap midpoint in the Lyapunov sense)
    double mu = 0.0;        // Dirichlet sqrt-eigenvalue in the gap closure
    double h_n = 0.0;       // cosh h_n = (-1)^n Delta(e_extremum)
    double h_n_err = 0.0;   // conditioning estimate of h_n (large near closed gaps)
    double h_sn = 0.0;      // k(mu + i0) = pi n + i h_sn
    bool closed = false;
    bool mu_at_edge = false;
    H0Kind h0_state = H0Kind::None;
};

// Lowest periodic eigenvalue E0+ of -y'' + p y (in energy units).
double lowest_band_edge(const PiecewisePotential& p);

// p minus E0+, so the shifted operator's spectrum starts exactly at 0.
PiecewisePotential normalized(const PiecewisePotential& p, double* shift_out = nullptr);

// Lazily grown table of gap records for a (normalized) periodic potential.
class BandTable {
public:
    explicit BandTable(PiecewisePotential p);

    const PiecewisePotential& p() const { return p_; }
    const GapRecord& gap(int n);
    int max_computed() const { return static_cast<int>(gaps_.size()); }

    struct Location {
        bool in_gap = false;  // true when z is in a gap closure (band edge counts as gap)
        int n = 0;            // gap index, or band index for in_gap == false
    };
    // Locates real z >= 0 relative to the band/gap structure.
    Location locate(double z);

    // Integrated density of states rho(lambda) (normalized energies).
    double ids(double lambda);

private:
    void ensure(int n);

    PiecewisePotential p_;
    std::vector<GapRecord> gaps_;
};

// Convenience wrappers matching the operation-level API.
std::vector<GapRecord> band_edges(const PiecewisePotential& p, int n_max);
std::vector<GapRecord> dirichlet_eigs(const PiecewisePotential& p, int n_max);
double ids(const PiecewisePotential& p, double lambda);

// sin k on the chosen sheet: roots xi of xi^2 - 2 Delta xi + 1 = 0 give
// e^{+-ik}; the physical assignment takes the decaying root |e^{ik}| <= 1
// (rim values on the real axis limit from Im z > 0), the nonphysical sheet
// negates it.  Continuing D across a band into Im z < 0 therefore means
// evaluating there with the nonphysical tag.
Cplx sin_k(const PiecewisePotential& p, SpectralPoint pt);
Cplx sin_k(const MonodromyValues& m, SpectralPoint pt);

// e^{ik} on the chosen sheet ( = Delta + i sin k).
Cplx floquet_multiplier(const PiecewisePotential& p, SpectralPoint pt);

// Quasimomentum k with Re k = pi n on gap rims, the n-indexed arccos branch on
// bands and k ~ z at infinity.  Needs the band table to index real points.
Cplx quasimomentum(BandTable& table, SpectralPoint pt);
Cplx quasimomentum(const PiecewisePotential& p, SpectralPoint pt);

}  // namespace halfxtal
