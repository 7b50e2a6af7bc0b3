#pragma once

#include <string>
#include <vector>

#include "halfxtal/band.hpp"
#include "halfxtal/perturbed.hpp"
#include "halfxtal/potential.hpp"
#include "halfxtal/types.hpp"

namespace halfxtal {

enum class StateKind { Bound, Antibound, Virtual, Resonance, ConjugateBound, Unclassified };

const char* to_string(StateKind k);

struct StateRecord {
    Cplx z;                 // momentum position
    Sheet sheet = Sheet::Physical;
    StateKind kind = StateKind::Unclassified;
    int multiplicity = 1;
    int gap_index = -1;     // n for rim states (0 = imaginary axis), -1 for complex
    bool branch_point = false;   // within tolerance of a band edge
    bool at_dirichlet = false;   // coincides with mu_n
    double residual = 0.0;       // |F| / local scale at the reported zero
    double ratio = 0.0;          // |A+| / |A-| used for the rim classification
    int newton_iters = 0;

    Cplx lambda() const { return z * z; }
};

struct StatesOptions {
    double closed_gap_rel = 1e-9;   // gap |g_n| < rel * n treated as closed
    double ratio_tol = 1e-4;        // rim classification threshold
    double edge_match_rel = 1e-8;   // virtual-state edge matching (times n)
    double newton_rel = 1e-11;      // |F| relative to the local scale
    int scan_points = 240;          // dense grid points per gap sweep
    double axis_margin = 1e-3;      // contour distance from the real axis
    double winding_tol = 1e-2;      // max deviation of windings from integers
    int max_retries = 5;            // boundary perturbation retries
    double min_box = 1e-8;          // quadrisection floor (multiple zero)
};

// Axis-parallel rectangle for contour searches.
struct Rect {
    double x0, x1, y0, y1;
};

// States in the closure of gap n >= 1: zeros of F on [e_n-, e_n+], classified
// bound / antibound by the rim ratio test, virtual at edges, with the
// Dirichlet-coincidence test at mu_n.
std::vector<StateRecord> real_gap_states(const FEvaluator& ev, const GapRecord& gap,
                                         const StatesOptions& opts = {});

// States on the imaginary axis (gap 0): bound states at iy (y > 0) and
// antibound / conjugate-bound partners at -iy.
std::vector<StateRecord> imaginary_axis_states(const FEvaluator& ev, double y_max,
                                               const StatesOptions& opts = {});

// Zeros of F inside a rectangle avoiding the real axis, via adaptive
// argument-principle quadrisection; each zero classified Resonance unless it
// is the conjugate image of a bound state.
std::vector<StateRecord> complex_resonances(const FEvaluator& ev, Rect rect,
                                            const StatesOptions& opts = {});

// Number of F-zeros inside rect by winding alone (no localisation).
int contour_zero_count(const FEvaluator& ev, Rect rect, const StatesOptions& opts = {});

struct CountingReport {
    double r = 0.0;
    long n_real = 0;      // zeros on the real axis (gap closures), both signs
    long n_imag = 0;      // zeros on the imaginary axis, both signs
    long n_complex = 0;   // strictly complex zeros (lower half and mirror count)
    long total_F = 0;     // all zeros of F with |z| <= r
    long total = 0;       // zeros of z * F(z): origin convention of the free case
    long lower_half = 0;  // zeros with Im z < 0
};

// Zero count of F in |z| <= r (complex zeros located through box subdivision;
// the search depth below the axis follows the logarithmic resonance law).
CountingReport counting(const FEvaluator& ev, BandTable& table, double r,
                        const StatesOptions& opts = {});

// All states of H = H0 + q up to momentum nmax gaps plus the imaginary axis.
std::vector<StateRecord> all_rim_states(const FEvaluator& ev, BandTable& table, int n_max,
                                        const StatesOptions& opts = {});

struct CheckLine {
    std::string name;
    bool pass = false;
    double value = 0.0;
    std::string detail;
};

struct StructuralReport {
    std::vector<CheckLine> checks;
    bool all_pass() const;
};

// Structural theorems on a fixture: F'(mu_n) sign law for persistent bound
// states, closed-gap exclusion, norming-constant positivity plus quadrature
// cross-check, the band-edge Jost identity, odd counts per gap closure, and
// forbidden-domain emptiness for computed resonances.
StructuralReport structural_checks(const PiecewisePotential& p, const PiecewisePotential& q,
                                   int n_max, const StatesOptions& opts = {});

// Norming constant of a simple bound state at z0 (physical rim, not at mu_n):
// closed form (-1)^n F'(z) sinh h / (z phi1^2 Psi0minus^2) and the quadrature
// of int |Psi(x)|^2 dx for cross-checking.
struct NormingConstant {
    double closed_form = 0.0;
    double quadrature = 0.0;
    double tail_estimate = 0.0;
};
NormingConstant norming_constant(const FEvaluator& ev, int gap_index, Cplx z0);

}  // namespace halfxtal
