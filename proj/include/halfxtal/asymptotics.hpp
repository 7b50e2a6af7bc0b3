#pragma once

#include <string>
#include <vector>

#include "halfxtal/band.hpp"
#include "halfxtal/potential.hpp"
#include "halfxtal/states.hpp"

namespace halfxtal {

// Least-squares fit of log|residual| against log n: residual ~ C n^{-order}.
struct FitResult {
    double order = 0.0;
    double log_coef = 0.0;
    int n_used = 0;
};
FitResult fit_order(const std::vector<std::pair<double, double>>& n_and_residual);

struct ResidualRow {
    int n;
    double value;      // measured quantity
    double predicted;  // leading-order prediction
    double residual;   // |value - predicted|
};

// Residual sequences and fitted orders for the gap-edge / Dirichlet / Floquet
// expansions and the perturbed-state location formula:
//   mu_n  = pi n + (p0 - p_cn) / (2 pi n) + O(n^-2)
//   e_n+- = pi n + (p0 +- |p_n|) / (2 pi n) + O(n^-2)
//   h_sn  = -p_sn / (2 pi n) + O(n^-2)
//   z_n   = mu_n - (q0 - q_cn) p_sn / (2 pi^2 n^2) + O(n^-3)
struct StateAsymptoticsReport {
    std::vector<ResidualRow> mu_rows, edge_minus_rows, edge_plus_rows, h_rows, state_rows;
    FitResult mu_fit, edge_minus_fit, edge_plus_fit, h_fit, state_fit;
    double state_coef_ratio_at_top = 0.0;  // measured / predicted leading term at n_hi
    int n_lo = 0, n_hi = 0;
    std::vector<std::string> notes;
};

StateAsymptoticsReport verify_state_asymptotics(const PiecewisePotential& p,
                                                const PiecewisePotential& q, int n_lo, int n_hi,
                                                const StatesOptions& opts = {});

// Per-gap verdict of the side/kind prediction table for non-even p.
enum class Verdict { Ok, Violation, Inconclusive };
const char* to_string(Verdict v);

struct SideRow {
    int n;
    double p_sn = 0.0, b_n = 0.0, h_sn = 0.0;
    StateKind predicted = StateKind::Unclassified;
    int predicted_side = 0;  // sign of lambda_n - mu_n^2
    StateKind computed = StateKind::Unclassified;
    int computed_side = 0;
    Verdict verdict = Verdict::Inconclusive;
    std::string note;
};

struct SidePredictionReport {
    std::vector<SideRow> rows;
    int first_all_ok = -1;  // smallest n from which every conclusive row is Ok
    int conclusive = 0, violations = 0;
};

// Hypothesis gates |p_sn| > c n^{-alpha}, |b_n| > c n^{-(1-alpha)} with
// b_n = q0 - q_cn; gated-out rows are Inconclusive, never failures.
SidePredictionReport verify_side_prediction(const PiecewisePotential& p,
                                            const PiecewisePotential& q, int n_hi,
                                            double alpha = 0.7, double gate_scale = 0.1,
                                            const StatesOptions& opts = {});

// Even-p case: mu_n sits at a gap edge; the state detaches by
//   z_n - mu_n = s_n |g_n| (b_n + O(1/n))^2 / (2 pi n)^2,
// s_n = +1 at the lower edge, -1 at the upper; kind from sign(b_n) and edge.
struct EvenCaseRow {
    int n;
    double gap_len = 0.0, b_n = 0.0;
    int s_n = 0;
    double delta = 0.0;       // z_n - mu_n
    double scaled = 0.0;      // delta (2 pi n)^2 / (s_n |g_n|)
    double scaled_energy = 0.0;  // same but with the energy gap length (diagnostic)
    StateKind predicted = StateKind::Unclassified;
    StateKind computed = StateKind::Unclassified;
    Verdict verdict = Verdict::Inconclusive;
    std::string note;
};

struct EvenCaseReport {
    std::vector<EvenCaseRow> rows;
    FitResult relative_residual_fit;  // |scaled - b_n^2| / b_n^2 ~ n^-1
    int conclusive = 0, violations = 0;
};

EvenCaseReport verify_even_case(const PiecewisePotential& p, const PiecewisePotential& q,
                                int n_lo, int n_hi, double alpha = 0.7, double gate_scale = 0.1,
                                const StatesOptions& opts = {});

// Sup of the scaled Jost / F deviations over evaluation grids:
//   |D(z^2) - 1 - (q_hat(z) - q_hat(0))/(2iz)| * |z|^2 * e^{-t(|Im z| - Im z)}
//   |F(z) - sin z / z| * |z|^2 * e^{-(1+2t)|Im z|} vs C_F
// plus the log-law check for supplied resonances.
struct BoundsReport {
    double jost_sup = 0.0;        // bounded constant for the D expansion
    double f_dev_sup = 0.0;       // sup scaled F deviation
    double cf = 0.0;              // C_F
    bool f_bound_ok = false;      // f_dev_sup <= C_F
    int resonance_violations = 0;  // resonances breaking |z sin z| <= C_F e^{(2t+1)|Im z|}
    int forbidden_violations = 0;  // resonances inside the forbidden domain
    std::vector<std::string> notes;
};

BoundsReport verify_D_and_F_bounds(const PiecewisePotential& p, const PiecewisePotential& q,
                                   const std::vector<StateRecord>& resonances,
                                   double r_max = 60.0);

}  // namespace halfxtal
