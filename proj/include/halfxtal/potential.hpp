#pragma once

#include <functional>
#include <string>
#include <vector>

#include "halfxtal/types.hpp"

namespace halfxtal {

// Piecewise-constant potential on a uniform mesh.  Periodic potentials live on
// [0,1) and extend 1-periodically; compact ones live on [0,t] and vanish beyond.
// Everything downstream consumes the cells through exact closed-form propagators,
// so the sampled potential is solved without discretisation error.
class PiecewisePotential {
public:
    enum class Kind { Periodic, Compact };

    static PiecewisePotential periodic(std::vector<double> values);
    static PiecewisePotential compact(std::vector<double> values, double support);
    // Zero compact potential (empty perturbation; effective support 0).
    static PiecewisePotential none();

    Kind kind() const { return kind_; }
    double support() const { return support_; }
    // Support with trailing zero cells trimmed (0 for the zero potential);
    // the counting density and growth bounds see this t, not the raw mesh end.
    double effective_support() const;
    double mesh() const { return support_ / static_cast<double>(values_.size()); }
    const std::vector<double>& values() const { return values_; }
    std::size_t cell_count() const { return values_.size(); }
    bool is_zero() const;

    // Value at x; periodic potentials wrap, compact ones are 0 outside [0,t).
    double value_at(double x) const;

    // integral of |v| over [0, upto]
    double norm_l1(double upto) const;
    // integral of v over the full support (one period / [0,t])
    double total() const;
    double mean() const { return total() / support_; }
    double min_value() const;
    double max_abs() const;

    // New potential with a constant added to every cell.
    PiecewisePotential shifted(double c) const;
    // q(x / tau): same cell values, support stretched by tau (exact dilation).
    PiecewisePotential dilated(double tau) const;

private:
    PiecewisePotential(Kind k, std::vector<double> v, double support);

    Kind kind_;
    std::vector<double> values_;
    double support_;
};

// Midpoint sampling of a smooth profile (default 256 cells per unit length).
PiecewisePotential sample_periodic(const std::function<double(double)>& f, int cells = 256);
PiecewisePotential sample_compact(const std::function<double(double)>& f, double support, int cells = 256);

// Small expression grammar for potential specs:
//   expr    := term (('+'|'-') term)*
//   term    := [number '*'] basis | number
//   basis   := 'cos(' k ')' | 'sin(' k ')' | 'step(' a ',' b ',' v ')'
// cos(k) and sin(k) stand for cos(2 pi k x) and sin(2 pi k x).
// step(a,b,v) is v on [a,b).  Whitespace is ignored.
std::function<double(double)> parse_potential_expr(const std::string& expr);

// Cosine / sine Fourier data of a 1-periodic potential at harmonic n, computed
// exactly per cell:  p_cn = int p cos(2 pi n x) dx, p_sn = int p sin(2 pi n x) dx,
// p_n = p_cn - i p_sn.
struct FourierData {
    int n = 0;
    double p_cn = 0.0;
    double p_sn = 0.0;
    Cplx p_n{0.0, 0.0};
};

FourierData fourier_p(const PiecewisePotential& p, int n);

// q_hat(z) = int_0^t q(x) e^{2 i z x} dx, exact per cell with a series branch
// near z = 0.
Cplx fourier_q(const PiecewisePotential& q, Cplx z);

// Re q_hat(pi n) = int_0^t q(x) cos(2 pi n x) dx.
double q_hat_cn(const PiecewisePotential& q, int n);

// q0 = int_0^t q(x) dx.
double q_total(const PiecewisePotential& q);

// C_F = 3 (||p||_1 + ||p+q||_t) exp(2 ||p+q||_t + ||p||_1); the Cartwright-class
// constant controlling |F - sin z / z| and the forbidden domain.
double cf_constant(const PiecewisePotential& p, const PiecewisePotential& q);

}  // namespace halfxtal
