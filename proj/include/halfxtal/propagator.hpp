#pragma once

#include <vector>

#include "halfxtal/potential.hpp"
#include "halfxtal/types.hpp"

namespace halfxtal {

// One constant-coefficient cell of -y'' + v y = z^2 y.
struct Cell {
    double width;
    double value;
};

// Cell decomposition of [0, X] with breakpoint positions and prefix L1 norms
// (the latter feed the entire-function growth bound asserted on every solve).
class CellSequence {
public:
    static CellSequence of_periodic(const PiecewisePotential& p, double upto, double offset = 0.0);
    static CellSequence of_compact(const PiecewisePotential& q, double upto);
    // p (periodic, extended) + q (compact) merged on [0, upto]; breakpoints of
    // both meshes and the support endpoint t are all honoured exactly.
    static CellSequence combined(const PiecewisePotential& p, const PiecewisePotential& q, double upto);

    const std::vector<Cell>& cells() const { return cells_; }
    double length() const { return length_; }
    // integral of |v| over [0, x] for x = boundary of cell i (prefix sums)
    double l1_prefix(std::size_t i) const { return l1_[i]; }
    double l1_total() const { return l1_.back(); }
    // boundary position of cell i (x_[0] = 0, x_[count] = length)
    double boundary(std::size_t i) const { return x_[i]; }
    std::size_t count() const { return cells_.size(); }

private:
    CellSequence(std::vector<Cell> cells, double length);

    std::vector<Cell> cells_;
    std::vector<double> x_;
    std::vector<double> l1_;
    double length_ = 0.0;
};

// 2x2 transfer matrix in the (y, y') basis together with its z-derivative.
// Entries are entire in z^2; near w l -> 0 they switch to Taylor series.
struct Mat2z {
    Cplx m[2][2];
    Cplx dm[2][2];

    static Mat2z identity();
};

// Exact propagator of one cell: (y, y')(x+width) = M (y, y')(x).
Mat2z cell_matrix(const Cell& c, Cplx z);

// U <- M U, dU <- M dU + dM U.
void left_multiply(const Mat2z& M, Mat2z& U);

// U <- M^{-1} U using det M = 1 (adjugate).
void left_multiply_inverse(const Mat2z& M, Mat2z& U);

// Propagate the identity across the whole sequence; throws numeric_error when
// |Im z| * X + ||v||_1 exceeds the overflow guard (exp(700)).
Mat2z propagate(const CellSequence& seq, Cplx z);

// Propagate and record the fundamental matrix at every cell boundary
// (out has count()+1 entries, out[0] = identity).
void propagate_nodes(const CellSequence& seq, Cplx z, std::vector<Mat2z>& out);

// Guard helper shared by all propagation paths.
void check_growth_guard(double im_z, double length, double l1);

}  // namespace halfxtal
