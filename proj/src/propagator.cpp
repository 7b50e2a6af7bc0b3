#include "halfxtal/propagator.hpp"

#include <algorithm>
#include <cmath>

namespace halfxtal {

namespace {

constexpr double GROWTH_GUARD = 700.0;  // exp argument limit
constexpr double SERIES_SWITCH_U = 1e-6;  // |w l|^2 threshold for Taylor branch

// cos(sqrt(u)), sin(sqrt(u))/sqrt(u) and d/du of the latter, entire in u,
// 6-term Taylor once |u| is below the switch.
struct CellEntries {
    Cplx C;   // cos(w l)
    Cplx S;   // sin(w l)/w  (times l handled by caller scaling)
    Cplx T;   // d sinc / du where sinc(u) = sin(sqrt u)/sqrt u
};

void entries(Cplx u, Cplx& cosc, Cplx& sinc, Cplx& sincp) {
    if (std::abs(u) < SERIES_SWITCH_U) {
        cosc = 1.0 + u * (-1.0 / 2.0 + u * (1.0 / 24.0 + u * (-1.0 / 720.0 + u * (1.0 / 40320.0 - u / 3628800.0))));
        sinc = 1.0 + u * (-1.0 / 6.0 + u * (1.0 / 120.0 + u * (-1.0 / 5040.0 + u * (1.0 / 362880.0 - u / 39916800.0))));
        sincp = -1.0 / 6.0 + u * (1.0 / 60.0 + u * (-1.0 / 1680.0 + u * (1.0 / 90720.0 +
                u * (-1.0 / 7983360.0 + u / 1037836800.0))));
        return;
    }
    Cplx w = std::sqrt(u);
    cosc = std::cos(w);
    sinc = std::sin(w) / w;
    sincp = (cosc - sinc) / (2.0 * u);
}

}  // namespace

void check_growth_guard(double im_z, double length, double l1) {
    if (std::abs(im_z) * length + l1 > GROWTH_GUARD) {
        throw numeric_error("propagation would overflow: |Im z|*x + ||v||_1 > 700");
    }
}

Mat2z Mat2z::identity() {
    Mat2z u{};
    u.m[0][0] = u.m[1][1] = 1.0;
    return u;
}

Mat2z cell_matrix(const Cell& c, Cplx z) {
    double l = c.width;
    Cplx s = z * z - c.value;
    Cplx u = s * (l * l);
    Cplx cosc, sinc, sincp;
    entries(u, cosc, sinc, sincp);

    Mat2z M{};
    Cplx S = l * sinc;  // sin(w l)/w
    M.m[0][0] = cosc;
    M.m[0][1] = S;
    M.m[1][0] = -s * S;
    M.m[1][1] = cosc;

    // d/ds, then chain rule ds/dz = 2z
    Cplx dS_ds = (l * l * l) * sincp;
    Cplx dC_ds = -(l / 2.0) * S;
    Cplx two_z = 2.0 * z;
    M.dm[0][0] = dC_ds * two_z;
    M.dm[0][1] = dS_ds * two_z;
    M.dm[1][0] = (-S - s * dS_ds) * two_z;
    M.dm[1][1] = M.dm[0][0];
    return M;
}

void left_multiply(const Mat2z& M, Mat2z& U) {
    Cplx a = M.m[0][0] * U.m[0][0] + M.m[0][1] * U.m[1][0];
    Cplx b = M.m[0][0] * U.m[0][1] + M.m[0][1] * U.m[1][1];
    Cplx c = M.m[1][0] * U.m[0][0] + M.m[1][1] * U.m[1][0];
    Cplx d = M.m[1][0] * U.m[0][1] + M.m[1][1] * U.m[1][1];
    Cplx da = M.m[0][0] * U.dm[0][0] + M.m[0][1] * U.dm[1][0] + M.dm[0][0] * U.m[0][0] + M.dm[0][1] * U.m[1][0];
    Cplx db = M.m[0][0] * U.dm[0][1] + M.m[0][1] * U.dm[1][1] + M.dm[0][0] * U.m[0][1] + M.dm[0][1] * U.m[1][1];
    Cplx dc = M.m[1][0] * U.dm[0][0] + M.m[1][1] * U.dm[1][0] + M.dm[1][0] * U.m[0][0] + M.dm[1][1] * U.m[1][0];
    Cplx dd = M.m[1][0] * U.dm[0][1] + M.m[1][1] * U.dm[1][1] + M.dm[1][0] * U.m[0][1] + M.dm[1][1] * U.m[1][1];
    U.m[0][0] = a; U.m[0][1] = b; U.m[1][0] = c; U.m[1][1] = d;
    U.dm[0][0] = da; U.dm[0][1] = db; U.dm[1][0] = dc; U.dm[1][1] = dd;
}

void left_multiply_inverse(const Mat2z& M, Mat2z& U) {
    // det M = 1, so M^{-1} = [d,-b;-c,a] and the derivative is the adjugate of dM.
    Mat2z inv{};
    inv.m[0][0] = M.m[1][1];
    inv.m[0][1] = -M.m[0][1];
    inv.m[1][0] = -M.m[1][0];
    inv.m[1][1] = M.m[0][0];
    inv.dm[0][0] = M.dm[1][1];
    inv.dm[0][1] = -M.dm[0][1];
    inv.dm[1][0] = -M.dm[1][0];
    inv.dm[1][1] = M.dm[0][0];
    left_multiply(inv, U);
}

CellSequence::CellSequence(std::vector<Cell> cells, double length)
    : cells_(std::move(cells)), length_(length) {
    x_.resize(cells_.size() + 1);
    l1_.resize(cells_.size() + 1);
    x_[0] = 0.0;
    l1_[0] = 0.0;
    for (std::size_t i = 0; i < cells_.size(); ++i) {
        x_[i + 1] = x_[i] + cells_[i].width;
        l1_[i + 1] = l1_[i] + std::abs(cells_[i].value) * cells_[i].width;
    }
}

namespace {

std::vector<double> merge_breakpoints(std::vector<double> pts, double upto) {
    pts.push_back(0.0);
    pts.push_back(upto);
    std::sort(pts.begin(), pts.end());
    std::vector<double> out;
    double eps = 1e-12 * std::max(1.0, upto);
    for (double x : pts) {
        if (x < -eps || x > upto + eps) continue;
        x = std::clamp(x, 0.0, upto);
        if (out.empty() || x - out.back() > eps) out.push_back(x);
    }
    if (out.back() < upto) out.push_back(upto);
    return out;
}

template <typename ValueFn>
std::vector<Cell> build(const std::vector<double>& bp, ValueFn value_at) {
    std::vector<Cell> cells;
    cells.reserve(bp.size());
    for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
        double a = bp[i], b = bp[i + 1];
        cells.push_back(Cell{b - a, value_at(0.5 * (a + b))});
    }
    return cells;
}

void periodic_breakpoints(const PiecewisePotential& p, double upto, double offset, std::vector<double>& pts) {
    double h = p.mesh();
    // x such that x + offset is a multiple of h
    double first = std::ceil(offset / h - 1e-12) * h - offset;
    if (first < 1e-12) first += h;
    for (double x = first; x < upto; x += h) pts.push_back(x);
}

}  // namespace

CellSequence CellSequence::of_periodic(const PiecewisePotential& p, double upto, double offset) {
    if (upto < 0.0) throw config_error("cell sequence needs nonnegative length");
    std::vector<double> pts;
    periodic_breakpoints(p, upto, offset, pts);
    auto bp = merge_breakpoints(std::move(pts), upto);
    return CellSequence(build(bp, [&](double x) { return p.value_at(x + offset); }), upto);
}

CellSequence CellSequence::of_compact(const PiecewisePotential& q, double upto) {
    if (upto < 0.0) throw config_error("cell sequence needs nonnegative length");
    std::vector<double> pts;
    if (q.cell_count() > 0) {
        double h = q.mesh();
        for (double x = h; x < std::min(upto, q.support()); x += h) pts.push_back(x);
        if (q.support() < upto) pts.push_back(q.support());
    }
    auto bp = merge_breakpoints(std::move(pts), upto);
    return CellSequence(build(bp, [&](double x) { return q.value_at(x); }), upto);
}

CellSequence CellSequence::combined(const PiecewisePotential& p, const PiecewisePotential& q, double upto) {
    if (upto < 0.0) throw config_error("cell sequence needs nonnegative length");
    std::vector<double> pts;
    periodic_breakpoints(p, upto, 0.0, pts);
    if (q.cell_count() > 0) {
        double hq = q.mesh();
        for (double x = hq; x < std::min(upto, q.support()); x += hq) pts.push_back(x);
        if (q.support() < upto) pts.push_back(q.support());
    }
    auto bp = merge_breakpoints(std::move(pts), upto);
    return CellSequence(build(bp, [&](double x) { return p.value_at(x) + q.value_at(x); }), upto);
}

Mat2z propagate(const CellSequence& seq, Cplx z) {
    check_growth_guard(z.imag(), seq.length(), seq.l1_total());
    Mat2z U = Mat2z::identity();
    for (const Cell& c : seq.cells()) {
        left_multiply(cell_matrix(c, z), U);
    }
    return U;
}

void propagate_nodes(const CellSequence& seq, Cplx z, std::vector<Mat2z>& out) {
    check_growth_guard(z.imag(), seq.length(), seq.l1_total());
    out.clear();
    out.reserve(seq.count() + 1);
    Mat2z U = Mat2z::identity();
    out.push_back(U);
    for (const Cell& c : seq.cells()) {
        left_multiply(cell_matrix(c, z), U);
        out.push_back(U);
    }
}

}  // namespace halfxtal
