#include "halfxtal/potential.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <limits>

namespace halfxtal {

PiecewisePotential::PiecewisePotential(Kind k, std::vector<double> v, double support)
    : kind_(k), values_(std::move(v)), support_(support) {
    if (values_.empty()) throw config_error("potential needs at least one cell");
    if (!(support_ > 0.0)) throw config_error("potential support must be positive");
    for (double x : values_) {
        if (!std::isfinite(x)) throw config_error("potential cell values must be finite");
    }
}

PiecewisePotential PiecewisePotential::periodic(std::vector<double> values) {
    return PiecewisePotential(Kind::Periodic, std::move(values), 1.0);
}

PiecewisePotential PiecewisePotential::compact(std::vector<double> values, double support) {
    return PiecewisePotential(Kind::Compact, std::move(values), support);
}

PiecewisePotential PiecewisePotential::none() {
    return PiecewisePotential(Kind::Compact, {0.0}, 1.0);
}

bool PiecewisePotential::is_zero() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
}

double PiecewisePotential::effective_support() const {
    if (kind_ != Kind::Compact) return support_;
    std::size_t last = values_.size();
    while (last > 0 && values_[last - 1] == 0.0) --last;
    return mesh() * static_cast<double>(last);
}

double PiecewisePotential::value_at(double x) const {
    if (kind_ == Kind::Periodic) {
        double u = x - std::floor(x);  // wrap into [0,1)
        auto i = static_cast<std::size_t>(u * static_cast<double>(values_.size()));
        if (i >= values_.size()) i = values_.size() - 1;
        return values_[i];
    }
    if (x < 0.0 || x >= support_) return 0.0;
    auto i = static_cast<std::size_t>(x / mesh());
    if (i >= values_.size()) i = values_.size() - 1;
    return values_[i];
}

double PiecewisePotential::norm_l1(double upto) const {
    if (upto <= 0.0) return 0.0;
    double h = mesh();
    double acc = 0.0;
    if (kind_ == Kind::Periodic) {
        double per_period = 0.0;
        for (double v : values_) per_period += std::abs(v) * h;
        double whole = std::floor(upto);
        acc = whole * per_period;
        double rest = upto - whole;
        for (std::size_t i = 0; i < values_.size() && rest > 0.0; ++i) {
            double take = std::min(rest, h);
            acc += std::abs(values_[i]) * take;
            rest -= take;
        }
        return acc;
    }
    double rest = std::min(upto, support_);
    for (std::size_t i = 0; i < values_.size() && rest > 0.0; ++i) {
        double take = std::min(rest, h);
        acc += std::abs(values_[i]) * take;
        rest -= take;
    }
    return acc;
}

double PiecewisePotential::total() const {
    double h = mesh();
    double acc = 0.0;
    for (double v : values_) acc += v * h;
    return acc;
}

double PiecewisePotential::min_value() const {
    return *std::min_element(values_.begin(), values_.end());
}

double PiecewisePotential::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

PiecewisePotential PiecewisePotential::shifted(double c) const {
    std::vector<double> v = values_;
    for (double& x : v) x += c;
    return PiecewisePotential(kind_, std::move(v), support_);
}

PiecewisePotential PiecewisePotential::dilated(double tau) const {
    if (kind_ != Kind::Compact) throw config_error("dilation only applies to compact potentials");
    if (!(tau > 0.0)) throw config_error("dilation factor must be positive");
    return PiecewisePotential(kind_, values_, support_ * tau);
}

PiecewisePotential sample_periodic(const std::function<double(double)>& f, int cells) {
    if (cells < 1) throw config_error("cell count must be positive");
    std::vector<double> v(static_cast<std::size_t>(cells));
    double h = 1.0 / cells;
    for (int i = 0; i < cells; ++i) v[static_cast<std::size_t>(i)] = f((i + 0.5) * h);
    return PiecewisePotential::periodic(std::move(v));
}

PiecewisePotential sample_compact(const std::function<double(double)>& f, double support, int cells) {
    if (cells < 1) throw config_error("cell count must be positive");
    if (!(support > 0.0)) throw config_error("compact support must be positive");
    std::vector<double> v(static_cast<std::size_t>(cells));
    double h = support / cells;
    for (int i = 0; i < cells; ++i) v[static_cast<std::size_t>(i)] = f((i + 0.5) * h);
    return PiecewisePotential::compact(std::move(v), support);
}

namespace {

struct ExprTerm {
    enum class Basis { Const, Cos, Sin, Step } basis;
    double coef = 1.0;
    double k = 0.0;      // harmonic for cos/sin
    double a = 0.0, b = 0.0, v = 0.0;  // step parameters
};

class ExprParser {
public:
    explicit ExprParser(const std::string& s) : s_(s) {}

    std::vector<ExprTerm> parse() {
        std::vector<ExprTerm> terms;
        skip_ws();
        if (eof()) throw config_error("empty potential expression");
        double sign = 1.0;
        if (peek() == '+' || peek() == '-') sign = (get() == '-') ? -1.0 : 1.0;
        terms.push_back(term(sign));
        while (true) {
            skip_ws();
            if (eof()) break;
            char c = get();
            if (c != '+' && c != '-') throw config_error("expected '+' or '-' in potential expression");
            terms.push_back(term(c == '-' ? -1.0 : 1.0));
        }
        return terms;
    }

private:
    bool eof() const { return pos_ >= s_.size(); }
    char peek() const { return s_[pos_]; }
    char get() { return s_[pos_++]; }
    void skip_ws() {
        while (!eof() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
    }

    double number() {
        skip_ws();
        const char* start = s_.c_str() + pos_;
        char* end = nullptr;
        double v = std::strtod(start, &end);
        if (end == start) throw config_error("expected a number in potential expression");
        pos_ += static_cast<std::size_t>(end - start);
        return v;
    }

    void expect(char c) {
        skip_ws();
        if (eof() || get() != c)
            throw config_error(std::string("expected '") + c + "' in potential expression");
    }

    bool starts_with(const char* word) {
        skip_ws();
        std::size_t n = std::string(word).size();
        if (s_.compare(pos_, n, word) == 0) {
            pos_ += n;
            return true;
        }
        return false;
    }

    ExprTerm term(double sign) {
        skip_ws();
        ExprTerm t;
        t.coef = sign;
        bool have_coef = false;
        if (!eof() && (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.')) {
            t.coef *= number();
            have_coef = true;
            skip_ws();
            if (!eof() && peek() == '*') {
                ++pos_;
            } else {
                t.basis = ExprTerm::Basis::Const;
                return t;
            }
        }
        if (starts_with("cos(")) {
            t.basis = ExprTerm::Basis::Cos;
            t.k = number();
            expect(')');
        } else if (starts_with("sin(")) {
            t.basis = ExprTerm::Basis::Sin;
            t.k = number();
            expect(')');
        } else if (starts_with("step(")) {
            t.basis = ExprTerm::Basis::Step;
            t.a = number();
            expect(',');
            t.b = number();
            expect(',');
            t.v = number();
            expect(')');
            if (!(t.a < t.b)) throw config_error("step(a,b,v) needs a < b");
        } else if (have_coef) {
            throw config_error("dangling '*' in potential expression");
        } else {
            throw config_error("unrecognised term in potential expression");
        }
        return t;
    }

    const std::string& s_;
    std::size_t pos_ = 0;
};

}  // namespace

std::function<double(double)> parse_potential_expr(const std::string& expr) {
    auto terms = ExprParser(expr).parse();
    return [terms](double x) {
        double acc = 0.0;
        for (const auto& t : terms) {
            switch (t.basis) {
                case ExprTerm::Basis::Const: acc += t.coef; break;
                case ExprTerm::Basis::Cos: acc += t.coef * std::cos(2.0 * PI * t.k * x); break;
                case ExprTerm::Basis::Sin: acc += t.coef * std::sin(2.0 * PI * t.k * x); break;
                case ExprTerm::Basis::Step:
                    if (x >= t.a && x < t.b) acc += t.coef * t.v;
                    break;
            }
        }
        return acc;
    };
}

FourierData fourier_p(const PiecewisePotential& p, int n) {
    if (p.kind() != PiecewisePotential::Kind::Periodic)
        throw config_error("fourier_p expects a periodic potential");
    FourierData out;
    out.n = n;
    if (n == 0) {
        out.p_cn = p.total();
        out.p_sn = 0.0;
        out.p_n = Cplx(out.p_cn, 0.0);
        return out;
    }
    double w = 2.0 * PI * n;
    double h = p.mesh();
    double pc = 0.0, ps = 0.0;
    const auto& v = p.values();
    for (std::size_t j = 0; j < v.size(); ++j) {
        double x0 = static_cast<double>(j) * h;
        double x1 = static_cast<double>(j + 1) * h;
        pc += v[j] * (std::sin(w * x1) - std::sin(w * x0)) / w;
        ps += v[j] * (std::cos(w * x0) - std::cos(w * x1)) / w;
    }
    out.p_cn = pc;
    out.p_sn = ps;
    out.p_n = Cplx(pc, -ps);
    return out;
}

namespace {

// expm1(w)/w, stable for small |w|.
Cplx expm1_over(Cplx w) {
    if (std::abs(w) < 1e-4) {
        return 1.0 + w * (1.0 / 2.0 + w * (1.0 / 6.0 + w * (1.0 / 24.0 + w * (1.0 / 120.0 + w / 720.0))));
    }
    return (std::exp(w) - 1.0) / w;
}

}  // namespace

Cplx fourier_q(const PiecewisePotential& q, Cplx z) {
    if (q.kind() != PiecewisePotential::Kind::Compact)
        throw config_error("fourier_q expects a compact potential");
    double h = q.mesh();
    Cplx acc(0.0, 0.0);
    Cplx two_iz = Cplx(0.0, 2.0) * z;
    const auto& v = q.values();
    for (std::size_t j = 0; j < v.size(); ++j) {
        double x0 = static_cast<double>(j) * h;
        // int_{x0}^{x0+h} e^{2izx} dx = e^{2 i z x0} * h * expm1(2 i z h)/(2 i z h)
        acc += v[j] * std::exp(two_iz * x0) * h * expm1_over(two_iz * h);
    }
    return acc;
}

double q_hat_cn(const PiecewisePotential& q, int n) {
    return fourier_q(q, Cplx(PI * n, 0.0)).real();
}

double q_total(const PiecewisePotential& q) { return fourier_q(q, Cplx(0.0, 0.0)).real(); }

double cf_constant(const PiecewisePotential& p, const PiecewisePotential& q) {
    double t = q.effective_support();
    double p1 = p.norm_l1(1.0);
    // ||p+q||_t with the exact merged cells: |p+q| integrated over [0,t]
    double pq = 0.0;
    {
        // walk the merged breakpoints of p and q on [0,t]
        double x = 0.0;
        while (x < t) {
            double hp = p.mesh();
            double hq = q.mesh();
            double next_p = (std::floor(x / hp + 1e-12) + 1.0) * hp;
            double next_q = (std::floor(x / hq + 1e-12) + 1.0) * hq;
            double nx = std::min({next_p, next_q, t});
            if (nx <= x) nx = std::min(x + std::min(hp, hq), t);
            double mid = 0.5 * (x + nx);
            pq += std::abs(p.value_at(mid) + q.value_at(mid)) * (nx - x);
            x = nx;
        }
    }
    return 3.0 * (p1 + pq) * std::exp(2.0 * pq + p1);
}

}  // namespace halfxtal
