#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "halfxtal/potential.hpp"
#include "halfxtal/states.hpp"

namespace halfxtal {

// Run configuration parsed from the INI-style spec file:
//
//   [p]
//   expr = 2*cos(1)        # or cells = v0, v1, ...
//   mesh = 256
//   [q]
//   expr = 1
//   support = 1.0
//   mesh = 256
//   [run]
//   nmax = 20
//   rmax = 60
//   out = out
//   threads = 1
//   seed = 12345
//   normalize = true
//
struct RunConfig {
    PiecewisePotential p = PiecewisePotential::periodic({0.0});
    PiecewisePotential q = PiecewisePotential::none();
    int nmax = 20;
    double rmax = 60.0;
    double depth = 0.0;  // 0 = automatic from the logarithmic law
    int threads = 1;
    unsigned long seed = 12345;
    std::string out_dir = ".";
    bool normalize = true;
    std::vector<Rect> rects;  // explicit resonance search boxes (optional)
    StatesOptions states;

    std::string hash;  // FNV-1a hash of the canonical config text

    static RunConfig load(const std::string& path);
    static RunConfig parse(const std::string& text);
};

// FNV-1a 64-bit over the canonicalised text, hex-encoded.
std::string config_hash(const std::string& canonical_text);

// Minimal deterministic CSV writer: fixed column order, fixed formatting
// (%.12g), one config-hash column per row.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& columns,
              const std::string& config_hash);
    ~CsvWriter();

    void row(const std::vector<std::string>& fields);

    static std::string num(double v);
    static std::string num(long v);

private:
    struct Impl;
    Impl* impl_;
};

}  // namespace halfxtal
