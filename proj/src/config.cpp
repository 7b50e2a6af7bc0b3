#include "halfxtal/config.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace halfxtal {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<double> parse_numbers(const std::string& s, const std::string& key) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(item, &pos));
            if (pos != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw config_error("bad number in '" + key + "': " + item);
        }
    }
    return out;
}

double get_num(const std::map<std::string, std::string>& kv, const std::string& key, double dflt) {
    auto it = kv.find(key);
    if (it == kv.end()) return dflt;
    auto v = parse_numbers(it->second, key);
    if (v.size() != 1) throw config_error("expected one number for '" + key + "'");
    return v[0];
}

bool get_bool(const std::map<std::string, std::string>& kv, const std::string& key, bool dflt) {
    auto it = kv.find(key);
    if (it == kv.end()) return dflt;
    std::string v = trim(it->second);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw config_error("bad boolean for '" + key + "': " + v);
}

PiecewisePotential build_p(const std::map<std::string, std::string>& kv) {
    auto cells = kv.find("cells");
    if (cells != kv.end()) {
        auto v = parse_numbers(cells->second, "cells");
        if (v.empty()) throw config_error("[p] cells is empty");
        return PiecewisePotential::periodic(std::move(v));
    }
    auto expr = kv.find("expr");
    if (expr == kv.end()) return PiecewisePotential::periodic({0.0});
    int mesh = static_cast<int>(get_num(kv, "mesh", 256));
    return sample_periodic(parse_potential_expr(expr->second), mesh);
}

PiecewisePotential build_q(const std::map<std::string, std::string>& kv) {
    if (kv.empty()) return PiecewisePotential::none();
    double support = get_num(kv, "support", 1.0);
    auto cells = kv.find("cells");
    if (cells != kv.end()) {
        auto v = parse_numbers(cells->second, "cells");
        if (v.empty()) throw config_error("[q] cells is empty");
        return PiecewisePotential::compact(std::move(v), support);
    }
    auto expr = kv.find("expr");
    if (expr == kv.end()) return PiecewisePotential::none();
    int mesh = static_cast<int>(
        get_num(kv, "mesh", std::max(1.0, std::round(256.0 * support))));
    return sample_compact(parse_potential_expr(expr->second), support, mesh);
}

}  // namespace

std::string config_hash(const std::string& canonical_text) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : canonical_text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

RunConfig RunConfig::parse(const std::string& text) {
    std::map<std::string, std::map<std::string, std::string>> sections;
    std::vector<Rect> rects;
    std::string section;
    std::vector<std::string> canon;

    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        auto hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
        line = trim(line);
        if (line.empty()) continue;
        canon.push_back(line);
        if (line.front() == '[') {
            if (line.back() != ']') throw config_error("unterminated section: " + line);
            section = trim(line.substr(1, line.size() - 2));
            if (section != "p" && section != "q" && section != "run" && section != "states")
                throw config_error("unknown section [" + section + "]");
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) throw config_error("expected key = value: " + line);
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (section.empty()) throw config_error("key outside any section: " + key);
        if (section == "run" && key == "rect") {
            auto v = parse_numbers(value, "rect");
            if (v.size() != 4) throw config_error("rect wants x0,x1,y0,y1");
            rects.push_back({v[0], v[1], v[2], v[3]});
            continue;
        }
        sections[section][key] = value;
    }

    RunConfig cfg;
    cfg.p = build_p(sections["p"]);
    cfg.q = build_q(sections["q"]);
    const auto& run = sections["run"];
    cfg.nmax = static_cast<int>(get_num(run, "nmax", 20));
    cfg.rmax = get_num(run, "rmax", 60.0);
    cfg.depth = get_num(run, "depth", 0.0);
    cfg.threads = static_cast<int>(get_num(run, "threads", 1));
    cfg.seed = static_cast<unsigned long>(get_num(run, "seed", 12345));
    cfg.normalize = get_bool(run, "normalize", true);
    auto out = run.find("out");
    if (out != run.end()) cfg.out_dir = trim(out->second);
    cfg.rects = std::move(rects);

    const auto& st = sections["states"];
    cfg.states.closed_gap_rel = get_num(st, "closed_gap_rel", cfg.states.closed_gap_rel);
    cfg.states.ratio_tol = get_num(st, "ratio_tol", cfg.states.ratio_tol);
    cfg.states.edge_match_rel = get_num(st, "edge_match_rel", cfg.states.edge_match_rel);
    cfg.states.newton_rel = get_num(st, "newton_rel", cfg.states.newton_rel);
    cfg.states.scan_points = static_cast<int>(get_num(st, "scan_points", cfg.states.scan_points));
    cfg.states.axis_margin = get_num(st, "axis_margin", cfg.states.axis_margin);
    cfg.states.winding_tol = get_num(st, "winding_tol", cfg.states.winding_tol);
    cfg.states.max_retries = static_cast<int>(get_num(st, "max_retries", cfg.states.max_retries));
    cfg.states.min_box = get_num(st, "min_box", cfg.states.min_box);

    if (cfg.nmax < 1) throw config_error("nmax must be >= 1");
    if (!(cfg.rmax > 0.0)) throw config_error("rmax must be positive");
    if (cfg.threads < 1) throw config_error("threads must be >= 1");

    std::string canonical;
    for (const auto& l : canon) {
        canonical += l;
        canonical += '\n';
    }
    cfg.hash = config_hash(canonical);
    return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

struct CsvWriter::Impl {
    std::ofstream out;
    std::string hash;
    std::size_t ncols = 0;
};

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& columns,
                     const std::string& config_hash)
    : impl_(new Impl) {
    impl_->out.open(path);
    if (!impl_->out) {
        delete impl_;
        throw config_error("cannot open output file: " + path);
    }
    impl_->hash = config_hash;
    impl_->ncols = columns.size();
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (i) impl_->out << ',';
        impl_->out << columns[i];
    }
    impl_->out << ",config_hash\n";
}

CsvWriter::~CsvWriter() { delete impl_; }

void CsvWriter::row(const std::vector<std::string>& fields) {
    if (fields.size() != impl_->ncols)
        throw config_error("csv row width mismatch");
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) impl_->out << ',';
        impl_->out << fields[i];
    }
    impl_->out << ',' << impl_->hash << '\n';
}

std::string CsvWriter::num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string CsvWriter::num(long v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%ld", v);
    return buf;
}

}  // namespace halfxtal
