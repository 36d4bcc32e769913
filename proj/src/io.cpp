#include "tddebif/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tddebif/errors.hpp"

namespace tddebif {

namespace {

const json& field(const json& j, const std::string& key, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    auto it = j.find(key);
    if (it == j.end()) throw ConfigError(where + "." + key + ": missing");
    return *it;
}

double number_of(const json& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError(path + ": expected a number");
    return v.get<double>();
}

Nonlinearity nl_from_json(const json& j, const std::string& where) {
    Nonlinearity nl;
    nl.lo = get_number(j, "lo", where);
    nl.hi = get_number(j, "hi", where);
    nl.theta = get_number(j, "theta", where, 1.0);
    const json& e = field(j, "exp", where);
    if (e.is_string()) {
        if (e.get<std::string>() != "inf") throw ConfigError(where + ".exp: the only string accepted is \"inf\"");
        nl.exponent = kInfinity;
    } else {
        nl.exponent = number_of(e, where + ".exp");
    }
    return nl;
}

json number_or_inf(double v) {
    if (std::isinf(v)) return "inf";
    return v;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        // nlohmann reports "line L, column C" inside the message.
        throw ConfigError(path + ": " + e.what());
    }
}

json to_json(const Nonlinearity& nl) {
    return {{"lo", nl.lo}, {"hi", nl.hi}, {"theta", nl.theta}, {"exp", number_or_inf(nl.exponent)}};
}

json to_json(const ModelParams& p) {
    return {{"beta", p.beta}, {"mu", p.mu}, {"gamma", p.gamma}, {"a", p.a}, {"g", to_json(p.g)}, {"v", to_json(p.v)}};
}

ModelParams params_from_json(const json& j, const std::string& where) {
    ModelParams p;
    p.beta = get_number(j, "beta", where);
    p.mu = get_number(j, "mu", where);
    p.gamma = get_number(j, "gamma", where);
    p.a = get_number(j, "a", where);
    p.g = nl_from_json(field(j, "g", where), where + ".g");
    p.v = nl_from_json(field(j, "v", where), where + ".v");
    try {
        p.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(where + ": " + e.what());
    }
    return p;
}

json to_json(const SpectrumReport& r) {
    json roots = json::array();
    for (const auto& x : r.roots) roots.push_back({x.lambda.real(), x.lambda.imag(), x.residual});
    return {{"roots", roots},
            {"box", {{"re_lo", r.box.re_lo}, {"re_hi", r.box.re_hi}, {"im_lo", r.box.im_lo}, {"im_hi", r.box.im_hi}}},
            {"unstable_count", r.unstable_count},
            {"rightmost", {r.rightmost.real(), r.rightmost.imag()}}};
}

json to_json(const OrbitMetrics& m) {
    return {{"period", m.period},   {"max_x", m.max_x},
            {"min_x", m.min_x},     {"l2", m.l2},
            {"periodicity_residual", m.periodicity_residual},
            {"blowup", m.blowup},   {"crossings", m.crossings}};
}

json to_json(const HopfPoint& h) {
    return {{"xi", h.xi},       {"gamma", h.gamma},
            {"omega", h.omega}, {"tau", h.tau},
            {"k", h.k},         {"regime", to_string(h.regime)},
            {"criticality", to_string(h.criticality)}};
}

json to_json(const FoldPoint& f) { return {{"xi", f.xi}, {"gamma", f.gamma}, {"tau", f.tau}}; }

json to_json(const CurveEvent& e, SweepParam sweep) {
    return {{"kind", to_string(e.kind)}, {"gamma", e.gamma}, {to_string(sweep), e.param}, {"xi", e.xi}, {"branch", e.branch}};
}

json to_json(const CornerGammas& c) {
    return {{"gamma1", c.gamma1},
            {"gamma2", c.gamma2},
            {"gamma3", c.gamma3},
            {"gamma4", c.gamma4},
            {"gamma13", optional_number(c.gamma13)},
            {"gamma24", optional_number(c.gamma24)},
            {"gamma_gv", optional_number(c.gamma_gv)},
            {"dL", c.dL},
            {"dU", c.dU}};
}

json to_json(const LimitingDiagram& d) {
    json stable = json::array(), singular = json::array();
    for (const auto& s : d.stable)
        stable.push_back({{"gamma_lo", s.gamma_lo}, {"gamma_hi", s.gamma_hi}, {"level", s.level}, {"xi_lo", s.xi_lo},
                          {"xi_hi", number_or_inf(s.xi_hi)}});
    for (const auto& s : d.singular)
        singular.push_back({{"gamma_lo", s.gamma_lo}, {"gamma_hi", s.gamma_hi}, {"theta", s.theta}});
    return {{"stable", stable}, {"singular", singular}, {"corners", to_json(d.corners)}};
}

double get_number(const json& j, const std::string& key, const std::string& where) {
    return number_of(field(j, key, where), where + "." + key);
}

double get_number(const json& j, const std::string& key, const std::string& where, double fallback) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    return get_number(j, key, where);
}

int get_int(const json& j, const std::string& key, const std::string& where, int fallback) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
    return v.get<int>();
}

bool get_bool(const json& j, const std::string& key, const std::string& where, bool fallback) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_boolean()) throw ConfigError(where + "." + key + ": expected true or false");
    return v.get<bool>();
}

std::string get_string(const json& j, const std::string& key, const std::string& where, const std::string& fallback) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_string()) throw ConfigError(where + "." + key + ": expected a string");
    return v.get<std::string>();
}

std::pair<double, double> get_range(const json& j, const std::string& key, const std::string& where) {
    const json& v = field(j, key, where);
    const std::string path = where + "." + key;
    if (!v.is_array() || v.size() != 2) throw ConfigError(path + ": expected [lo, hi]");
    double lo = number_of(v[0], path + "[0]"), hi = number_of(v[1], path + "[1]");
    if (!(hi > lo)) throw ConfigError(path + ": range is empty");
    return {lo, hi};
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(std::ostream& out, const std::vector<std::string>& header) : out_(out), columns_(header.size()) {
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
}

void CsvWriter::row(const std::vector<Cell>& cells) {
    if (cells.size() != columns_) throw std::logic_error("CSV row width does not match the header");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out_ << ',';
        const Cell& c = cells[i];
        if (c.kind == Cell::Kind::Number) out_ << format_number(c.number);
        else if (c.kind == Cell::Kind::Text) out_ << c.text;
    }
    out_ << '\n';
}

}  // namespace tddebif
