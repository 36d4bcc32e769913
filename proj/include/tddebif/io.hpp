#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "tddebif/bifurcation.hpp"
#include "tddebif/simulate.hpp"
#include "tddebif/spectrum.hpp"
#include "tddebif/steady.hpp"

namespace tddebif {

using json = nlohmann::ordered_json;

// Parses a config file; syntax errors report line and column, schema errors
// the offending key path. Both throw ConfigError.
json load_json(const std::string& path);

json to_json(const Nonlinearity& nl);
json to_json(const ModelParams& p);
// Reads keys beta, mu, gamma, a, g, v; an exponent may be the string "inf".
// `where` prefixes error messages with the location in the config.
ModelParams params_from_json(const json& j, const std::string& where = "model");

json to_json(const SpectrumReport& r);
json to_json(const OrbitMetrics& m);
json to_json(const HopfPoint& h);
json to_json(const FoldPoint& f);
json to_json(const CurveEvent& e, SweepParam sweep);
json to_json(const LimitingDiagram& d);
json to_json(const CornerGammas& c);

// Required typed field access with path-addressed errors.
double get_number(const json& j, const std::string& key, const std::string& where);
double get_number(const json& j, const std::string& key, const std::string& where, double fallback);
int get_int(const json& j, const std::string& key, const std::string& where, int fallback);
bool get_bool(const json& j, const std::string& key, const std::string& where, bool fallback);
std::string get_string(const json& j, const std::string& key, const std::string& where, const std::string& fallback);
std::pair<double, double> get_range(const json& j, const std::string& key, const std::string& where);

// Cell of a CSV row: a number, an empty cell, or text.
struct Cell {
    enum class Kind { Number, Empty, Text } kind;
    double number = 0;
    std::string text;

    Cell(double v) : kind(Kind::Number), number(v) {}
    Cell(int v) : kind(Kind::Number), number(v) {}
    Cell(std::optional<int> v) : kind(v ? Kind::Number : Kind::Empty), number(v ? *v : 0) {}
    Cell(const char* s) : kind(Kind::Text), text(s) {}
    Cell(std::string s) : kind(Kind::Text), text(std::move(s)) {}
    static Cell empty() { return Cell(std::optional<int>{}); }
};

// Shortest decimal text that reads back to the same double (17 significant digits).
std::string format_number(double v);

class CsvWriter {
public:
    CsvWriter(std::ostream& out, const std::vector<std::string>& header);
    void row(const std::vector<Cell>& cells);

private:
    std::ostream& out_;
    std::size_t columns_;
};

}  // namespace tddebif
