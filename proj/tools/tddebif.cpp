#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "tddebif/bifurcation.hpp"
#include "tddebif/errors.hpp"
#include "tddebif/io.hpp"
#include "tddebif/numeric.hpp"
#include "tddebif/simulate.hpp"
#include "tddebif/spectrum.hpp"
#include "tddebif/steady.hpp"

using namespace tddebif;
namespace fs = std::filesystem;

namespace {

struct Run {
    json config;
    ModelParams model;
    json opts;  // section named after the command, possibly empty
    fs::path out;
    unsigned workers = 1;
};

std::ofstream open_out(const Run& r, const std::string& name) {
    std::ofstream f(r.out / name, std::ios::binary);
    if (!f) throw ConfigError((r.out / name).string() + ": cannot write");
    return f;
}

void write_json(const Run& r, const std::string& name, const json& j) {
    auto f = open_out(r, name);
    f << j.dump(2) << '\n';
}

const std::vector<std::string> kSteadyHeader = {"xi", "gamma", "tau", "A", "Q", "M", "unstable_count"};

std::vector<Cell> steady_row(const SteadyState& s) {
    return {s.xi, s.gamma, s.tau, s.A, s.Q, s.M, Cell(s.unstable_count)};
}

void cmd_steady(const Run& r) {
    const std::string where = "steady";
    std::vector<std::vector<SteadyState>> rows;
    if (r.opts.contains("xi_range")) {
        auto [lo, hi] = get_range(r.opts, "xi_range", where);
        auto branch = steady_branch(r.model, lo, hi, get_int(r.opts, "count", where, 200));
        rows.resize(branch.size());
        parallel_for(branch.size(), r.workers, [&](std::size_t i) {
            auto q = r.model;
            q.gamma = branch[i].gamma;
            classify(q, branch[i]);
            rows[i] = {branch[i]};
        });
    } else {
        std::vector<double> gammas;
        if (r.opts.contains("gamma_range")) {
            auto [lo, hi] = get_range(r.opts, "gamma_range", where);
            int count = get_int(r.opts, "count", where, 50);
            if (count < 2) throw ConfigError(where + ".count: needs at least 2");
            for (int i = 0; i < count; ++i) gammas.push_back(lo + (hi - lo) * i / (count - 1));
        } else {
            gammas.push_back(get_number(r.opts, "gamma", where, r.model.gamma));
        }
        rows.resize(gammas.size());
        parallel_for(gammas.size(), r.workers, [&](std::size_t i) {
            auto q = r.model;
            q.gamma = gammas[i];
            rows[i] = find_steady_states(q);
            for (auto& s : rows[i]) classify(q, s);
        });
    }
    auto f = open_out(r, "steady.csv");
    CsvWriter csv(f, kSteadyHeader);
    for (const auto& group : rows)
        for (const auto& s : group) csv.row(steady_row(s));

    if (!get_bool(r.opts, "spectra", where, false)) return;
    std::vector<const SteadyState*> flat;
    for (const auto& group : rows)
        for (const auto& s : group) flat.push_back(&s);
    std::vector<json> reports(flat.size());
    parallel_for(flat.size(), r.workers, [&](std::size_t i) {
        auto q = r.model;
        q.gamma = flat[i]->gamma;
        auto c = CharContext::from(q, *flat[i]);
        reports[i] = {{"xi", flat[i]->xi}, {"gamma", flat[i]->gamma}, {"spectrum", to_json(find_roots(c, default_box(c)))}};
    });
    write_json(r, "spectra.json", {{"model", to_json(r.model)}, {"states", reports}});
}

void cmd_fold(const Run& r) {
    auto folds = find_folds(r.model);
    auto f = open_out(r, "fold.csv");
    CsvWriter csv(f, {"xi", "gamma", "tau"});
    for (const auto& p : folds) csv.row({p.xi, p.gamma, p.tau});
}

void cmd_hopf(const Run& r) {
    const std::string where = "hopf";
    auto points = hopf_points(r.model, get_int(r.opts, "k_max", where, 2));
    if (get_bool(r.opts, "criticality", where, false)) {
        ProbeOptions probe;
        probe.offset = get_number(r.opts, "probe_offset", where, probe.offset);
        parallel_for(points.size(), r.workers, [&](std::size_t i) {
            auto q = r.model;
            q.gamma = points[i].gamma;
            try {
                points[i].criticality = criticality(q, points[i], probe);
            } catch (const InconclusiveError&) {
                points[i].criticality = Criticality::Unknown;
            }
        });
    }
    auto f = open_out(r, "hopf.csv");
    CsvWriter csv(f, {"xi", "gamma", "omega", "tau", "k", "regime", "criticality"});
    for (const auto& h : points)
        csv.row({h.xi, h.gamma, h.omega, h.tau, h.k, to_string(h.regime), to_string(h.criticality)});
}

SweepParam sweep_from(const std::string& s, const std::string& path) {
    if (s == "m") return SweepParam::M;
    if (s == "n") return SweepParam::N;
    if (s == "mn" || s == "m=n") return SweepParam::MN;
    throw ConfigError(path + ": sweep must be \"m\", \"n\" or \"mn\"");
}

CurveKind kind_from(const std::string& s, const std::string& path) {
    if (s == "fold") return CurveKind::Fold;
    if (s == "hopf") return CurveKind::Hopf;
    throw ConfigError(path + ": kind must be \"fold\" or \"hopf\"");
}

BifCurve curve_from(const Run& r, const json& entry, const std::string& where) {
    auto kind = kind_from(get_string(entry, "kind", where, "fold"), where + ".kind");
    auto sweep = sweep_from(get_string(entry, "sweep", where, "m"), where + ".sweep");
    auto [lo, hi] = get_range(entry, "range", where);
    TraceOptions opt;
    opt.steps = get_int(entry, "steps", where, opt.steps);
    opt.min_step = get_number(entry, "min_step", where, opt.min_step);
    opt.k = get_int(entry, "k", where, 0);
    return trace_curve(r.model, kind, sweep, lo, hi, opt);
}

const std::vector<std::string> kCurveHeader = {"second_param", "gamma", "xi", "omega", "kind", "unstable_count", "annotation"};

void curve_rows(CsvWriter& csv, const BifCurve& c) {
    for (const auto& p : c.points)
        csv.row({p.param, p.gamma, p.xi, c.kind == CurveKind::Hopf ? Cell(p.omega) : Cell::empty(), to_string(c.kind),
                 Cell(p.unstable_count), ""});
    for (const auto& e : c.events)
        csv.row({e.param, e.gamma, e.xi, Cell::empty(), to_string(c.kind), Cell::empty(), to_string(e.kind)});
}

json curve_summary(const BifCurve& c) {
    json events = json::array();
    for (const auto& e : c.events) events.push_back(to_json(e, c.sweep));
    return {{"kind", to_string(c.kind)},
            {"sweep", to_string(c.sweep)},
            {"range", {c.range_lo, c.range_hi}},
            {"k", c.k},
            {"points", c.points.size()},
            {"events", events}};
}

ScanOptions scan_from(const json& j, const std::string& where, bool bautin_default) {
    ScanOptions s;
    s.bautin = get_bool(j, "bautin", where, bautin_default);
    s.bautin_samples = get_int(j, "bautin_samples", where, s.bautin_samples);
    s.probe.offset = get_number(j, "probe_offset", where, s.probe.offset);
    s.probe.max_time = get_number(j, "probe_max_time", where, s.probe.max_time);
    return s;
}

void cmd_curve2(const Run& r) {
    const std::string where = "curve2";
    auto c = curve_from(r, r.opts, where);
    codim2_scan(c, scan_from(r.opts, where, false));
    auto f = open_out(r, "curve2.csv");
    CsvWriter csv(f, kCurveHeader);
    curve_rows(csv, c);
    write_json(r, "curve2.json", {{"model", to_json(r.model)}, {"curves", json::array({curve_summary(c)})}});
}

void cmd_codim2(const Run& r) {
    const std::string where = "codim2";
    if (!r.opts.contains("curves") || !r.opts["curves"].is_array() || r.opts["curves"].empty())
        throw ConfigError(where + ".curves: expected a non-empty array of curve specifications");
    const json& entries = r.opts["curves"];
    auto scan = scan_from(r.opts, where, true);
    std::vector<BifCurve> curves(entries.size());
    // Curves are independent; each scan runs its probes sequentially.
    parallel_for(entries.size(), r.workers, [&](std::size_t i) {
        std::string at = where + ".curves[" + std::to_string(i) + "]";
        curves[i] = curve_from(r, entries[i], at);
        codim2_scan(curves[i], scan);
    });
    auto f = open_out(r, "codim2.csv");
    CsvWriter csv(f, kCurveHeader);
    json summary = json::array();
    for (const auto& c : curves) {
        curve_rows(csv, c);
        summary.push_back(curve_summary(c));
    }
    write_json(r, "codim2.json", {{"model", to_json(r.model)}, {"curves", summary}});
}

History history_from(const Run& r, const std::string& where) {
    if (!r.opts.contains("history")) return default_history(r.model);
    const json& h = r.opts["history"];
    const std::string at = where + ".history";
    if (h.contains("constant")) return History::constant(get_number(h, "constant", at));
    if (!h.contains("t") || !h.contains("x") || !h["t"].is_array() || !h["x"].is_array())
        throw ConfigError(at + ": expected {\"constant\": x} or {\"t\": [...], \"x\": [...]}");
    std::vector<double> t, x;
    for (const auto& v : h["t"]) {
        if (!v.is_number()) throw ConfigError(at + ".t: expected numbers");
        t.push_back(v.get<double>());
    }
    for (const auto& v : h["x"]) {
        if (!v.is_number()) throw ConfigError(at + ".x: expected numbers");
        x.push_back(v.get<double>());
    }
    try {
        return History::table(std::move(t), std::move(x));
    } catch (const ConfigError& e) {
        throw ConfigError(at + ": " + e.what());
    }
}

void cmd_simulate(const Run& r) {
    const std::string where = "simulate";
    const double t_end = get_number(r.opts, "t_end", where, 500);
    if (!(t_end > 0)) throw ConfigError(where + ".t_end: must be positive");
    int every = get_int(r.opts, "sample_every", where, 10);
    if (every < 1) throw ConfigError(where + ".sample_every: must be at least 1");
    StepControl ctl;
    ctl.h = get_number(r.opts, "step", where, 0.0);
    ctl.refine_interfaces = get_bool(r.opts, "refine_interfaces", where, true);
    auto hist = history_from(r, where);
    auto tr = integrate(r.model, hist, t_end, ctl);

    auto f = open_out(r, "trajectory.csv");
    CsvWriter csv(f, {"t", "x", "tau", "threshold_residual"});
    double worst = 0;
    for (std::size_t i = 0; i < tr.size(); i += std::size_t(every)) {
        double res = threshold_residual(r.model, tr, tr.t[i]);
        worst = std::max(worst, res);
        csv.row({tr.t[i], tr.x[i], tr.tau[i], res});
    }

    const double t_cut = get_number(r.opts, "t_cut", where, 0.5 * t_end);
    const double cap = get_number(r.opts, "cap", where, 1e3);
    auto states = find_steady_states(r.model);
    double section;
    if (r.opts.contains("section")) {
        section = get_number(r.opts, "section", where);
    } else {
        // Steady state nearest the late-time mean of the trajectory.
        double sum = 0;
        int n = 0;
        for (std::size_t i = 0; i < tr.size(); ++i)
            if (tr.t[i] >= t_cut) sum += tr.x[i], ++n;
        double mean = n ? sum / n : tr.x.back();
        section = states.empty() ? mean : states.front().xi;
        for (const auto& s : states)
            if (std::abs(s.xi - mean) < std::abs(section - mean)) section = s.xi;
    }
    json xs = json::array();
    for (const auto& s : states) xs.push_back(s.xi);
    json out = {{"model", to_json(r.model)},
                {"t_end", t_end},
                {"tau0", tr.tau.front()},
                {"x_end", tr.x.back()},
                {"section", section},
                {"steady_states", xs},
                {"max_threshold_residual", worst}};
    try {
        auto m = orbit_metrics(tr, section, t_cut, cap);
        out["status"] = "OSCILLATION";
        out["metrics"] = to_json(m);
    } catch (const NoOscillationError&) {
        out["status"] = "NO_OSCILLATION";
        out["metrics"] = nullptr;
    }
    write_json(r, "metrics.json", out);
}

void cmd_limiting(const Run& r) {
    const std::string where = "limiting";
    auto [lo, hi] = get_range(r.opts, "gamma_range", where);
    auto d = limiting_diagram(r.model, lo, hi);
    auto f = open_out(r, "limiting.csv");
    CsvWriter csv(f, {"kind", "gamma_lo", "gamma_hi", "xi_lo", "xi_hi"});
    for (const auto& s : d.stable) csv.row({"STABLE", s.gamma_lo, s.gamma_hi, s.xi_lo, s.xi_hi});
    for (const auto& s : d.singular) csv.row({"SINGULAR", s.gamma_lo, s.gamma_hi, s.theta, s.theta});
    write_json(r, "limiting.json", {{"model", to_json(r.model)}, {"diagram", to_json(d)}});
}

}  // namespace

int main(int argc, char** argv) {
    const std::map<std::string, void (*)(const Run&)> commands = {
        {"steady", cmd_steady}, {"fold", cmd_fold},         {"hopf", cmd_hopf},         {"curve2", cmd_curve2},
        {"codim2", cmd_codim2}, {"simulate", cmd_simulate}, {"limiting", cmd_limiting},
    };

    CLI::App app{"Steady states, bifurcations and simulation of the threshold-delay model"};
    app.require_subcommand(1, 1);
    std::string config_path, out_dir = ".";
    unsigned workers = 1;
    for (const auto& [name, fn] : commands) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON config file")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--workers", workers, "parallel workers")->check(CLI::PositiveNumber);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    const std::string name = app.get_subcommands().front()->get_name();

    try {
        Run r;
        r.config = load_json(config_path);
        if (!r.config.is_object()) throw ConfigError(config_path + ": top level must be an object");
        if (!r.config.contains("model")) throw ConfigError(config_path + ": missing \"model\"");
        r.model = params_from_json(r.config["model"]);
        r.opts = r.config.contains(name) ? r.config[name] : json::object();
        if (!r.opts.is_object()) throw ConfigError(name + ": expected an object");
        r.out = out_dir;
        std::error_code ec;
        fs::create_directories(r.out, ec);
        if (ec) throw ConfigError(out_dir + ": " + ec.message());
        r.workers = default_workers(workers);
        commands.at(name)(r);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const RegimeError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
