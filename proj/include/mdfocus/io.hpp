#ifndef MDFOCUS_IO_HPP
#define MDFOCUS_IO_HPP

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "calibrate.hpp"
#include "edetector.hpp"
#include "engine.hpp"
#include "expectation.hpp"
#include "model.hpp"
#include "simlab.hpp"
#include "statistics.hpp"

namespace mdfocus::io {

using json = nlohmann::json;

inline constexpr const char* kConfigEnv = "MDFOCUS_CONFIG";

struct RunConfig {
    ModelSpec model = ModelSpec::gaussian(1);
    StatConfig stats;
    EngineConfig engine;
    std::optional<ThresholdPlan> thresholds;
    std::optional<std::string> thresholds_path;
    std::string input = "-";
    std::string output = "-";
    std::string format = "jsonl";
    std::optional<std::uint64_t> seed;
};

namespace detail {

inline void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + " must be an object");
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

template <class T>
T get_as(const json& obj, const std::string& key, const std::string& where) {
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("bad or missing value for '" + key + "' in " + where);
    }
}

inline CoordModel coord_from(const json& j, CoordModel base, const std::string& where) {
    if (j.contains("family")) base.family = parse_family(get_as<std::string>(j, "family", where));
    if (j.contains("trials")) base.trials = get_as<int>(j, "trials", where);
    if (j.contains("ym")) base.ym = get_as<double>(j, "ym", where);
    if (j.contains("var_floor")) base.var_floor = get_as<double>(j, "var_floor", where);
    return base;
}

}  // namespace detail

inline ModelSpec model_from_json(const json& j) {
    detail::check_keys(j, {"family", "p", "trials", "ym", "var_floor", "coords"}, "model");
    const CoordModel base = detail::coord_from(j, CoordModel{}, "model");
    std::vector<CoordModel> coords;
    if (j.contains("coords")) {
        const auto& cs = j.at("coords");
        if (!cs.is_array() || cs.empty()) throw ConfigError("model.coords must be a non-empty array");
        if (j.contains("p") && detail::get_as<std::size_t>(j, "p", "model") != cs.size())
            throw ConfigError("model.p disagrees with the length of model.coords");
        for (std::size_t i = 0; i < cs.size(); ++i) {
            const std::string where = "model.coords[" + std::to_string(i) + "]";
            detail::check_keys(cs[i], {"family", "trials", "ym", "var_floor"}, where);
            coords.push_back(detail::coord_from(cs[i], base, where));
        }
    } else {
        const auto p = j.contains("p") ? detail::get_as<long long>(j, "p", "model") : 1;
        if (p < 1) throw ConfigError("model.p must be >= 1");
        coords.assign(static_cast<std::size_t>(p), base);
    }
    return ModelSpec(std::move(coords));
}

inline json model_to_json(const ModelSpec& m) {
    json cs = json::array();
    for (const auto& c : m.coords()) {
        json o{{"family", std::string(family_name(c.family))}};
        if (c.family == Family::binomial) o["trials"] = c.trials;
        if (c.family == Family::pareto) o["ym"] = c.ym;
        if (c.family == Family::gaussian_mean_variance) o["var_floor"] = c.var_floor;
        cs.push_back(o);
    }
    return json{{"p", m.p()}, {"coords", cs}};
}

inline json plan_to_json(const ThresholdPlan& plan) {
    json prov{{"mode", plan.provenance.mode}};
    if (plan.provenance.gamma) prov["gamma"] = *plan.provenance.gamma;
    if (plan.provenance.alpha) prov["alpha"] = *plan.provenance.alpha;
    if (plan.provenance.seed) prov["seed"] = *plan.provenance.seed;
    if (plan.provenance.replicates) prov["replicates"] = *plan.provenance.replicates;
    if (plan.provenance.horizon) prov["horizon"] = *plan.provenance.horizon;
    if (plan.provenance.level) prov["level"] = *plan.provenance.level;
    json th = json::object();
    for (const auto& [name, t] : plan.entries()) {
        if (const auto* f = std::get_if<FixedThreshold>(&t.rule)) {
            th[name] = json{{"type", "fixed"}, {"value", f->c}};
        } else {
            const auto& tv = std::get<TimeVaryingThreshold>(t.rule);
            th[name] = json{{"type", "time_varying"}, {"kind", fa_kind_name(tv.kind)}, {"s", tv.s},
                            {"a", tv.a},         {"p", tv.p},                       {"alpha", tv.alpha}};
        }
    }
    return json{{"provenance", prov}, {"thresholds", th}};
}

inline ThresholdPlan plan_from_json(const json& j) {
    detail::check_keys(j, {"provenance", "thresholds"}, "threshold plan");
    ThresholdPlan plan;
    if (j.contains("provenance")) {
        const auto& p = j.at("provenance");
        detail::check_keys(p, {"mode", "gamma", "alpha", "seed", "replicates", "horizon", "level"}, "provenance");
        if (p.contains("mode")) plan.provenance.mode = detail::get_as<std::string>(p, "mode", "provenance");
        if (p.contains("gamma")) plan.provenance.gamma = detail::get_as<double>(p, "gamma", "provenance");
        if (p.contains("alpha")) plan.provenance.alpha = detail::get_as<double>(p, "alpha", "provenance");
        if (p.contains("seed")) plan.provenance.seed = detail::get_as<std::uint64_t>(p, "seed", "provenance");
        if (p.contains("replicates")) plan.provenance.replicates = detail::get_as<int>(p, "replicates", "provenance");
        if (p.contains("horizon")) plan.provenance.horizon = detail::get_as<std::int64_t>(p, "horizon", "provenance");
        if (p.contains("level")) plan.provenance.level = detail::get_as<double>(p, "level", "provenance");
    }
    if (!j.contains("thresholds") || !j.at("thresholds").is_object())
        throw ConfigError("threshold plan needs a 'thresholds' object");
    for (auto it = j.at("thresholds").begin(); it != j.at("thresholds").end(); ++it) {
        const std::string name = StatSpec::parse(it.key()).name();
        const auto& v = it.value();
        if (v.is_number()) {
            plan.set_fixed(name, v.get<double>());
            continue;
        }
        const std::string where = "thresholds." + it.key();
        detail::check_keys(v, {"type", "value", "kind", "s", "a", "p", "alpha"}, where);
        const auto type = detail::get_as<std::string>(v, "type", where);
        if (type == "fixed") {
            plan.set_fixed(name, detail::get_as<double>(v, "value", where));
        } else if (type == "time_varying") {
            TimeVaryingThreshold tv;
            tv.kind = parse_fa_kind(detail::get_as<std::string>(v, "kind", where));
            if (v.contains("s")) tv.s = detail::get_as<int>(v, "s", where);
            if (v.contains("a")) tv.a = detail::get_as<double>(v, "a", where);
            tv.p = detail::get_as<int>(v, "p", where);
            tv.alpha = detail::get_as<double>(v, "alpha", where);
            tv.at(2);  // validates parameters
            plan.set(name, {tv});
        } else {
            throw ConfigError("unknown threshold type '" + type + "' in " + where);
        }
    }
    return plan;
}

inline json read_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open " + path);
    try {
        return json::parse(f);
    } catch (const json::parse_error& e) {
        throw ConfigError("invalid JSON in " + path + ": " + e.what());
    }
}

inline RunConfig config_from_json(const json& j) {
    detail::check_keys(j, {"model", "engine", "statistics", "prechange", "thresholds", "input", "output", "format", "seed"},
                       "config");
    RunConfig rc;
    if (j.contains("model")) rc.model = model_from_json(j.at("model"));
    if (j.contains("engine")) {
        const auto& e = j.at("engine");
        detail::check_keys(e, {"kind", "alpha", "beta", "max_size", "qmin", "ptilde", "subsets", "tol"}, "engine");
        if (e.contains("kind")) rc.engine.kind = parse_engine(detail::get_as<std::string>(e, "kind", "engine"));
        if (e.contains("alpha")) rc.engine.alpha = detail::get_as<double>(e, "alpha", "engine");
        if (e.contains("beta")) rc.engine.beta = detail::get_as<double>(e, "beta", "engine");
        if (e.contains("max_size")) rc.engine.max_size = detail::get_as<std::size_t>(e, "max_size", "engine");
        if (e.contains("qmin")) rc.engine.q_min = detail::get_as<int>(e, "qmin", "engine");
        if (e.contains("ptilde")) rc.engine.p_tilde = detail::get_as<std::size_t>(e, "ptilde", "engine");
        if (e.contains("subsets"))
            rc.engine.subsets = detail::get_as<std::vector<std::vector<std::size_t>>>(e, "subsets", "engine");
        if (e.contains("tol")) rc.engine.tol = detail::get_as<double>(e, "tol", "engine");
    }
    if (j.contains("statistics")) {
        const auto& s = j.at("statistics");
        if (!s.is_array()) throw ConfigError("statistics must be an array of names");
        rc.stats.stats.clear();
        for (const auto& x : s) {
            if (!x.is_string()) throw ConfigError("statistics must be an array of names");
            rc.stats.stats.push_back(StatSpec::parse(x.get<std::string>()));
        }
    }
    if (j.contains("prechange")) {
        const auto& pc = j.at("prechange");
        if (pc.is_string()) {
            if (pc.get<std::string>() != "unknown") throw ConfigError("prechange must be \"unknown\" or an object");
            rc.stats.prechange = Prechange::unknown();
        } else {
            detail::check_keys(pc, {"known", "known_mean"}, "prechange");
            if (pc.contains("known") == pc.contains("known_mean"))
                throw ConfigError("prechange needs exactly one of 'known' or 'known_mean'");
            if (pc.contains("known")) {
                rc.stats.prechange = Prechange::known_eta(detail::get_as<std::vector<double>>(pc, "known", "prechange"));
            } else {
                const auto means = detail::get_as<std::vector<double>>(pc, "known_mean", "prechange");
                if (means.size() != rc.model.p()) throw ConfigError("prechange.known_mean needs p values");
                std::vector<double> eta;
                for (std::size_t i = 0; i < means.size(); ++i) {
                    try {
                        const auto e = coord_natural_from_mean(rc.model.coord(i), means[i]);
                        eta.insert(eta.end(), e.begin(), e.end());
                    } catch (const DomainError& err) {
                        throw ConfigError(std::string("prechange.known_mean: ") + err.what());
                    }
                }
                rc.stats.prechange = Prechange::known_eta(eta);
            }
        }
    }
    if (j.contains("thresholds")) {
        const auto& t = j.at("thresholds");
        if (t.is_string()) rc.thresholds_path = t.get<std::string>();
        else rc.thresholds = plan_from_json(t);
    }
    if (j.contains("input")) rc.input = detail::get_as<std::string>(j, "input", "config");
    if (j.contains("output")) rc.output = detail::get_as<std::string>(j, "output", "config");
    if (j.contains("format")) {
        rc.format = detail::get_as<std::string>(j, "format", "config");
        if (rc.format != "jsonl") throw ConfigError("only the jsonl output format is supported");
    }
    if (j.contains("seed")) rc.seed = detail::get_as<std::uint64_t>(j, "seed", "config");
    rc.stats.validate(rc.model);
    return rc;
}

inline json config_to_json(const RunConfig& rc) {
    json j;
    j["model"] = model_to_json(rc.model);
    json e{{"kind", engine_name(rc.engine.kind)}, {"alpha", rc.engine.alpha}, {"beta", rc.engine.beta},
           {"ptilde", rc.engine.p_tilde},         {"tol", rc.engine.tol}};
    if (rc.engine.max_size) e["max_size"] = rc.engine.max_size;
    if (rc.engine.q_min) e["qmin"] = rc.engine.q_min;
    if (!rc.engine.subsets.empty()) e["subsets"] = rc.engine.subsets;
    j["engine"] = e;
    json st = json::array();
    for (const auto& s : rc.stats.stats) st.push_back(s.name());
    j["statistics"] = st;
    if (rc.stats.prechange.known) j["prechange"] = json{{"known", rc.stats.prechange.eta}};
    else j["prechange"] = "unknown";
    if (rc.thresholds) j["thresholds"] = plan_to_json(*rc.thresholds);
    else if (rc.thresholds_path) j["thresholds"] = *rc.thresholds_path;
    j["input"] = rc.input;
    j["output"] = rc.output;
    j["format"] = rc.format;
    if (rc.seed) j["seed"] = *rc.seed;
    return j;
}

// Reads rows of comma-separated numbers. A first row with any non-numeric
// field is treated as a header and skipped.
class CsvReader {
public:
    CsvReader(std::istream& in, std::size_t columns) : in_(in), cols_(columns) {}

    bool next(std::vector<double>& row) {
        std::string text;
        while (std::getline(in_, text)) {
            ++line_;
            if (!text.empty() && text.back() == '\r') text.pop_back();
            if (text.find_first_not_of(" \t") == std::string::npos) continue;
            const bool ok = parse(text, row);
            if (first_) {
                first_ = false;
                if (!ok) continue;  // header
            }
            if (!ok) throw InputError("line " + std::to_string(line_) + ": malformed row '" + text + "'");
            if (row.size() != cols_)
                throw InputError("line " + std::to_string(line_) + ": expected " + std::to_string(cols_) +
                                 " columns, found " + std::to_string(row.size()));
            return true;
        }
        return false;
    }

    std::size_t line() const { return line_; }

private:
    static bool parse(const std::string& text, std::vector<double>& row) {
        row.clear();
        std::size_t start = 0;
        while (true) {
            const auto comma = text.find(',', start);
            std::string_view f(text.data() + start, (comma == std::string::npos ? text.size() : comma) - start);
            while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
            while (!f.empty() && (f.back() == ' ' || f.back() == '\t')) f.remove_suffix(1);
            if (!f.empty() && f.front() == '+') f.remove_prefix(1);
            double v = 0.0;
            const auto r = std::from_chars(f.data(), f.data() + f.size(), v);
            if (f.empty() || r.ec != std::errc() || r.ptr != f.data() + f.size()) return false;
            row.push_back(v);
            if (comma == std::string::npos) return true;
            start = comma + 1;
        }
    }

    std::istream& in_;
    std::size_t cols_;
    std::size_t line_ = 0;
    bool first_ = true;
};

inline json stop_record(const Decision& d) {
    json j{{"stopped", d.stop}, {"n", d.n}};
    if (d.stop) {
        j["stat"] = d.stat;
        j["tau_hat"] = d.tau_hat ? json(*d.tau_hat) : json(nullptr);
        j["value"] = d.value;
    } else {
        j["stat"] = nullptr;
        j["tau_hat"] = nullptr;
        j["value"] = nullptr;
    }
    return j;
}

inline json trace_record(const StatisticReport& rep, const StatConfig& cfg) {
    json stats = json::object();
    for (std::size_t k = 0; k < cfg.stats.size(); ++k) {
        const auto& v = rep.values[k];
        stats[cfg.stats[k].name()] = json{{"value", v.value}, {"tau", v.tau ? json(*v.tau) : json(nullptr)}};
    }
    return json{{"n", rep.n}, {"stats", stats}, {"candidates", rep.candidates}};
}

inline ThresholdPlan resolve_plan(const RunConfig& rc) {
    if (rc.thresholds) return *rc.thresholds;
    if (rc.thresholds_path) return plan_from_json(read_json_file(*rc.thresholds_path));
    throw ConfigError("no threshold plan given (config 'thresholds' or --threshold-plan)");
}

// Streams rows through the configured engine until a stop or end of input.
inline Decision cmd_detect(const RunConfig& rc, const ThresholdPlan& plan, std::istream& in, std::ostream& out,
                           bool trace) {
    plan.require(rc.stats);
    auto det = make_detector(rc.model, rc.stats, rc.engine);
    CsvReader reader(in, rc.model.p());
    std::vector<double> row;
    Decision last;
    while (reader.next(row)) {
        StatisticReport const* rep = nullptr;
        try {
            rep = &det.step_raw(row);
        } catch (const RejectedObservation& e) {
            throw InputError("line " + std::to_string(reader.line()) + ": " + e.what());
        }
        if (trace) out << trace_record(*rep, rc.stats).dump() << '\n' << std::flush;
        last = decide(*rep, rc.stats, plan);
        if (last.stop) break;
    }
    last.n = det.n();
    out << stop_record(last).dump() << '\n';
    return last;
}

struct CalibrateOptions {
    std::string mode = "analytic-arl";  // analytic-arl | analytic-fa | monte-carlo
    double gamma = 5000.0;
    double alpha = 0.05;
    MonteCarloSpec mc;
    bool horizon_set = false;
};

inline ThresholdPlan cmd_calibrate(const RunConfig& rc, const CalibrateOptions& opt) {
    const int p = static_cast<int>(rc.model.p());
    if (opt.mode == "analytic-arl") return analytic_arl_plan(rc.stats, p, opt.gamma);
    if (opt.mode == "analytic-fa") return analytic_fa_plan(rc.stats, p, opt.alpha);
    if (opt.mode == "monte-carlo") {
        MonteCarloSpec mc = opt.mc;
        if (!opt.horizon_set) mc.horizon = static_cast<std::int64_t>(std::ceil(2.0 * opt.gamma));
        auto plan = monte_carlo_plan(rc.model, rc.stats, rc.engine, mc);
        plan.provenance.gamma = opt.gamma;
        return plan;
    }
    throw ConfigError("unknown calibration mode '" + opt.mode + "'");
}

inline void cmd_oracle(const std::vector<int>& ps, const std::vector<std::int64_t>& ns, std::ostream& out,
                       StirlingZero zero = StirlingZero::unit) {
    out << "n,p,E_faces,E_vertices\n";
    out.precision(12);
    for (auto p : ps)
        for (auto n : ns) {
            const auto e = expected_counts(n, p, zero);
            out << n << ',' << p << ',' << static_cast<double>(e.faces) << ',' << static_cast<double>(e.vertices)
                << '\n';
        }
}

// Per-n vertex counts and candidate sets of the e-detector hull.
inline void cmd_edetect(const std::string& preset, std::istream& in, std::ostream& out) {
    EDetectorHull hull(EDetectorSpec::preset(preset));
    CsvReader reader(in, 1);
    std::vector<double> row;
    out << "n,vertex_count,candidates\n";
    while (reader.next(row)) {
        const auto& v = hull.push(row[0]);
        out << hull.n() << ',' << v.size() << ',';
        for (std::size_t i = 0; i < v.size(); ++i) out << (i ? " " : "") << v[i];
        out << '\n';
    }
}

}  // namespace mdfocus::io

#endif
