// stopflow: exact values, bounds, simulation, oracle verification and traces
// for best-choice stopping on powers of a directed path.

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "stopflow/stopflow.hpp"

namespace {

using namespace stopflow;

struct Options {
    int n = 0;
    std::string n_grid;
    int k = 0;
    int step = 1;
    std::uint64_t seed = 1;
    std::uint64_t trials = 100000;
    std::string strategy = "tau_n";
    double p = -1.0;
    double epsilon = 0.0;
    std::string r = "auto";
    std::string out;
    std::string format;
    int threads = 1;
    std::string config;
    std::string perm;
    std::string perm_file;
    int n_max = 7;
    bool skip_dp = false;
    bool allow_large = false;
    int bounds_n_max = 60;
    std::string inject_fault;
};

std::string join_command(int argc, char** argv) {
    std::string out;
    for (int i = 0; i < argc; ++i) {
        std::string a = argv[i];
        if (i) out += ' ';
        out += a.find_first_of(" \t\"") == std::string::npos ? a : "\"" + a + "\"";
    }
    return out;
}

/// Flat key=value lines; '#' starts a comment.
std::map<std::string, std::string> read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot read config file " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw input_error(path + ":" + std::to_string(lineno) + ": expected key=value");
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
        };
        std::string key = trim(line.substr(0, eq));
        if (key.rfind("--", 0) == 0) key = key.substr(2);
        kv[key] = trim(line.substr(eq + 1));
    }
    return kv;
}

bool flag_given(const std::vector<std::string>& args, const std::string& name) {
    for (const auto& a : args)
        if (a == name || a.rfind(name + "=", 0) == 0) return true;
    return false;
}

/// Config values for options the command line did not set, appended as flags.
std::vector<std::string> merge_config(const std::vector<std::string>& args, const CLI::App& app) {
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    if (path.empty()) return args;

    const CLI::App* sub = nullptr;
    for (const auto& a : args)
        for (const auto* s : app.get_subcommands({}))
            if (s->get_name() == a && !sub) sub = s;

    std::vector<std::string> out = args;
    for (const auto& [key, value] : read_config(path)) {
        const std::string flag = "--" + key;
        if (flag_given(args, flag)) continue;
        const CLI::Option* opt = sub ? sub->get_option_no_throw(flag) : nullptr;
        if (!opt) opt = app.get_option_no_throw(flag);
        if (!opt) throw input_error("config file " + path + ": unknown key '" + key + "'");
        out.push_back(flag);
        if (opt->get_type_size() != 0) out.push_back(value);
        else if (value != "true" && value != "1") out.pop_back();
    }
    return out;
}

ExperimentConfig config_of(const CLI::App& sub) {
    ExperimentConfig cfg;
    cfg.set("mode", sub.get_name());
    for (const auto* opt : sub.get_options()) {
        const std::string name = opt->get_single_name();
        if (name.empty() || name == "help" || name == "config" || name == "inject-fault") continue;
        std::string value;
        if (opt->count() > 0) {
            const auto& res = opt->results();
            for (std::size_t i = 0; i < res.size(); ++i) value += (i ? " " : "") + res[i];
            if (opt->get_type_size() == 0 && value.empty()) value = "true";
        } else {
            value = opt->get_default_str();
        }
        cfg.set(name, value);
    }
    return cfg;
}

class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) throw input_error("cannot open output file " + path);
        }
    }
    std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }
    bool to_file() const { return file_.is_open(); }

private:
    std::ofstream file_;
};

void emit_json(std::ostream& os, const Provenance& prov, nlohmann::ordered_json body) {
    nlohmann::ordered_json j;
    j["meta"] = prov.json();
    j["config"] = prov.config.json();
    for (auto& [key, val] : body.items()) j[key] = val;
    os << j.dump(2) << "\n";
}

std::string format_or(const Options& o, const std::string& fallback) {
    const std::string f = o.format.empty() ? fallback : o.format;
    if (f != "csv" && f != "json" && f != "text") throw input_error("unknown format '" + f + "'");
    return f;
}

int cmd_exact(const Options& o, const Provenance& prov) {
    const auto tab = exact_tables(o.n, o.k);
    const BinomialTable binom(o.n);
    Output out(o.out);
    auto& os = out.stream();
    const std::string fmt = format_or(o, "text");
    if (fmt == "json") {
        nlohmann::ordered_json body;
        auto rows = nlohmann::ordered_json::array();
        for (int m = tab.m_min; m <= o.n; ++m) {
            const Rational term(tab.w(m), BigInt(m) * binom(o.n, m));
            rows.push_back({{"m", m}, {"W", tab.w(m).str()}, {"T", tab.t(m).str()},
                            {"term", to_fraction(term)}, {"term_decimal", to_decimal(term)}});
        }
        body["result"] = {{"n", o.n}, {"k", o.k}, {"probability", to_fraction(tab.probability)},
                          {"decimal", to_decimal(tab.probability)}, {"breakdown", rows}};
        emit_json(os, prov, body);
    } else if (fmt == "csv") {
        os << prov.csv_preamble();
        os << "# probability=" << to_fraction(tab.probability) << " = " << to_decimal(tab.probability) << "\n";
        os << "m,W_m,T_m,term,term_decimal\n";
        for (int m = tab.m_min; m <= o.n; ++m) {
            const Rational term(tab.w(m), BigInt(m) * binom(o.n, m));
            os << m << "," << tab.w(m) << "," << tab.t(m) << "," << to_fraction(term) << "," << to_decimal(term)
               << "\n";
        }
    } else {
        if (out.to_file()) os << prov.csv_preamble();
        os << "n=" << o.n << " k=" << o.k << "\n";
        os << to_fraction(tab.probability) << " = " << to_decimal(tab.probability) << "\n";
        os << "m  W_m  W_m/(m C(n,m))\n";
        for (int m = tab.m_min; m <= o.n; ++m) {
            const Rational term(tab.w(m), BigInt(m) * binom(o.n, m));
            os << m << "  " << tab.w(m) << "  " << to_fraction(term) << "\n";
        }
    }
    return kExitOk;
}

Strategy strategy_from(const Options& o) {
    if (o.strategy == "tau_n") return Strategy::tau_n();
    if (o.strategy == "first_max") return Strategy::first_max();
    if (o.strategy == "classical_threshold") {
        if (o.r == "auto") return Strategy::classical_threshold(classical_cutoff(o.n));
        std::size_t used = 0;
        int r = -1;
        try {
            r = std::stoi(o.r, &used);
        } catch (const std::exception&) {
        }
        if (used != o.r.size() || r < 0) throw input_error("--r must be a non-negative integer or 'auto'");
        return Strategy::classical_threshold(r);
    }
    if (o.strategy == "tau_p_star") {
        double p = o.p;
        if (p < 0.0) {
            if (!(o.epsilon > 0.0 && o.epsilon < 1.0))
                throw input_error("tau_p_star needs --p in [0,1] or --epsilon in (0,1)");
            p = 1.0 - (1.0 - o.epsilon) * std::pow(static_cast<double>(o.n), -1.0 / (o.k + 1));
        }
        return Strategy::tau_p_star(p, 0);
    }
    throw input_error("unknown strategy '" + o.strategy + "'");
}

int cmd_simulate(const Options& o, const Provenance& prov) {
    const PathPower g(o.n, o.k);
    const auto strategy = strategy_from(o);
    const auto report = simulate(g, strategy, o.trials, o.seed, o.threads);
    Output out(o.out);
    auto& os = out.stream();
    const std::string fmt = format_or(o, "text");
    if (fmt == "json") {
        emit_json(os, prov, {{"report", report.json()}});
    } else if (fmt == "csv") {
        os << prov.csv_preamble() << SimulationReport::csv_header() << "\n" << report.csv_row() << "\n";
    } else {
        if (out.to_file()) os << prov.csv_preamble();
        os << report.text() << "\n";
    }
    return kExitOk;
}

int cmd_verify(const Options& o, const Provenance& prov) {
    VerifyOptions vo;
    vo.n_max = o.n_max;
    vo.skip_dp = o.skip_dp;
    vo.allow_large = o.allow_large;
    vo.bounds_n_max = o.bounds_n_max;
    if (o.inject_fault == "b-off-by-one") vo.observer.b_bias = 1;
    else if (!o.inject_fault.empty()) throw input_error("unknown fault '" + o.inject_fault + "'");

    const auto rep = run_verify(vo);
    Output out(o.out);
    auto& os = out.stream();
    const std::string fmt = format_or(o, "json");
    if (fmt == "text") {
        if (out.to_file()) os << prov.csv_preamble();
        for (const auto& c : rep.checks)
            os << (c.pass ? "PASS " : "FAIL ") << c.name << (c.detail.empty() ? "" : "  " + c.detail) << "\n";
        os << (rep.pass() ? "all checks passed" : "verification FAILED") << "\n";
    } else if (fmt == "csv") {
        os << prov.csv_preamble() << "check,pass,detail\n";
        for (const auto& c : rep.checks) os << c.name << "," << (c.pass ? "true" : "false") << ",\"" << c.detail << "\"\n";
    } else {
        emit_json(os, prov, {{"verdict", rep.json()}});
    }
    return rep.pass() ? kExitOk : kExitVerification;
}

int cmd_scaling(const Options& o, const Provenance& prov) {
    const auto grid = parse_grid(o.n_grid, o.step);
    std::vector<ScalingRow> rows;
    for (int n : grid) rows.push_back(scaling_row(n, o.k));
    for (const auto& r : rows)
        if (r.skipped) std::cerr << "warning: skipping n=" << r.n << " (need k < n)\n";

    Output out(o.out);
    auto& os = out.stream();
    const std::string fmt = format_or(o, "csv");
    if (fmt == "json") {
        auto arr = nlohmann::ordered_json::array();
        for (const auto& r : rows) {
            nlohmann::ordered_json j{{"n", r.n}, {"k", r.k}};
            if (r.skipped) {
                j["note"] = r.note;
            } else {
                j["p_exact"] = to_decimal(r.exact);
                j["scaled"] = r.scaled;
                j["upper_bound"] = r.upper;
                if (r.lower) j["lower_bound_tau_p"] = r.lower->bound, j["best_epsilon"] = r.lower->epsilon;
                if (r.k1_reduction) j["k1_reduction"] = to_decimal(*r.k1_reduction);
                if (!r.note.empty()) j["note"] = r.note;
            }
            arr.push_back(j);
        }
        emit_json(os, prov, {{"rows", arr}});
    } else {
        if (fmt == "csv" || out.to_file()) os << prov.csv_preamble();
        os << ScalingRow::csv_header() << "\n";
        for (const auto& r : rows) os << r.csv_row() << "\n";
    }
    return kExitOk;
}

int cmd_trace(const Options& o, const Provenance& prov) {
    const PathPower g(o.n, o.k);
    std::vector<std::vector<Position>> perms;
    if (!o.perm_file.empty()) {
        std::ifstream in(o.perm_file);
        if (!in) throw input_error("cannot read permutation file " + o.perm_file);
        std::string line;
        while (std::getline(in, line))
            if (line.find_first_not_of(" \t\r") != std::string::npos) perms.push_back(parse_permutation(line));
    } else {
        perms.push_back(parse_permutation(o.perm));
    }
    if (perms.empty()) throw input_error("trace: no permutation given");

    std::vector<Trace> traces;
    for (const auto& p : perms) traces.push_back(trace_tau_n(g, p));

    Output out(o.out);
    auto& os = out.stream();
    const std::string fmt = format_or(o, "text");
    if (fmt == "json") {
        auto arr = nlohmann::ordered_json::array();
        for (const auto& t : traces) arr.push_back(trace_json(t));
        emit_json(os, prov, {{"traces", arr}});
    } else if (fmt == "csv") {
        os << prov.csv_preamble() << "trace,t,arrived,c,b,slack,is_max,condition,stop\n";
        for (std::size_t i = 0; i < traces.size(); ++i)
            for (const auto& s : traces[i].steps)
                os << i << "," << s.event.t << "," << s.arrived << "," << s.event.c << "," << s.event.b << ","
                   << s.event.slack << "," << s.event.is_max << "," << s.event.condition_met << ","
                   << (s.event.t == traces[i].stop.stop_index) << "\n";
    } else {
        if (out.to_file()) os << prov.csv_preamble();
        for (const auto& t : traces) os << trace_text(t);
    }
    return kExitOk;
}

int cmd_bounds(const Options& o, const Provenance& prov) {
    if (o.epsilon != 0.0 && !(o.epsilon > 0.0 && o.epsilon < 1.0))
        throw input_error("--epsilon must lie in (0, 1)");
    const auto rep = bound_report(o.n, o.k, o.epsilon);
    Output out(o.out);
    auto& os = out.stream();
    const std::string fmt = format_or(o, "text");
    if (fmt == "json") {
        nlohmann::ordered_json j{{"n", rep.n}, {"k", rep.k}, {"upper", rep.upper},
                                 {"asymptotic_constant", rep.asymptotic_constant}};
        if (rep.has_lower)
            j["lower_tau_p"] = {{"epsilon", rep.lower.epsilon}, {"p", rep.lower.p}, {"bound", rep.lower.bound}};
        emit_json(os, prov, {{"bounds", j}});
    } else if (fmt == "csv") {
        os << prov.csv_preamble() << "n,k,upper,lower_tau_p,epsilon,p,asymptotic_constant\n";
        os << rep.n << "," << rep.k << "," << fmt_double(rep.upper) << ","
           << (rep.has_lower ? fmt_double(rep.lower.bound) : "") << ","
           << (rep.has_lower ? fmt_double(rep.lower.epsilon) : "") << ","
           << (rep.has_lower ? fmt_double(rep.lower.p) : "") << "," << fmt_double(rep.asymptotic_constant) << "\n";
    } else {
        if (out.to_file()) os << prov.csv_preamble();
        os << "n=" << rep.n << " k=" << rep.k << "\n";
        os << "upper bound          " << fmt_double(rep.upper) << "\n";
        if (rep.has_lower) {
            os << "tau_p* lower bound   " << fmt_double(rep.lower.bound) << "  (epsilon=" << fmt_double(rep.lower.epsilon)
               << ", p=" << fmt_double(rep.lower.p) << ")\n";
        } else {
            os << "tau_p* lower bound   n/a (k >= n-2, probability is exactly 1/2)\n";
        }
        os << "Gamma(4/3) 3^(1/3)   " << fmt_double(rep.asymptotic_constant) << "\n";
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    Options o;
    CLI::App app{"Best-choice stopping on k-th powers of a directed path", kToolName};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kToolVersion));

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--out", o.out, "Write output to this file instead of stdout");
        sub->add_option("--format", o.format, "Output format: csv, json or text")
            ->check(CLI::IsMember({"csv", "json", "text"}));
        sub->add_option("--config", o.config, "Flat key=value file; command-line flags take precedence");
    };
    auto add_nk = [&](CLI::App* sub) {
        sub->add_option("--n", o.n, "Vertex count")->required();
        sub->add_option("--k", o.k, "Power of the path")->required();
    };

    auto* exact = app.add_subcommand("exact", "Exact success probability of tau_n with the per-m breakdown");
    add_nk(exact);
    add_common(exact);

    auto* sim = app.add_subcommand("simulate", "Monte Carlo estimate of a strategy's success probability");
    add_nk(sim);
    sim->add_option("--strategy", o.strategy, "tau_n, tau_p_star, classical_threshold or first_max")
        ->capture_default_str()
        ->check(CLI::IsMember({"tau_n", "tau_p_star", "classical_threshold", "first_max"}));
    sim->add_option("--trials", o.trials, "Number of trials")->capture_default_str()->check(CLI::PositiveNumber);
    auto* seed_opt = sim->add_option("--seed", o.seed, "Master seed (fallback: STOPFLOW_SEED)")->capture_default_str();
    sim->add_option("--p", o.p, "Coin probability for tau_p_star")->check(CLI::Range(0.0, 1.0));
    sim->add_option("--epsilon", o.epsilon, "Derive p = 1-(1-eps) n^(-1/(k+1)) for tau_p_star");
    sim->add_option("--r", o.r, "Cutoff for classical_threshold, or 'auto' for floor(n/e)")->capture_default_str();
    sim->add_option("--threads", o.threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    add_common(sim);

    auto* verify = app.add_subcommand("verify", "Run the oracle suite; exit 2 on any failure");
    verify->add_option("--n-max", o.n_max, "Largest n for enumeration checks")->capture_default_str();
    verify->add_flag("--skip-dp", o.skip_dp, "Skip the backward-induction check");
    verify->add_flag("--allow-large", o.allow_large, "Lift the n <= 9 enumeration and n <= 7 DP guards");
    verify->add_option("--bounds-n-max", o.bounds_n_max, "Largest n for the bound sandwich")->capture_default_str();
    verify->add_option("--inject-fault", o.inject_fault)->group("");
    add_common(verify);

    auto* scaling = app.add_subcommand("scaling", "Exact values and bounds over a grid of n");
    scaling->add_option("--k", o.k, "Power of the path")->required();
    scaling->add_option("--n", o.n_grid, "Grid: 10..200, 10..200:10, 10,20,30 or a single n")->required();
    scaling->add_option("--step", o.step, "Step for a lo..hi grid")->capture_default_str();
    add_common(scaling);

    auto* trace = app.add_subcommand("trace", "Step-by-step observer trace and the tau_n stop");
    add_nk(trace);
    auto* perm_opt = trace->add_option("--perm", o.perm, "Whitespace-separated 1-based vertex indices");
    trace->add_option("--perm-file", o.perm_file, "File with one permutation per line")->excludes(perm_opt);
    add_common(trace);

    auto* bounds = app.add_subcommand("bounds", "Upper bound and tau_p* lower bound");
    add_nk(bounds);
    bounds->add_option("--epsilon", o.epsilon, "Epsilon in (0,1); default: best on the 0.1 grid");
    add_common(bounds);

    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        args = merge_config(args, app);
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    } catch (const input_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    if (sim->parsed() && seed_opt->count() == 0) {
        if (const char* env = std::getenv("STOPFLOW_SEED")) {
            try {
                o.seed = std::stoull(env, nullptr, 0);
            } catch (const std::exception&) {
                std::cerr << "error: STOPFLOW_SEED is not an integer\n";
                return kExitUsage;
            }
        }
    }

    try {
        for (auto* sub : app.get_subcommands()) {
            Provenance prov{join_command(argc, argv), config_of(*sub), o.seed};
            if (sub == sim) prov.config.set("seed", std::to_string(o.seed));
            if (sub == exact) return cmd_exact(o, prov);
            if (sub == sim) return cmd_simulate(o, prov);
            if (sub == verify) return cmd_verify(o, prov);
            if (sub == scaling) return cmd_scaling(o, prov);
            if (sub == trace) {
                if (o.perm.empty() && o.perm_file.empty()) throw input_error("trace needs --perm or --perm-file");
                return cmd_trace(o, prov);
            }
            if (sub == bounds) return cmd_bounds(o, prov);
        }
    } catch (const resource_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitResource;
    } catch (const input_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
