#include "cohere/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "cohere/cascade.hpp"
#include "cohere/dynamics.hpp"
#include "cohere/errors.hpp"
#include "cohere/graph.hpp"
#include "cohere/sign.hpp"
#include "cohere/spin.hpp"
#include "cohere/system.hpp"

namespace cohere {

namespace {

using json = nlohmann::ordered_json;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Verify bundle sizes; fixed so reports stay comparable across runs.
constexpr int kVerifyPairs = 10;
constexpr int kVerifyPoints = 10;
constexpr int kVerifyOmegaStarts = 5;
constexpr double kVerifyOmegaHorizon = 500.0;
constexpr double kVerifyOmegaDt = 0.01;
constexpr double kProbeRadius = 2.0;

// ---------------------------------------------------------------------------
// JSON output: fixed key order, 17 significant digits, non-finite as null.

std::string format_double(double v) {
    if (!std::isfinite(v)) return "null";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

bool is_scalar(const json& j) { return !j.is_array() && !j.is_object(); }

void emit(std::string& o, const json& j, int depth) {
    const auto pad = [&](int d) { o.append(static_cast<std::size_t>(2 * d), ' '); };
    switch (j.type()) {
        case json::value_t::number_float: o += format_double(j.get<double>()); return;
        case json::value_t::array: {
            if (j.empty()) {
                o += "[]";
                return;
            }
            bool flat = true;
            for (const auto& e : j) flat = flat && is_scalar(e);
            if (flat) {
                o += '[';
                for (std::size_t k = 0; k < j.size(); ++k) {
                    if (k) o += ", ";
                    emit(o, j[k], depth + 1);
                }
                o += ']';
                return;
            }
            o += "[\n";
            for (std::size_t k = 0; k < j.size(); ++k) {
                pad(depth + 1);
                emit(o, j[k], depth + 1);
                o += k + 1 < j.size() ? ",\n" : "\n";
            }
            pad(depth);
            o += ']';
            return;
        }
        case json::value_t::object: {
            if (j.empty()) {
                o += "{}";
                return;
            }
            o += "{\n";
            std::size_t k = 0;
            for (const auto& [key, value] : j.items()) {
                pad(depth + 1);
                o += json(key).dump();
                o += ": ";
                emit(o, value, depth + 1);
                o += ++k < j.size() ? ",\n" : "\n";
            }
            pad(depth);
            o += '}';
            return;
        }
        default: o += j.dump(); return;
    }
}

std::string to_text(const json& j) {
    std::string o;
    emit(o, j, 0);
    o += '\n';
    return o;
}

json vec(std::span<const double> x) {
    json a = json::array();
    for (double v : x) a.push_back(v);
    return a;
}

json one_based(const std::vector<int>& v) {
    json a = json::array();
    for (int k : v) a.push_back(k + 1);
    return a;
}

json graph_json(const InteractionGraph& g) {
    json edges = json::array();
    for (const Edge& e : g.edges())
        edges.push_back({{"from", e.from + 1}, {"to", e.to + 1}, {"sign", std::string(to_string(e.label))}});
    return {{"n", g.n()}, {"edges", std::move(edges)}};
}

json loop_json(const InteractionGraph& g, const Loop& loop) {
    return {{"vertices", one_based(loop.vertices)}, {"sign", std::string(to_string(loop_sign(g, loop)))}};
}

json change_json(const ElementaryChange& c) {
    json rho = json::array();
    for (int r : c.rho) rho.push_back(r);
    return {{"perm", one_based(c.perm)}, {"rho", std::move(rho)}};
}

json class_json(const InteractionGraph& g, const ClassVerdict& v) {
    json j = {{"class", std::string(to_string(v.klass))}};
    j["witness"] = v.witness ? loop_json(g, *v.witness) : json(nullptr);
    return j;
}

// ---------------------------------------------------------------------------
// Input

struct Analysed {
    std::optional<SystemDef> system;
    InteractionGraph graph;
    std::vector<std::pair<std::pair<int, int>, SignVerdict>> verdicts;  // (i, j) -> dF_i/dx_j
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read input file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

InteractionGraph parse_graph_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("graph JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("n") || !j["n"].is_number_integer())
        throw ParseError("graph JSON: expected an object with integer \"n\"");
    const long n = j["n"].get<long>();
    if (n < 1 || n > 100000) throw ParseError("graph JSON: \"n\" must be a positive vertex count");
    if (!j.contains("edges") || !j["edges"].is_array()) throw ParseError("graph JSON: expected an \"edges\" array");
    std::vector<Edge> edges;
    for (const auto& e : j["edges"]) {
        if (!e.is_object() || !e.contains("from") || !e.contains("to") || !e.contains("sign") ||
            !e["from"].is_number_integer() || !e["to"].is_number_integer() || !e["sign"].is_string())
            throw ParseError("graph JSON: each edge needs integer \"from\", \"to\" and a string \"sign\"");
        const long from = e["from"].get<long>();
        const long to = e["to"].get<long>();
        if (from < 1 || from > n || to < 1 || to > n)
            throw ParseError("graph JSON: edge endpoint out of range 1.." + std::to_string(n));
        const std::string sign = e["sign"].get<std::string>();
        SignLabel label;
        if (sign == "+") label = SignLabel::Plus;
        else if (sign == "-") label = SignLabel::Minus;
        else if (sign == "?") label = SignLabel::Theta;
        else throw ParseError("graph JSON: unknown sign '" + sign + "' (expected \"+\", \"-\" or \"?\")");
        edges.push_back({static_cast<int>(from - 1), static_cast<int>(to - 1), label});
    }
    try {
        return InteractionGraph(static_cast<int>(n), std::move(edges));
    } catch (const std::invalid_argument& e) {
        throw ParseError(std::string("graph JSON: ") + e.what());
    }
}

Analysed load(const RunConfig& cfg, const SignOptions& sign_opts) {
    const std::string text = read_file(cfg.input);
    Analysed a;
    if (cfg.format == "graph") {
        a.graph = parse_graph_json(text);
        return a;
    }
    a.system = parse_system(text);
    const SystemDef& s = *a.system;
    std::vector<Edge> edges;
    for (int i = 0; i < s.n; ++i)
        for (int j = 0; j < s.n; ++j) {
            if (i == j) continue;
            SignVerdict v = sign_of_partial(s, i, j, sign_opts);
            if (v.sign == Sign::Zero) continue;
            const SignLabel l = v.sign == Sign::Plus    ? SignLabel::Plus
                                : v.sign == Sign::Minus ? SignLabel::Minus
                                                        : SignLabel::Theta;
            edges.push_back({j, i, l});
            a.verdicts.push_back({{i, j}, std::move(v)});
        }
    a.graph = InteractionGraph(s.n, std::move(edges));
    return a;
}

const SystemDef& need_system(const Analysed& a, const RunConfig& cfg) {
    if (!a.system) throw UsageError("command '" + cfg.command + "' needs an ode input, not a graph");
    return *a.system;
}

// ---------------------------------------------------------------------------
// Effective settings

struct Settings {
    RunConfig cfg;
    std::map<std::string, double> tol;
    double t_end = 0.0;
    double dt = 0.0;
    bool timed = false;

    double at(const std::string& name) const { return tol.at(name); }

    IntegratorOptions integrator() const {
        IntegratorOptions o;
        o.rtol = cfg.rtol;
        o.atol = at("atol");
        o.dt = dt;
        o.boundary_tol = at("boundary");
        o.blowup = at("blowup");
        return o;
    }

    OmegaOptions omega(double horizon, double sample_dt) const {
        OmegaOptions o;
        o.integrator = integrator();
        o.integrator.dt = sample_dt;
        o.horizon = horizon;
        o.eq_tol = at("eq");
        o.drift_tol = at("drift");
        o.cyc_tol = at("cyc");
        o.min_speed = at("min_speed");
        o.period_spread = at("period_spread");
        return o;
    }

    SignOptions sign() const {
        SignOptions o;
        o.seed = cfg.seed;
        return o;
    }
};

Settings resolve(const RunConfig& cfg) {
    Settings s;
    s.cfg = cfg;
    s.tol = default_tolerances();
    for (const auto& [k, v] : cfg.tolerances) {
        if (!s.tol.count(k)) throw UsageError("unknown tolerance '" + k + "'");
        s.tol[k] = v;
    }
    if (s.cfg.format.empty()) {
        const auto ext = std::filesystem::path(cfg.input).extension().string();
        s.cfg.format = ext == ".json" ? "graph" : "ode";
    }
    if (s.cfg.format != "ode" && s.cfg.format != "graph")
        throw UsageError("--format must be 'ode' or 'graph'");
    const std::string& c = cfg.command;
    double t_default = 0.0, dt_default = 0.0;
    if (c == "simulate") t_default = 10.0, dt_default = 0.01;
    else if (c == "omega") t_default = 500.0, dt_default = 0.01;
    else if (c == "verify") t_default = 10.0, dt_default = 0.1;
    else if (c == "equilibria") t_default = 50.0, dt_default = 0.01;
    s.timed = t_default > 0.0;
    s.t_end = cfg.t_end.value_or(t_default);
    s.dt = cfg.dt.value_or(dt_default);
    if (s.timed && !(s.t_end > 0.0)) throw UsageError("--t-end must be positive");
    if (s.timed && !(s.dt > 0.0)) throw UsageError("--dt must be positive");
    if (s.cfg.output.empty()) s.cfg.output = c == "simulate" ? "csv" : "json";
    if (s.cfg.output == "csv" && c != "simulate") throw UsageError("--csv is only available for simulate");
    if ((c == "simulate" || c == "omega") && cfg.x0.empty()) throw UsageError("command '" + c + "' needs --x0");
    return s;
}

json config_json(const Settings& s) {
    json j;
    j["command"] = s.cfg.command;
    j["input"] = s.cfg.input;
    j["format"] = s.cfg.format;
    j["seed"] = s.cfg.seed;
    j["x0"] = s.cfg.x0.empty() ? json(nullptr) : vec(s.cfg.x0);
    j["t_end"] = s.timed ? json(s.t_end) : json(nullptr);
    j["dt"] = s.timed ? json(s.dt) : json(nullptr);
    j["rtol"] = s.cfg.rtol;
    json tol = json::object();
    for (const auto& [k, v] : s.tol) tol[k] = v;
    j["tolerances"] = std::move(tol);
    if (s.cfg.command == "verify")
        j["verify"] = {{"pairs", kVerifyPairs},
                       {"points", kVerifyPoints},
                       {"omega_starts", kVerifyOmegaStarts},
                       {"omega_horizon", kVerifyOmegaHorizon},
                       {"omega_dt", kVerifyOmegaDt},
                       {"radius", kProbeRadius}};
    j["output"] = s.cfg.output;
    j["out"] = s.cfg.out.empty() ? json(nullptr) : json(s.cfg.out);
    return j;
}

struct Outcome {
    int code = kExitOk;
    std::string status = "ok";
    json result;
    std::string message;  // set on failure
    std::string raw;  // non-JSON payload (CSV)
};

// ---------------------------------------------------------------------------
// Commands

json evidence_json(const std::pair<std::pair<int, int>, SignVerdict>& entry) {
    const auto& [ij, v] = entry;
    const SignEvidence& e = v.evidence;
    json j = {{"from", ij.second + 1},
              {"to", ij.first + 1},
              {"sign", std::string(to_string(v.sign))},
              {"kind", std::string(to_string(e.kind))}};
    if (e.kind == SignEvidence::Kind::IntervalBound || e.kind == SignEvidence::Kind::Conservative)
        j["bound"] = {e.bound.lo, e.bound.hi};
    if (e.kind == SignEvidence::Kind::Witnesses) {
        j["positive_point"] = vec(e.positive_point);
        j["positive_value"] = e.positive_value;
        j["negative_point"] = vec(e.negative_point);
        j["negative_value"] = e.negative_value;
    }
    j["boxes"] = e.boxes;
    j["samples"] = e.samples;
    if (!e.note.empty()) j["note"] = e.note;
    return j;
}

Outcome cmd_analyze(const Settings& st) {
    const Analysed a = load(st.cfg, st.sign());
    Outcome o;
    json& r = o.result;
    r["n"] = a.graph.n();
    if (a.system) r["domain_class"] = std::string(to_string(a.system->domain.domain_class()));
    const ClassVerdict v = classify(a.graph);
    r.update(class_json(a.graph, v));
    r["graph"] = graph_json(a.graph);
    if (a.system) {
        json ev = json::array();
        for (const auto& entry : a.verdicts) ev.push_back(evidence_json(entry));
        r["evidence"] = std::move(ev);
    }
    return o;
}

Outcome incoherent(const InteractionGraph& g, const std::string& reason, const Loop& witness) {
    Outcome o;
    o.code = kExitIncoherent;
    o.status = "incoherent";
    o.message = "system is not coherent: " + reason;
    o.result = {{"class", "incoherent"}, {"reason", reason}, {"witness", loop_json(g, witness)}};
    return o;
}

std::string failure_reason(const SpinFailure& f) {
    return f.reason == SpinFailure::Reason::AmbiguousLoopEdge ? "ambiguous_loop_edge" : "negative_loop";
}

Outcome cmd_spin(const Settings& st) {
    const Analysed a = load(st.cfg, st.sign());
    const SpinResult r = find_consistent_spin(a.graph);
    if (const auto* f = std::get_if<SpinFailure>(&r)) return incoherent(a.graph, failure_reason(*f), f->loop);
    const SpinAssignment& sigma = std::get<SpinAssignment>(r);
    json sj = json::object();
    for (int v = 0; v < a.graph.n(); ++v) sj[std::to_string(v + 1)] = sigma[v];
    Outcome o;
    o.result = {{"sigma", std::move(sj)}, {"class", std::string(to_string(classify(a.graph).klass))}};
    return o;
}

// Exit 4 before any structural work when the graph admits no spin.
std::optional<Outcome> reject_incoherent(const InteractionGraph& g) {
    const SpinResult r = find_consistent_spin(g);
    if (const auto* f = std::get_if<SpinFailure>(&r)) return incoherent(g, failure_reason(*f), f->loop);
    return std::nullopt;
}

Outcome cmd_decompose(const Settings& st) {
    const Analysed a = load(st.cfg, st.sign());
    if (auto bad = reject_incoherent(a.graph)) return *bad;
    const CascadeDecomposition d = a.system ? decompose(*a.system, a.graph) : decompose_graph(a.graph);
    Outcome o;
    json& r = o.result;
    r = change_json(d.change);
    json blocks = json::array(), classes = json::array();
    for (const auto& b : d.blocks) blocks.push_back(one_based(b));
    for (const auto& c : d.block_classes) classes.push_back(std::string(to_string(c.klass)));
    r["blocks"] = std::move(blocks);
    r["n1"] = d.top_index;
    r["classes"] = std::move(classes);
    json sources = json::array();
    for (const auto& b : d.source_blocks()) sources.push_back(one_based(b));
    r["source_blocks"] = std::move(sources);
    r["transformed_class"] = std::string(to_string(d.transformed_class.klass));
    r["transformed_graph"] = graph_json(d.transformed_graph);
    if (a.system) {
        const TriangularCheck t = check_block_triangular(d.transformed, d.top_index, 50, 1e-12, st.cfg.seed);
        r["triangular"] = {{"symbolic", t.symbolic}, {"numeric", t.numeric},
                           {"max_forbidden_entry", t.max_forbidden_entry}};
        r["system"] = print_system(d.transformed);
    }
    return o;
}

Outcome cmd_transform(const Settings& st) {
    const Analysed a = load(st.cfg, st.sign());
    const SystemDef& s = need_system(a, st.cfg);
    if (auto bad = reject_incoherent(a.graph)) return *bad;
    const ElementaryChange c = plan_transform(a.graph);
    const SystemDef t = apply_change(s, c);
    const InteractionGraph tg = transport_graph(a.graph, c);
    Outcome o;
    o.result = change_json(c);
    o.result.update(class_json(tg, classify(tg)));
    o.result["system"] = print_system(t);
    return o;
}

void check_x0(const SystemDef& s, const std::vector<double>& x0) {
    if (static_cast<int>(x0.size()) != s.n)
        throw UsageError("--x0 has " + std::to_string(x0.size()) + " entries, system has dimension " +
                         std::to_string(s.n));
}

Outcome cmd_simulate(const Settings& st) {
    const Analysed a = load(st.cfg, st.sign());
    const SystemDef& s = need_system(a, st.cfg);
    check_x0(s, st.cfg.x0);
    const Trajectory tr = integrate(s, st.cfg.x0, st.t_end, st.integrator());
    Outcome o;
    if (st.cfg.output == "csv") {
        std::string csv = "t";
        for (int i = 0; i < s.n; ++i) csv += ",x" + std::to_string(i + 1);
        csv += '\n';
        for (std::size_t k = 0; k < tr.times.size(); ++k) {
            csv += format_double(tr.times[k]);
            for (double v : tr.states[k]) csv += "," + format_double(v);
            csv += '\n';
        }
        o.raw = std::move(csv);
        return o;
    }
    json states = json::array();
    for (const auto& x : tr.states) states.push_back(vec(x));
    o.result = {{"terminated_by", std::string(to_string(tr.terminated_by))},
                {"accepted_steps", tr.accepted_steps},
                {"rejected_steps", tr.rejected_steps},
                {"final_time", tr.final_time()},
                {"final_state", vec(tr.final_state())},
                {"times", vec(tr.times)},
                {"states", std::move(states)}};
    return o;
}

json omega_json(const OmegaEstimate& e) {
    const auto& d = e.diagnostics;
    json samples = json::array();
    for (const auto& x : e.samples) samples.push_back(vec(x));
    json j = {{"verdict", std::string(to_string(e.verdict))}};
    j["point"] = e.point.empty() ? json(nullptr) : vec(e.point);
    j["period"] = e.verdict == OmegaEstimate::Verdict::Cycle ? json(e.period) : json(nullptr);
    j["samples"] = std::move(samples);
    j["diagnostics"] = {{"residual", d.residual},
                        {"polished", d.polished},
                        {"drift", d.drift},
                        {"returns", d.returns},
                        {"return_times", vec(d.return_times)},
                        {"closest_return", d.closest_return},
                        {"period_spread", d.period_spread},
                        {"min_speed", d.min_speed},
                        {"final_time", d.final_time},
                        {"terminated_by", std::string(to_string(d.terminated_by))}};
    return j;
}

Outcome cmd_omega(const Settings& st) {
    const Analysed a = load(st.cfg, st.sign());
    const SystemDef& s = need_system(a, st.cfg);
    check_x0(s, st.cfg.x0);
    const OmegaEstimate e = estimate_omega_limit(s, st.cfg.x0, st.omega(st.t_end, st.dt));
    Outcome o;
    o.result = omega_json(e);
    o.result["class"] = std::string(to_string(classify(a.graph).klass));
    return o;
}

Outcome cmd_verify(const Settings& st) {
    const Analysed a = load(st.cfg, st.sign());
    const SystemDef& s = need_system(a, st.cfg);
    const ClassVerdict v = classify(a.graph);
    ProbeOptions probe;
    probe.grid = {st.t_end, st.dt};
    probe.radius = kProbeRadius;
    probe.seed = st.cfg.seed;
    probe.integrator = st.integrator();

    std::optional<CascadeDecomposition> d;
    if (v.klass != SystemClass::Incoherent) d = decompose(s, a.graph);

    // monotonicity and unordered omega limits are consequences for cooperative
    // systems; a coherent one is checked through its transformed form
    const SystemDef* form = &s;
    std::string form_name = "input";
    bool cooperative_form = v.klass == SystemClass::Cooperative;
    if (!cooperative_form && d && d->transformed_class.klass == SystemClass::Cooperative) {
        form = &d->transformed;
        form_name = "transformed";
        cooperative_form = true;
    }

    Outcome o;
    json& r = o.result;
    r.update(class_json(a.graph, v));
    bool pass = true;
    int applicable = 0;

    const MonotoneReport m = check_monotone(*form, kVerifyPairs, st.at("monotone"), probe);
    json violations = json::array();
    for (const auto& x : m.violations)
        violations.push_back({{"pair", x.pair}, {"t", x.t}, {"coordinate", x.coordinate + 1},
                              {"upper", x.upper}, {"lower", x.lower}});
    json checks;
    checks["monotone"] = {{"applicable", cooperative_form}, {"system", form_name},
                          {"pass", m.pass}, {"pairs_checked", m.pairs_checked},
                          {"worst_gap", m.worst_gap}, {"violations", std::move(violations)},
                          {"failures", m.failures}};
    if (cooperative_form) {
        ++applicable;
        pass = pass && m.pass;
    }

    if (d) {
        const FlowComparison f = check_semiconjugacy(s, *d, kVerifyPoints, st.at("flow"), probe);
        checks["semiconjugacy"] = {{"applicable", true}, {"n1", d->top_index},
                                   {"pass", f.pass}, {"structural", f.structural},
                                   {"max_deviation", f.max_deviation}, {"points_checked", f.points_checked},
                                   {"failures", f.failures}};
        ++applicable;
        pass = pass && f.pass;
    } else {
        checks["semiconjugacy"] = {{"applicable", false}, {"reason", "system is incoherent"}};
    }

    json runs = json::array();
    std::map<std::string, int> counts{{"equilibrium", 0}, {"cycle", 0}, {"unresolved", 0}, {"unbounded", 0}};
    bool unordered = true;
    const auto starts = random_domain_points(form->domain, kVerifyOmegaStarts, kProbeRadius, st.cfg.seed);
    for (const auto& x0 : starts) {
        json run = {{"start", vec(x0)}};
        try {
            const OmegaEstimate e = estimate_omega_limit(*form, x0, st.omega(kVerifyOmegaHorizon, kVerifyOmegaDt));
            ++counts[std::string(to_string(e.verdict))];
            run["verdict"] = std::string(to_string(e.verdict));
            if (e.verdict == OmegaEstimate::Verdict::Equilibrium || e.verdict == OmegaEstimate::Verdict::Cycle) {
                const UnorderedReport u = check_unordered_omega(e.samples, st.at("margin"));
                run["pass"] = u.pass;
                run["offending"] = u.offending ? json{u.offending->first, u.offending->second} : json(nullptr);
                unordered = unordered && u.pass;
            }
        } catch (const IntegrationError& err) {
            run["verdict"] = "failed";
            run["error"] = err.what();
        }
        runs.push_back(std::move(run));
    }
    json count_json = json::object();
    for (const auto& [k, n] : counts) count_json[k] = n;
    checks["unordered_omega"] = {{"applicable", cooperative_form}, {"system", form_name}, {"pass", unordered},
                                 {"counts", std::move(count_json)}, {"runs", std::move(runs)}};
    if (cooperative_form) {
        ++applicable;
        pass = pass && unordered;
    }

    r["checks"] = std::move(checks);
    r["applicable_checks"] = applicable;
    r["pass"] = pass;
    return o;
}

Outcome cmd_equilibria(const Settings& st) {
    const Analysed a = load(st.cfg, st.sign());
    const SystemDef& s = need_system(a, st.cfg);
    EquilibriumOptions eo;
    eo.eq_tol = st.at("eq");
    eo.cluster_tol = st.at("cluster");
    eo.trajectory_time = st.t_end;
    eo.seed = st.cfg.seed;
    const auto points = find_equilibria(s, eo);
    json list = json::array();
    for (const auto& p : points) {
        double residual = 0.0;
        for (double f : eval_field(s, p)) residual = std::max(residual, std::abs(f));
        const Accessibility acc = accessibility(s.domain, p);
        list.push_back({{"x", vec(p)}, {"residual", residual},
                        {"accessible", {{"above", acc.above}, {"below", acc.below}}}});
    }
    Outcome o;
    o.result = {{"count", points.size()}, {"points", std::move(list)}};
    return o;
}

Outcome dispatch(const Settings& st) {
    const std::string& c = st.cfg.command;
    if (c == "analyze") return cmd_analyze(st);
    if (c == "spin") return cmd_spin(st);
    if (c == "decompose") return cmd_decompose(st);
    if (c == "transform") return cmd_transform(st);
    if (c == "simulate") return cmd_simulate(st);
    if (c == "omega") return cmd_omega(st);
    if (c == "verify") return cmd_verify(st);
    if (c == "equilibria") return cmd_equilibria(st);
    throw UsageError("unknown command '" + c + "'");
}

Outcome failed(int code, std::string status, const std::string& message) {
    Outcome o;
    o.code = code;
    o.status = std::move(status);
    o.message = message;
    return o;
}

void write_atomically(const std::string& path, const std::string& text) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw UsageError("cannot write output file '" + path + "'");
        f << text;
        f.flush();
        if (!f) throw UsageError("cannot write output file '" + path + "'");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw UsageError("cannot replace output file '" + path + "'");
    }
}

std::vector<double> parse_vector(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        char* end = nullptr;
        const double v = std::strtod(item.c_str(), &end);
        while (end && (*end == ' ' || *end == '\t')) ++end;
        if (item.empty() || end == item.c_str() || *end != '\0' || !std::isfinite(v))
            throw UsageError("--x0: '" + item + "' is not a finite number");
        out.push_back(v);
    }
    if (out.empty()) throw UsageError("--x0 is empty");
    return out;
}

}  // namespace

const std::map<std::string, double>& default_tolerances() {
    static const std::map<std::string, double> d{
        {"atol", 1e-10},      {"blowup", 1e8},        {"boundary", 1e-9}, {"cluster", 1e-6},
        {"cyc", 1e-4},        {"drift", 1e-7},        {"eq", 1e-9},       {"flow", 1e-6},
        {"margin", 1e-6},     {"min_speed", 1e-6},    {"monotone", 1e-7}, {"period_spread", 0.05},
    };
    return d;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Structural analysis of sign-labelled ODE systems", "cohere"};
    RunConfig cfg;
    std::string x0_text;
    bool want_json = false, want_csv = false;
    std::map<std::string, double> tol_values = default_tolerances();
    std::vector<std::string> commands{"analyze", "spin",  "decompose", "transform",
                                      "simulate", "omega", "verify",    "equilibria"};

    app.add_option("command", cfg.command, "analyze | spin | decompose | transform | simulate | omega | verify | equilibria")
        ->required()
        ->check(CLI::IsMember(commands));
    app.add_option("--input,-i", cfg.input, "system file (.ode DSL or graph .json)")->required();
    app.add_option("--format", cfg.format, "ode | graph (default: by extension)")
        ->check(CLI::IsMember({"ode", "graph"}));
    app.add_option("--x0", x0_text, "initial state, comma-separated");
    app.add_option("--t-end", cfg.t_end, "integration horizon")->check(CLI::PositiveNumber);
    app.add_option("--dt", cfg.dt, "output sampling interval")->check(CLI::PositiveNumber);
    app.add_option("--rtol", cfg.rtol, "relative tolerance")->check(CLI::PositiveNumber);
    app.add_option("--seed", cfg.seed, "seed for all sampling");
    for (auto& [name, value] : tol_values) app.add_option("--tol." + name, value, "tolerance override");
    auto* json_flag = app.add_flag("--json", want_json, "JSON report");
    app.add_flag("--csv", want_csv, "CSV trajectory (simulate)")->excludes(json_flag);
    app.add_option("--out,-o", cfg.out, "output file, written atomically (default stdout)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    if (want_json) cfg.output = "json";
    if (want_csv) cfg.output = "csv";
    for (const auto& [name, value] : tol_values)
        if (value != default_tolerances().at(name)) cfg.tolerances[name] = value;

    Settings st;
    Outcome o;
    try {
        if (!x0_text.empty()) cfg.x0 = parse_vector(x0_text);
        st = resolve(cfg);
        o = dispatch(st);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ParseError& e) {
        err << cfg.input;
        if (e.line() > 0) err << ":" << e.line() << ":" << e.column();
        err << ": error: " << e.message() << "\n";
        return kExitUsage;
    } catch (const IncoherentError& e) {
        o = failed(kExitIncoherent, "incoherent", e.what());
    } catch (const IntegrationError& e) {
        o = failed(kExitIntegration, "integration_error", e.what());
    } catch (const AnalysisError& e) {
        o = failed(kExitAnalysis, "analysis_error", e.what());
    } catch (const BudgetExceeded& e) {
        o = failed(kExitAnalysis, "analysis_error", e.what());
    } catch (const EvalError& e) {
        o = failed(kExitAnalysis, "analysis_error", e.what());
    } catch (const std::invalid_argument& e) {
        o = failed(kExitAnalysis, "analysis_error", e.what());
    }
    if (!o.message.empty()) err << "error: " << o.message << "\n";

    std::string text;
    if (!o.raw.empty()) {
        text = std::move(o.raw);
    } else {
        json report;
        report["command"] = st.cfg.command;
        report["status"] = o.status;
        report["config"] = config_json(st);
        report["result"] = o.result.is_null() ? json(nullptr) : o.result;
        if (!o.message.empty()) report["error"] = {{"message", o.message}};
        text = to_text(report);
    }
    if (st.cfg.out.empty()) {
        out << text;
    } else {
        try {
            write_atomically(st.cfg.out, text);
        } catch (const UsageError& e) {
            err << "error: " << e.what() << "\n";
            return kExitUsage;
        }
    }
    return o.code;
}

}  // namespace cohere
