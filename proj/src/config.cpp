#include "mfhp/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <sstream>

namespace mfhp {

namespace {

static_assert(std::is_same_v<std::uint64_t, std::size_t>, "seed parsing reuses the size_t overload");

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, std::string_view v, const char* expected) {
    throw ConfigError("key '" + key + "': expected " + expected + ", got '" + std::string(v) + "'");
}

double to_double(const std::string& key, std::string_view v) {
    double out = 0.0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out)) bad_value(key, v, "a number");
    return out;
}

// Integers may be written in scientific notation (2.5e5) as long as they are integral.
long long to_integer(const std::string& key, std::string_view v) {
    const double d = to_double(key, v);
    if (d != std::floor(d) || std::abs(d) > 9.0e15) bad_value(key, v, "an integer");
    return static_cast<long long>(d);
}

std::vector<std::string_view> split_list(std::string_view v) {
    std::vector<std::string_view> out;
    if (trim(v).empty()) return out;
    std::size_t start = 0;
    while (true) {
        const auto comma = v.find(',', start);
        out.push_back(trim(v.substr(start, comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

void parse_into(double& dst, const std::string& key, std::string_view v) { dst = to_double(key, v); }

void parse_into(int& dst, const std::string& key, std::string_view v) {
    const long long x = to_integer(key, v);
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
        bad_value(key, v, "an int");
    dst = static_cast<int>(x);
}

void parse_into(std::size_t& dst, const std::string& key, std::string_view v) {
    const long long x = to_integer(key, v);
    if (x < 0) bad_value(key, v, "a non-negative integer");
    dst = static_cast<std::size_t>(x);
}

void parse_into(bool& dst, const std::string& key, std::string_view v) {
    if (v == "true") dst = true;
    else if (v == "false") dst = false;
    else bad_value(key, v, "true or false");
}

void parse_into(std::string& dst, const std::string&, std::string_view v) { dst = std::string(v); }

void parse_into(std::optional<double>& dst, const std::string& key, std::string_view v) {
    if (v == "none" || v.empty()) dst.reset();
    else dst = to_double(key, v);
}

void parse_into(std::vector<double>& dst, const std::string& key, std::string_view v) {
    dst.clear();
    for (auto item : split_list(v)) dst.push_back(to_double(key, item));
}

void parse_into(std::vector<int>& dst, const std::string& key, std::string_view v) {
    dst.clear();
    for (auto item : split_list(v)) {
        int x = 0;
        parse_into(x, key, item);
        dst.push_back(x);
    }
}

std::string format(double v) {
    char buf[64];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}
std::string format(int v) { return std::to_string(v); }
std::string format(std::size_t v) { return std::to_string(v); }
std::string format(bool v) { return v ? "true" : "false"; }
std::string format(const std::string& v) { return v; }
std::string format(const std::optional<double>& v) { return v ? format(*v) : "none"; }

template <class T>
std::string format(const std::vector<T>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format(v[i]);
    return s;
}

struct KeyDef {
    std::string name;
    std::function<void(RunConfig&, std::string_view)> set;
    std::function<std::string(const RunConfig&)> get;
};

template <class Access>
KeyDef key(std::string name, Access access) {
    KeyDef k;
    k.name = name;
    k.set = [access, name](RunConfig& c, std::string_view v) { parse_into(access(c), name, v); };
    k.get = [access](const RunConfig& c) { return format(access(c)); };
    return k;
}

#define MFHP_KEY(name, member) key(name, [](auto& c) -> auto& { return c.member; })

const std::vector<KeyDef>& key_table() {
    static const std::vector<KeyDef> table{
        MFHP_KEY("problem", problem),
        MFHP_KEY("alpha_h", h_band.alpha),
        MFHP_KEY("beta_h", h_band.beta),
        MFHP_KEY("lambda_h", h_band.lambda),
        MFHP_KEY("theta_h", h_band.theta),
        MFHP_KEY("alpha_p", p_band.alpha),
        MFHP_KEY("beta_p", p_band.beta),
        MFHP_KEY("lambda_p", p_band.lambda),
        MFHP_KEY("theta_p", p_band.theta),
        MFHP_KEY("h_max", h_max),
        MFHP_KEY("n_max", n_max),
        MFHP_KEY("n_iter", n_iter),
        MFHP_KEY("gamma", gamma),
        MFHP_KEY("orders", orders),
        MFHP_KEY("h0", h0),
        MFHP_KEY("m0", m0),
        MFHP_KEY("phs_k", phs_k),
        MFHP_KEY("order_bump", order_bump),
        MFHP_KEY("warm_start", warm_start),
        MFHP_KEY("ghost_nodes", ghost_nodes),
        MFHP_KEY("solver_tolerance", solver_tolerance),
        MFHP_KEY("solver_max_iterations", solver_max_iterations),
        MFHP_KEY("solver_drop_tolerance", solver_drop_tolerance),
        MFHP_KEY("solver_fill_factor", solver_fill_factor),
        MFHP_KEY("solver_direct_below", solver_direct_below),
        MFHP_KEY("seed", seed),
        MFHP_KEY("out", out),
        MFHP_KEY("ref", ref),
        MFHP_KEY("study_h", study_h),
        MFHP_KEY("study_m", study_m),
        MFHP_KEY("study_seeds", study_seeds),
        MFHP_KEY("peak_strength", peak_strength),
        MFHP_KEY("peak_source_x", peak_source_x),
        MFHP_KEY("peak_source_y", peak_source_y),
        MFHP_KEY("young", young),
        MFHP_KEY("poisson", poisson),
        MFHP_KEY("pad_young", pad_young),
        MFHP_KEY("pad_poisson", pad_poisson),
        MFHP_KEY("force", force),
        MFHP_KEY("epsilon", epsilon),
        MFHP_KEY("length", length),
        MFHP_KEY("width", width),
        MFHP_KEY("thickness", thickness),
        MFHP_KEY("pad_radius", pad_radius),
        MFHP_KEY("normal_force", normal_force),
        MFHP_KEY("tangential_force", tangential_force),
        MFHP_KEY("axial_stress", axial_stress),
        MFHP_KEY("friction", friction),
    };
    return table;
}

#undef MFHP_KEY

bool allowed_order(int m) {
    return std::find(kAllowedOrders.begin(), kAllowedOrders.end(), m) != kAllowedOrders.end();
}

}  // namespace

RunConfig default_config(const std::string& problem) {
    RunConfig c;
    c.problem = problem;
    c.out = "run_" + problem;
    if (problem == "peak") {
        c.h_band = {0.225, 0.175, 2.625, 1.01};
        c.p_band = {0.05, 1e-4, 5.0, 1.258};
        c.h_max = 0.1;
        c.n_max = 250000;
        c.n_iter = 70;
        c.h0 = 0.03;
        // N from about 3e3 to 3e4, log-spaced
        c.study_h = {0.036, 0.0306, 0.026, 0.0221, 0.0188, 0.0159, 0.0135, 0.0115};
        c.study_seeds = 5;
        c.study_m = {2, 4};
    } else if (problem == "fretting") {
        c.h_band = {1e-4, 5e-5, 5.0, 1.05};
        c.p_band = {0.1, 1e-3, 4.0, 1.05};
        c.h_max = 0.25;
        c.n_max = 500000;
        c.n_iter = 19;
        c.h0 = 0.25;
        c.young = 72100.0;
        c.poisson = 0.33;
    } else if (problem == "boussinesq") {
        c.h_band = {1e-3, 1e-3, 3.75, 1.01};
        c.p_band = {1e-2, 1e-4, 3.0, 1.5};
        c.h_max = 0.04;
        c.n_max = 70000;
        c.n_iter = 20;
        c.h0 = 0.05;
        c.young = 1.0;
        c.poisson = 0.33;
    } else {
        throw ConfigError("unknown problem '" + problem + "' (expected peak, fretting or boussinesq)");
    }
    return c;
}

std::vector<std::string> config_keys() {
    std::vector<std::string> out;
    for (const auto& k : key_table()) out.push_back(k.name);
    return out;
}

RunConfig parse_config(std::string_view text, const std::optional<std::string>& problem_override) {
    std::vector<std::pair<std::string, std::string>> entries;
    std::set<std::string> seen;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view l = line;
        if (const auto hash = l.find('#'); hash != std::string_view::npos) l = l.substr(0, hash);
        l = trim(l);
        if (l.empty()) continue;
        const auto eq = l.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        std::string k(trim(l.substr(0, eq)));
        const std::string v(trim(l.substr(eq + 1)));
        const auto& table = key_table();
        if (std::none_of(table.begin(), table.end(), [&](const KeyDef& d) { return d.name == k; }))
            throw ConfigError("unknown key '" + k + "'");
        if (!seen.insert(k).second) throw ConfigError("key '" + k + "' given twice");
        entries.emplace_back(std::move(k), v);
    }

    std::string problem = "peak";
    for (const auto& [k, v] : entries)
        if (k == "problem") problem = v;
    if (problem_override) problem = *problem_override;

    RunConfig c = default_config(problem);
    for (const auto& [k, v] : entries) {
        if (k == "problem") continue;
        for (const auto& d : key_table())
            if (d.name == k) d.set(c, v);
    }
    c.validate();
    return c;
}

std::string serialize_config(const RunConfig& c) {
    std::string s;
    for (const auto& d : key_table()) s += d.name + " = " + d.get(c) + '\n';
    return s;
}

void RunConfig::validate() const {
    if (std::find(kProblemNames.begin(), kProblemNames.end(), problem) == kProblemNames.end())
        throw ConfigError("unknown problem '" + problem + "'");
    adaptivity().validate();
    if (!(h0 > 0.0)) throw ConfigError("h0 must be positive");
    if (std::find(orders.begin(), orders.end(), m0) == orders.end())
        throw ConfigError("m0 must be one of the allowed orders");
    if (phs_k < 1 || phs_k % 2 == 0) throw ConfigError("phs_k must be a positive odd integer");
    if (order_bump < 0 || order_bump % 2 != 0) throw ConfigError("order_bump must be even and non-negative");
    if (orders.back() + order_bump > kIndicatorOrders.back())
        throw ConfigError("orders + order_bump exceed the indicator order range");
    if (!(solver_tolerance > 0.0)) throw ConfigError("solver_tolerance must be positive");
    if (solver_max_iterations <= 0) throw ConfigError("solver_max_iterations must be positive");
    if (!(solver_drop_tolerance >= 0.0)) throw ConfigError("solver_drop_tolerance must be non-negative");
    if (solver_fill_factor <= 0) throw ConfigError("solver_fill_factor must be positive");
    if (solver_direct_below < 0) throw ConfigError("solver_direct_below must be non-negative");
    for (double h : study_h)
        if (!(h > 0.0)) throw ConfigError("study_h entries must be positive");
    for (int m : study_m)
        if (!allowed_order(m)) throw ConfigError("study_m entries must be drawn from {2,4,6,8}");
    if (study_seeds <= 0) throw ConfigError("study_seeds must be positive");
    if (!(peak_strength > 0.0)) throw ConfigError("peak_strength must be positive");
    if (problem != "peak") material().validate();
    if (problem == "fretting") {
        ElasticMaterial{pad_young * 1e6, pad_poisson}.validate();
        if (!(length > 0.0 && width > 0.0 && thickness > 0.0 && pad_radius > 0.0))
            throw ConfigError("fretting geometry must be positive");
        if (!(friction > 0.0)) throw ConfigError("friction must be positive");
    }
    if (problem == "boussinesq" && !(epsilon > 0.0 && epsilon < 1.0))
        throw ConfigError("epsilon must lie in (0, 1)");
}

double RunConfig::length_scale() const { return problem == "fretting" ? 1e-3 : 1.0; }

AdaptivityParams RunConfig::adaptivity() const {
    AdaptivityParams a;
    a.h = h_band;
    a.p = p_band;
    a.h_max = h_max * length_scale();
    a.n_max = n_max;
    a.n_iter = n_iter;
    a.gamma = gamma;
    a.orders = orders;
    return a;
}

SolverConfig RunConfig::solver() const {
    SolverConfig s;
    s.tolerance = solver_tolerance;
    s.max_iterations = solver_max_iterations;
    s.drop_tolerance = solver_drop_tolerance;
    s.fill_factor = solver_fill_factor;
    s.direct_below = solver_direct_below;
    return s;
}

ElasticMaterial RunConfig::material() const {
    return {problem == "fretting" ? young * 1e6 : young, poisson};
}

FrettingParams RunConfig::fretting() const {
    FrettingParams f;
    f.length = length * 1e-3;
    f.width = width * 1e-3;
    f.thickness = thickness * 1e-3;
    f.pad_radius = pad_radius * 1e-3;
    f.normal_force = normal_force;
    f.tangential_force = tangential_force;
    f.axial_stress = axial_stress * 1e6;
    f.friction = friction;
    f.sample = material();
    f.pad = {pad_young * 1e6, pad_poisson};
    return f;
}

PeakParams RunConfig::peak() const {
    PeakParams p;
    p.strength = peak_strength;
    p.source = Point(peak_source_x, peak_source_y, 0.0);
    return p;
}

BoussinesqParams RunConfig::boussinesq() const {
    BoussinesqParams b;
    b.force = force;
    b.material = material();
    b.epsilon = epsilon;
    return b;
}

ProblemSpec RunConfig::make_problem() const {
    if (problem == "peak") return peak_problem(peak());
    if (problem == "fretting") return fretting_spec(fretting());
    if (problem == "boussinesq") return boussinesq_spec(boussinesq());
    throw ConfigError("unknown problem '" + problem + "'");
}

}  // namespace mfhp
