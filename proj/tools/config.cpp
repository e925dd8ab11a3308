#include "config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "nhsta/errors.hpp"

namespace nhsta::cli {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw ConfigError("config: " + (path.empty() ? std::string("<root>") : path) + ": " + msg);
}

std::string join(const std::string& base, const std::string& key) { return base.empty() ? key : base + "." + key; }

// Walks one JSON object, remembering which keys were consumed so typos are reported.
class Node {
public:
    Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail(path_, "expected an object");
    }

    bool has(const std::string& k) const { return j_.contains(k) && !j_.at(k).is_null(); }

    double number(const std::string& k) {
        const json& v = take(k);
        if (!v.is_number()) fail(join(path_, k), "expected a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) fail(join(path_, k), "must be finite");
        return x;
    }
    double number(const std::string& k, double def) { return has(k) ? number(k) : (used_.insert(k), def); }

    long integer(const std::string& k) {
        const json& v = take(k);
        if (!v.is_number_integer()) fail(join(path_, k), "expected an integer");
        return v.get<long>();
    }
    long integer(const std::string& k, long def) { return has(k) ? integer(k) : (used_.insert(k), def); }

    std::string string(const std::string& k) {
        const json& v = take(k);
        if (!v.is_string()) fail(join(path_, k), "expected a string");
        return v.get<std::string>();
    }

    std::vector<double> numbers(const std::string& k) {
        const json& v = take(k);
        if (!v.is_array()) fail(join(path_, k), "expected an array of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number()) fail(join(path_, k) + "[" + std::to_string(i) + "]", "expected a number");
            out.push_back(v[i].get<double>());
        }
        return out;
    }

    Node child(const std::string& k) { return Node(take(k), join(path_, k)); }
    const json& raw(const std::string& k) { return take(k); }
    std::string path(const std::string& k) const { return join(path_, k); }
    const std::string& where() const { return path_; }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!used_.count(it.key())) fail(join(path_, it.key()), "unknown field");
    }

private:
    const json& take(const std::string& k) {
        if (!j_.contains(k)) fail(join(path_, k), "missing required field");
        used_.insert(k);
        return j_.at(k);
    }

    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

ProtocolKind kind_at(const std::string& path, const std::string& s) {
    try {
        return protocol_kind_from_string(s);
    } catch (const ConfigError&) {
        fail(path, "unknown protocol '" + s + "' (expected uncorrected, td, satd or radd)");
    }
}

Axis parse_axis(Node n) {
    Axis a;
    if (n.has("values")) {
        a.values = n.numbers("values");
    } else if (n.has("min") || n.has("max")) {
        const double lo = n.number("min"), hi = n.number("max");
        if (hi < lo) fail(n.path("max"), "must be >= min");
        if (n.has("step")) {
            const double st = n.number("step");
            if (!(st > 0.0)) fail(n.path("step"), "must be > 0");
            const long cnt = std::lround(std::floor((hi - lo) / st + 1e-9));
            for (long k = 0; k <= cnt; ++k) a.values.push_back(lo + k * st);
        } else {
            const long steps = n.integer("steps");
            if (steps < 1) fail(n.path("steps"), "must be >= 1");
            for (long k = 0; k < steps; ++k) a.values.push_back(steps == 1 ? lo : lo + (hi - lo) * k / (steps - 1));
        }
    }
    n.finish();
    return a;
}

void parse_loop(Node n, CircularLoop& loop) {
    loop.delta0 = n.number("delta0", loop.delta0);
    loop.omega0 = n.number("omega0", loop.omega0);
    loop.gamma0 = n.number("gamma0", loop.gamma0);
    if (n.has("phi") && n.has("phi_over_pi")) fail(n.path("phi"), "give either phi or phi_over_pi");
    if (n.has("phi_over_pi"))
        loop.phi = kPi * n.number("phi_over_pi");
    else
        loop.phi = n.number("phi", loop.phi);
    loop.d = static_cast<int>(n.integer("d", loop.d));
    n.finish();
    if (!(loop.gamma0 > 0.0)) fail(n.path("gamma0"), "must be > 0");
    if (!(loop.delta0 > 0.0)) fail(n.path("delta0"), "must be > 0");
    if (loop.d != 1 && loop.d != -1) fail(n.path("d"), "must be +1 or -1");
}

void parse_ranges(Node n, RaddRanges& r) {
    r.a_min = n.number("A_min", r.a_min);
    r.a_max = n.number("A_max", r.a_max);
    r.a_steps = static_cast<int>(n.integer("A_steps", r.a_steps));
    r.nu_min_frac = n.number("nu_min_over_t0", r.nu_min_frac);
    r.nu_max_frac = n.number("nu_max_over_t0", r.nu_max_frac);
    r.nu_steps = static_cast<int>(n.integer("nu_steps", r.nu_steps));
    r.n_min = static_cast<int>(n.integer("n_min", r.n_min));
    r.n_max = static_cast<int>(n.integer("n_max", r.n_max));
    r.refine_rounds = static_cast<int>(n.integer("refine_rounds", r.refine_rounds));
    r.search_grid_size = static_cast<std::size_t>(n.integer("search_grid_size", long(r.search_grid_size)));
    n.finish();
    try {
        r.validate();
    } catch (const ConfigError& e) {
        fail(n.where(), e.what());
    }
}

void parse_optomech(Node n, OptomechConfig& o) {
    OptomechParams& p = o.params;
    auto pair = [&](const char* key, std::array<double, 2>& dst) {
        if (!n.has(key)) return;
        const std::vector<double> v = n.numbers(key);
        if (v.size() != 2) fail(n.path(key), "expected two values");
        dst = {v[0], v[1]};
    };
    pair("omega_mech", p.omega_mech);
    pair("gamma_mech", p.gamma_mech);
    pair("g", p.g);
    p.kappa = n.number("kappa", p.kappa);
    p.kappa_in = n.number("kappa_in", p.kappa_in);
    p.Omega_L = n.number("Omega_L", p.Omega_L);
    o.field_scale = n.number("field_scale", o.field_scale);
    if (n.has("branch")) {
        const std::string b = n.string("branch");
        if (b == "lower")
            o.branch = DetuningBranch::Lower;
        else if (b == "upper")
            o.branch = DetuningBranch::Upper;
        else
            fail(n.path("branch"), "expected 'lower' or 'upper'");
    }
    if (n.has("schedule")) {
        Node s = n.child("schedule");
        o.times = s.numbers("times");
        o.P_L = s.numbers("P_L");
        o.delta0 = s.numbers("delta0");
        s.finish();
        if (o.P_L.size() != o.times.size() || o.delta0.size() != o.times.size())
            fail(n.path("schedule"), "times, P_L and delta0 must have equal length");
        for (std::size_t i = 0; i < o.P_L.size(); ++i)
            if (o.P_L[i] < 0.0) fail(n.path("schedule.P_L") + "[" + std::to_string(i) + "]", "must be >= 0");
    }
    n.finish();
    if (!(p.kappa > 0.0)) fail(n.path("kappa"), "must be > 0");
    if (!(p.Omega_L > 0.0)) fail(n.path("Omega_L"), "must be > 0");
}

}  // namespace

std::optional<Mask> RunConfig::mask_at(double t0) const {
    if (!mask) return std::nullopt;
    Mask m = *mask;
    if (mask_nu_over_t0) m.nu = *mask_nu_over_t0 * t0;
    return m;
}

std::vector<double> RunConfig::t0_values() const {
    return sweep_t0.empty() ? std::vector<double>{schedule.t0} : sweep_t0.values;
}

std::vector<double> RunConfig::delta0_values() const {
    return sweep_delta0.empty() ? std::vector<double>{loop.delta0} : sweep_delta0.values;
}

RunConfig parse_config(const json& j) {
    RunConfig c;
    c.raw = j;
    Node root(j, "");
    if (root.has("loop")) parse_loop(root.child("loop"), c.loop);
    if (root.has("schedule")) {
        Node s = root.child("schedule");
        c.schedule.t0 = s.number("t0");
        s.finish();
        if (!(c.schedule.t0 > 0.0)) fail(s.path("t0"), "must be > 0");
    }
    c.schedule.d = c.loop.d;
    if (root.has("protocol")) c.protocol = kind_at("protocol", root.string("protocol"));
    const long grid = root.integer("grid_size", long(c.grid_size));
    if (grid < 256) fail("grid_size", "must be >= 256");
    c.grid_size = static_cast<std::size_t>(grid);
    const long outp = root.integer("output_points", long(c.output_points));
    if (outp < 2) fail("output_points", "must be >= 2");
    c.output_points = static_cast<std::size_t>(outp);
    c.tol = root.number("tol", c.tol);
    if (!(c.tol >= 1e-13 && c.tol <= 1e-6)) fail("tol", "must lie in [1e-13, 1e-6]");
    if (root.has("mask")) {
        Node m = root.child("mask");
        Mask mk;
        mk.A = m.number("A");
        if (m.has("nu_over_t0") && m.has("nu")) fail(m.path("nu"), "give either nu or nu_over_t0");
        if (m.has("nu_over_t0")) {
            c.mask_nu_over_t0 = m.number("nu_over_t0");
            mk.nu = *c.mask_nu_over_t0 * c.schedule.t0;
        } else {
            mk.nu = m.number("nu");
        }
        mk.n = static_cast<int>(m.integer("n"));
        m.finish();
        if (mk.A < 0.0) fail(m.path("A"), "must be >= 0");
        if (!(mk.nu > 0.0)) fail(m.path("nu"), "must be > 0");
        if (mk.n < 1) fail(m.path("n"), "must be >= 1");
        c.mask = mk;
    }
    if (root.has("radd_ranges")) parse_ranges(root.child("radd_ranges"), c.radd_ranges);
    if (root.has("noise")) {
        Node n = root.child("noise");
        NoiseConfig nc;
        nc.model.beta = n.number("beta", nc.model.beta);
        nc.model.quadrature_order = static_cast<int>(n.integer("order", nc.model.quadrature_order));
        const long mc = n.integer("mc_samples", 0);
        if (n.has("method")) {
            const std::string m = n.string("method");
            if (m == "adaptive")
                nc.adaptive = true;
            else if (m != "gauss-hermite")
                fail(n.path("method"), "expected gauss-hermite or adaptive");
        }
        nc.rel_tol = n.number("rel_tol", nc.rel_tol);
        n.finish();
        if (!(nc.rel_tol > 0.0 && nc.rel_tol < 1.0)) fail(n.path("rel_tol"), "must lie in (0, 1)");
        if (nc.model.beta < 0.0) fail(n.path("beta"), "must be >= 0");
        if (nc.model.quadrature_order < 3 || nc.model.quadrature_order > 200) fail(n.path("order"), "must lie in [3, 200]");
        if (mc < 0) fail(n.path("mc_samples"), "must be >= 0");
        nc.mc_samples = static_cast<std::size_t>(mc);
        c.noise = nc;
    }
    if (root.has("protocols")) {
        const json& arr = root.raw("protocols");
        if (!arr.is_array() || arr.empty()) fail("protocols", "expected a non-empty array of names");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string p = "protocols[" + std::to_string(i) + "]";
            if (!arr[i].is_string()) fail(p, "expected a string");
            c.kinds.push_back(kind_at(p, arr[i].get<std::string>()));
        }
    }
    if (root.has("sweep")) {
        Node s = root.child("sweep");
        if (s.has("t0")) c.sweep_t0 = parse_axis(s.child("t0"));
        if (s.has("delta0")) c.sweep_delta0 = parse_axis(s.child("delta0"));
        s.finish();
        for (std::size_t i = 0; i < c.sweep_t0.values.size(); ++i)
            if (!(c.sweep_t0.values[i] > 0.0)) fail("sweep.t0[" + std::to_string(i) + "]", "must be > 0");
        for (std::size_t i = 0; i < c.sweep_delta0.values.size(); ++i)
            if (!(c.sweep_delta0.values[i] > 0.0)) fail("sweep.delta0[" + std::to_string(i) + "]", "must be > 0");
    }
    if (root.has("optomech")) {
        OptomechConfig o;
        parse_optomech(root.child("optomech"), o);
        c.optomech = o;
    }
    if (root.has("comment")) root.raw("comment");
    root.finish();
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: ") + path + ": invalid JSON: " + e.what());
    }
    return parse_config(j);
}

}  // namespace nhsta::cli
