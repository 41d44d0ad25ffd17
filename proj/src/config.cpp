#include "appgame/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace appgame {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void bad(const std::string& where, const std::string& what) {
    throw std::invalid_argument("config: " + where + ": " + what);
}

void reject_unknown_keys(const json& obj, const std::set<std::string>& known,
                         const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!known.count(it.key())) bad(where, "unknown key '" + it.key() + "'");
}

double get_number(const json& obj, const std::string& key, const std::string& where,
                  std::optional<double> fallback = std::nullopt) {
    if (!obj.contains(key)) {
        if (fallback) return *fallback;
        bad(where, "missing required key '" + key + "'");
    }
    const auto& v = obj.at(key);
    if (!v.is_number()) bad(where + "." + key, "expected a number");
    return v.get<double>();
}

bool get_bool(const json& obj, const std::string& key, const std::string& where, bool fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_boolean()) bad(where + "." + key, "expected a boolean");
    return v.get<bool>();
}

} // namespace

ShootOptions RunConfig::shoot_options() const {
    ShootOptions o;
    o.mode = terminal_mode;
    o.eps_terminal = terminal_eps;
    o.tol = shooting_tol;
    o.integ.rel_tol = integrator_rel;
    o.integ.abs_tol = integrator_abs;
    o.integ.sample_count = 0;
    return o;
}

IntegrateOptions RunConfig::integrate_options() const {
    IntegrateOptions o;
    o.rel_tol = integrator_rel;
    o.abs_tol = integrator_abs;
    o.sample_count = samples;
    return o;
}

SimulationSpec RunConfig::to_spec() const {
    SimulationSpec s;
    s.params = params;
    s.x10 = x10;
    s.x20 = x20;
    s.shoot_opts = shoot_options();
    s.integ_opts = integrate_options();
    s.guess = costate_guess;
    return s;
}

bool RunConfig::operator==(const RunConfig& o) const {
    auto same_params = [](const ModelParams& a, const ModelParams& b) {
        return a.delta == b.delta && a.theta == b.theta && a.gamma == b.gamma &&
               a.horizon_T == b.horizon_T && a.eta == b.eta && a.tech_A == b.tech_A &&
               a.tech_alpha == b.tech_alpha && a.tech_mu == b.tech_mu &&
               a.pi_weight == b.pi_weight && a.allow_nonconcave_tech == b.allow_nonconcave_tech;
    };
    auto same_sweep = [](const std::optional<SweepGrid>& a, const std::optional<SweepGrid>& b) {
        if (a.has_value() != b.has_value()) return false;
        if (!a) return true;
        if (a->max_cells != b->max_cells || a->threads != b->threads ||
            a->axes.size() != b->axes.size())
            return false;
        for (std::size_t i = 0; i < a->axes.size(); ++i)
            if (a->axes[i].param != b->axes[i].param || a->axes[i].values != b->axes[i].values)
                return false;
        return true;
    };
    auto same_guess = [](const std::optional<GameState>& a, const std::optional<GameState>& b) {
        if (a.has_value() != b.has_value()) return false;
        if (!a) return true;
        return a->x1 == b->x1 && a->x2 == b->x2 && a->lam1 == b->lam1 && a->lam2 == b->lam2;
    };
    return same_params(params, o.params) && x10 == o.x10 && x20 == o.x20 &&
           terminal_mode == o.terminal_mode && terminal_eps == o.terminal_eps &&
           integrator_rel == o.integrator_rel && integrator_abs == o.integrator_abs &&
           shooting_tol == o.shooting_tol && steady_state_tol == o.steady_state_tol &&
           samples == o.samples && output_dir == o.output_dir &&
           costate_guess == o.costate_guess && same_guess(steady_guess, o.steady_guess) &&
           same_sweep(sweep_grid, o.sweep_grid);
}

RunConfig parse_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
    }
    if (!root.is_object()) bad("top level", "expected a JSON object");
    reject_unknown_keys(root,
                        {"params", "x10", "x20", "terminal_mode", "terminal_eps", "tolerances",
                         "samples", "output_dir", "costate_guess", "steady_guess", "sweep"},
                        "top level");

    RunConfig c;

    if (!root.contains("params") || !root.at("params").is_object())
        bad("params", "missing or not an object");
    const json& pj = root.at("params");
    reject_unknown_keys(pj,
                        {"delta", "theta", "gamma", "horizon_T", "eta", "tech_A", "tech_alpha",
                         "tech_mu", "pi_weight", "allow_nonconcave_tech"},
                        "params");
    c.params.delta = get_number(pj, "delta", "params");
    c.params.theta = get_number(pj, "theta", "params");
    c.params.gamma = get_number(pj, "gamma", "params");
    c.params.horizon_T = get_number(pj, "horizon_T", "params");
    c.params.eta = get_number(pj, "eta", "params");
    c.params.tech_A = get_number(pj, "tech_A", "params");
    c.params.tech_alpha = get_number(pj, "tech_alpha", "params");
    c.params.tech_mu = get_number(pj, "tech_mu", "params", 0.0);
    c.params.pi_weight = get_number(pj, "pi_weight", "params", 0.5);
    c.params.allow_nonconcave_tech = get_bool(pj, "allow_nonconcave_tech", "params", false);
    c.params.validate();

    c.x10 = get_number(root, "x10", "top level");
    c.x20 = get_number(root, "x20", "top level");
    if (!(c.x10 > 0.0)) bad("x10", "must be positive, got " + std::to_string(c.x10));
    if (!(c.x20 > 0.0)) bad("x20", "must be positive, got " + std::to_string(c.x20));

    if (root.contains("terminal_mode")) {
        const auto& tm = root.at("terminal_mode");
        if (!tm.is_string()) bad("terminal_mode", "expected a string");
        const std::string s = tm.get<std::string>();
        if (s == "exhaust-wealth")
            c.terminal_mode = TerminalMode::ExhaustWealth;
        else if (s == "free-price")
            c.terminal_mode = TerminalMode::FreePrice;
        else
            bad("terminal_mode", "expected 'exhaust-wealth' or 'free-price', got '" + s + "'");
    }
    c.terminal_eps = get_number(root, "terminal_eps", "top level", 1e-6);
    if (!(c.terminal_eps > 0.0)) bad("terminal_eps", "must be positive");

    if (root.contains("tolerances")) {
        const json& tj = root.at("tolerances");
        if (!tj.is_object()) bad("tolerances", "expected an object");
        reject_unknown_keys(tj, {"integrator_rel", "integrator_abs", "shooting", "steady_state"},
                            "tolerances");
        c.integrator_rel = get_number(tj, "integrator_rel", "tolerances", 1e-9);
        c.integrator_abs = get_number(tj, "integrator_abs", "tolerances", 1e-12);
        c.shooting_tol = get_number(tj, "shooting", "tolerances", 1e-8);
        c.steady_state_tol = get_number(tj, "steady_state", "tolerances", 1e-8);
        for (auto [name, v] : {std::pair{"integrator_rel", c.integrator_rel},
                               {"integrator_abs", c.integrator_abs},
                               {"shooting", c.shooting_tol},
                               {"steady_state", c.steady_state_tol}})
            if (!(v > 0.0)) bad(std::string("tolerances.") + name, "must be positive");
    }

    if (root.contains("samples")) {
        const auto& sj = root.at("samples");
        if (!sj.is_number_integer()) bad("samples", "expected an integer");
        const long long n = sj.get<long long>();
        if (n < 0 || n > 10'000'000) bad("samples", "must lie in [0, 1e7]");
        c.samples = static_cast<int>(n);
    }

    if (root.contains("output_dir")) {
        if (!root.at("output_dir").is_string()) bad("output_dir", "expected a string");
        c.output_dir = root.at("output_dir").get<std::string>();
    }

    if (root.contains("costate_guess")) {
        const auto& gj = root.at("costate_guess");
        if (!gj.is_array() || gj.size() != 2 || !gj[0].is_number() || !gj[1].is_number())
            bad("costate_guess", "expected an array of two numbers");
        const std::array<double, 2> g{gj[0].get<double>(), gj[1].get<double>()};
        if (!(g[0] > 0.0 && g[1] > 0.0)) bad("costate_guess", "entries must be positive");
        c.costate_guess = g;
    }

    if (root.contains("steady_guess")) {
        const json& sj = root.at("steady_guess");
        if (!sj.is_object()) bad("steady_guess", "expected an object");
        reject_unknown_keys(sj, {"x1", "x2", "lam1", "lam2"}, "steady_guess");
        GameState g;
        g.x1 = get_number(sj, "x1", "steady_guess");
        g.x2 = get_number(sj, "x2", "steady_guess");
        g.lam1 = get_number(sj, "lam1", "steady_guess");
        g.lam2 = get_number(sj, "lam2", "steady_guess");
        if (!(g.x1 > 0.0 && g.x2 > 0.0 && g.lam1 > 0.0 && g.lam2 > 0.0))
            bad("steady_guess", "components must be positive");
        c.steady_guess = g;
    }

    if (root.contains("sweep")) {
        const json& sj = root.at("sweep");
        if (!sj.is_object()) bad("sweep", "expected an object");
        reject_unknown_keys(sj, {"axes", "max_cells", "threads"}, "sweep");
        SweepGrid grid;
        if (!sj.contains("axes") || !sj.at("axes").is_array() || sj.at("axes").empty())
            bad("sweep.axes", "expected a nonempty array");
        for (const auto& aj : sj.at("axes")) {
            if (!aj.is_object()) bad("sweep.axes", "expected objects with 'param' and 'values'");
            reject_unknown_keys(aj, {"param", "values"}, "sweep.axes[]");
            SweepAxis axis;
            if (!aj.contains("param") || !aj.at("param").is_string())
                bad("sweep.axes[].param", "expected a string");
            axis.param = aj.at("param").get<std::string>();
            if (!aj.contains("values") || !aj.at("values").is_array() || aj.at("values").empty())
                bad("sweep.axes[].values", "expected a nonempty array of numbers");
            for (const auto& v : aj.at("values")) {
                if (!v.is_number()) bad("sweep.axes[].values", "expected numbers");
                axis.values.push_back(v.get<double>());
            }
            grid.axes.push_back(std::move(axis));
        }
        if (grid.axes.size() > 2) bad("sweep.axes", "at most 2 axes are supported");
        if (sj.contains("max_cells")) {
            if (!sj.at("max_cells").is_number_integer()) bad("sweep.max_cells", "expected an integer");
            const long long m = sj.at("max_cells").get<long long>();
            if (m < 1) bad("sweep.max_cells", "must be at least 1");
            grid.max_cells = static_cast<std::size_t>(m);
        }
        if (sj.contains("threads")) {
            if (!sj.at("threads").is_number_integer()) bad("sweep.threads", "expected an integer");
            grid.threads = sj.at("threads").get<int>();
            if (grid.threads < 0) bad("sweep.threads", "must be nonnegative");
        }
        c.sweep_grid = std::move(grid);
    }

    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string serialize_config(const RunConfig& c) {
    json root;
    json pj;
    pj["delta"] = c.params.delta;
    pj["theta"] = c.params.theta;
    pj["gamma"] = c.params.gamma;
    pj["horizon_T"] = c.params.horizon_T;
    pj["eta"] = c.params.eta;
    pj["tech_A"] = c.params.tech_A;
    pj["tech_alpha"] = c.params.tech_alpha;
    pj["tech_mu"] = c.params.tech_mu;
    pj["pi_weight"] = c.params.pi_weight;
    pj["allow_nonconcave_tech"] = c.params.allow_nonconcave_tech;
    root["params"] = pj;
    root["x10"] = c.x10;
    root["x20"] = c.x20;
    root["terminal_mode"] =
        c.terminal_mode == TerminalMode::ExhaustWealth ? "exhaust-wealth" : "free-price";
    root["terminal_eps"] = c.terminal_eps;
    root["tolerances"] = {{"integrator_rel", c.integrator_rel},
                          {"integrator_abs", c.integrator_abs},
                          {"shooting", c.shooting_tol},
                          {"steady_state", c.steady_state_tol}};
    root["samples"] = c.samples;
    root["output_dir"] = c.output_dir;
    if (c.costate_guess)
        root["costate_guess"] = {(*c.costate_guess)[0], (*c.costate_guess)[1]};
    if (c.steady_guess)
        root["steady_guess"] = {{"x1", c.steady_guess->x1},
                                {"x2", c.steady_guess->x2},
                                {"lam1", c.steady_guess->lam1},
                                {"lam2", c.steady_guess->lam2}};
    if (c.sweep_grid) {
        json axes = json::array();
        for (const auto& axis : c.sweep_grid->axes)
            axes.push_back({{"param", axis.param}, {"values", axis.values}});
        root["sweep"] = {{"axes", axes},
                         {"max_cells", c.sweep_grid->max_cells},
                         {"threads", c.sweep_grid->threads}};
    }
    return root.dump(2) + "\n";
}

} // namespace appgame
