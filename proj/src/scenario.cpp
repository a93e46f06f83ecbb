#include "reinforce/scenario.hpp"

#include "reinforce/errors.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>
#include <toml.hpp>

namespace reinforce {

namespace {

using json = nlohmann::json;

json toml_to_json(const toml::node& node)
{
    if (const auto* t = node.as_table()) {
        json out = json::object();
        for (const auto& [k, v] : *t)
            out[std::string(k.str())] = toml_to_json(v);
        return out;
    }
    if (const auto* a = node.as_array()) {
        json out = json::array();
        for (const auto& v : *a)
            out.push_back(toml_to_json(v));
        return out;
    }
    if (const auto* s = node.as_string())
        return s->get();
    if (const auto* i = node.as_integer())
        return i->get();
    if (const auto* f = node.as_floating_point())
        return f->get();
    if (const auto* b = node.as_boolean())
        return b->get();
    throw ConfigError("unsupported TOML value type (dates and times are not accepted)");
}

class Reader {
public:
    Reader(const json& j, std::string where) : j_(j), where_(std::move(where))
    {
        if (!j_.is_object())
            throw ConfigError(fmt::format("{}: expected a table", where_));
    }

    void allow(std::initializer_list<const char*> keys)
    {
        std::set<std::string> ok(keys.begin(), keys.end());
        for (const auto& [k, v] : j_.items())
            if (!ok.count(k))
                throw ConfigError(fmt::format("{}: unknown key '{}'", where_, k));
    }

    bool has(const char* key) const { return j_.contains(key); }

    Reader sub(const char* key) const { return Reader(j_.at(key), where_ + "." + key); }

    double number(const char* key) const
    {
        const json& v = j_.at(key);
        if (!v.is_number())
            throw ConfigError(fmt::format("{}.{}: expected a number", where_, key));
        return v.get<double>();
    }
    double number(const char* key, double fallback) const { return has(key) ? number(key) : fallback; }

    long long integer(const char* key, long long fallback) const
    {
        if (!has(key))
            return fallback;
        const json& v = j_.at(key);
        if (!v.is_number_integer())
            throw ConfigError(fmt::format("{}.{}: expected an integer", where_, key));
        return v.get<long long>();
    }

    std::string string(const char* key, const std::string& fallback) const
    {
        if (!has(key))
            return fallback;
        const json& v = j_.at(key);
        if (!v.is_string())
            throw ConfigError(fmt::format("{}.{}: expected a string", where_, key));
        return v.get<std::string>();
    }

    Expression expression(const char* key) const
    {
        const json& v = j_.at(key);
        if (v.is_number())
            return Expression::constant(v.get<double>());
        if (!v.is_string())
            throw ConfigError(fmt::format("{}.{}: expected an expression string", where_, key));
        return Expression::parse(v.get<std::string>());
    }

    std::array<Expression, 3> vector_expression(const char* key) const
    {
        const json& v = j_.at(key);
        if (!v.is_array() || v.size() != 3)
            throw ConfigError(fmt::format("{}.{}: expected three component expressions", where_, key));
        std::array<Expression, 3> out{Expression::constant(0), Expression::constant(0), Expression::constant(0)};
        for (std::size_t i = 0; i < 3; ++i) {
            if (v[i].is_number())
                out[i] = Expression::constant(v[i].get<double>());
            else if (v[i].is_string())
                out[i] = Expression::parse(v[i].get<std::string>());
            else
                throw ConfigError(fmt::format("{}.{}[{}]: expected an expression", where_, key, i));
        }
        return out;
    }

    std::vector<double> numbers(const char* key) const
    {
        const json& v = j_.at(key);
        if (!v.is_array())
            throw ConfigError(fmt::format("{}.{}: expected an array of numbers", where_, key));
        std::vector<double> out;
        for (const auto& e : v) {
            if (!e.is_number())
                throw ConfigError(fmt::format("{}.{}: expected an array of numbers", where_, key));
            out.push_back(e.get<double>());
        }
        return out;
    }

private:
    const json& j_;
    std::string where_;
};

void require_positive(double v, const char* what)
{
    if (!(v > 0.0) || !std::isfinite(v))
        throw ConfigError(fmt::format("{} must be positive (got {})", what, v));
}

Scenario from_json(const json& root, const std::string& origin)
{
    Reader r(root, origin);
    r.allow({"name", "regime", "seed", "matrix", "limit", "fiber", "geometry", "grid", "load", "fine", "recovery",
             "cell", "solver", "classify"});
    Scenario s;
    s.name = r.string("name", s.name);
    s.regime = parse_regime_tag(r.string("regime", "critical"));
    const long long seed = r.integer("seed", 1);
    if (seed < 0)
        throw ConfigError("seed must be non-negative");
    s.seed = static_cast<std::uint64_t>(seed);

    if (r.has("matrix")) {
        Reader m = r.sub("matrix");
        m.allow({"lambda", "mu"});
        s.matrix = {m.number("lambda", 1.0), m.number("mu", 1.0)};
    }
    if (!s.matrix.valid())
        throw ConfigError(fmt::format("matrix Lame coefficients invalid (lambda={}, mu={})", s.matrix.lambda,
                                      s.matrix.mu));

    if (r.has("limit")) {
        Reader l = r.sub("limit");
        l.allow({"gamma", "lambda_o", "mu_o", "lambda_1", "mu_1", "E_o", "E_1"});
        s.gamma = l.number("gamma", 0.0);
        s.lambda_o = l.number("lambda_o", 0.0);
        s.mu_o = l.number("mu_o", 0.0);
        s.lambda_1 = l.number("lambda_1", 0.0);
        s.mu_1 = l.number("mu_1", 0.0);
        if (l.has("E_o"))
            s.E_o_override = l.number("E_o");
        if (l.has("E_1"))
            s.E_1_override = l.number("E_1");
    }
    if (r.has("fiber")) {
        Reader f = r.sub("fiber");
        f.allow({"lambda", "mu"});
        s.soft_fiber = {f.number("lambda", 1.0), f.number("mu", 1.0)};
    }
    switch (s.regime) {
    case RegimeTag::Critical:
        require_positive(s.gamma, "limit.gamma");
        require_positive(s.mu_o, "limit.mu_o");
        break;
    case RegimeTag::Soft:
        require_positive(s.gamma, "limit.gamma");
        if (!s.soft_fiber.valid())
            throw ConfigError("fiber Lame coefficients invalid");
        break;
    case RegimeTag::StiffGammaInfinite:
        if (s.mu_o < 0.0 || s.lambda_o < 0.0)
            throw ConfigError("limit.lambda_o and limit.mu_o must be non-negative");
        s.gamma = INFINITY;
        break;
    case RegimeTag::Flexion:
        require_positive(s.gamma, "limit.gamma");
        require_positive(s.mu_1, "limit.mu_1");
        break;
    case RegimeTag::GammaZeroConjectural:
        require_positive(s.mu_o, "limit.mu_o");
        s.gamma = 0.0;
        break;
    case RegimeTag::Unsupported: throw ConfigError("regime 'unsupported' cannot be configured");
    }

    if (r.has("geometry")) {
        Reader g = r.sub("geometry");
        g.allow({"a", "b", "L"});
        s.a = g.number("a", 1.0);
        s.b = g.number("b", 1.0);
        s.L = g.number("L", 1.0);
    }
    require_positive(s.a, "geometry.a");
    require_positive(s.b, "geometry.b");
    require_positive(s.L, "geometry.L");

    if (r.has("grid")) {
        Reader g = r.sub("grid");
        g.allow({"nx", "ny", "nz"});
        s.grid = {static_cast<int>(g.integer("nx", 8)), static_cast<int>(g.integer("ny", 8)),
                  static_cast<int>(g.integer("nz", 8))};
    }
    for (int n : s.grid)
        if (n < 1 || n > 1024)
            throw ConfigError(fmt::format("grid element counts must lie in [1, 1024] (got {})", n));

    if (r.has("load")) {
        Reader l = r.sub("load");
        l.allow({"f", "weight", "young_profile"});
        if (l.has("f"))
            s.force = l.vector_expression("f");
        if (l.has("weight"))
            s.weight = l.expression("weight");
        if (l.has("young_profile"))
            s.young_profile = l.expression("young_profile");
    }

    if (r.has("fine")) {
        Reader f = r.sub("fine");
        f.allow({"epsilons", "radius", "elements_per_radius", "min_elements_per_side", "max_elements_per_side", "nz"});
        if (f.has("epsilons"))
            s.epsilons = f.numbers("epsilons");
        if (f.has("radius"))
            s.radius = f.expression("radius");
        s.fine.elements_per_radius = f.number("elements_per_radius", s.fine.elements_per_radius);
        s.fine.min_elements_per_side = static_cast<int>(f.integer("min_elements_per_side", s.fine.min_elements_per_side));
        s.fine.max_elements_per_side = static_cast<int>(f.integer("max_elements_per_side", s.fine.max_elements_per_side));
        s.fine.nz = static_cast<int>(f.integer("nz", s.fine.nz));
    }
    for (double e : s.epsilons)
        require_positive(e, "fine.epsilons entries");

    if (r.has("recovery")) {
        Reader v = r.sub("recovery");
        v.allow({"u", "v3"});
        s.recovery_u = v.vector_expression("u");
        s.recovery_v3 = v.expression("v3");
        s.has_recovery = true;
    }

    if (r.has("classify")) {
        Reader c = r.sub("classify");
        c.allow({"epsilons"});
        s.classify_epsilons = c.numbers("epsilons");
        if (s.classify_epsilons.size() < 2)
            throw ConfigError("classify.epsilons needs at least two samples");
    }

    if (r.has("cell")) {
        Reader c = r.sub("cell");
        c.allow({"radii", "kappa_sweep", "n_r", "n_theta", "per_panel", "tolerance"});
        if (c.has("radii"))
            s.cell_radii = c.numbers("radii");
        if (c.has("kappa_sweep"))
            s.cell_kappa_sweep = c.numbers("kappa_sweep");
        s.cell_quadrature.n_r = static_cast<std::size_t>(c.integer("n_r", static_cast<long long>(s.cell_quadrature.n_r)));
        s.cell_quadrature.n_theta =
            static_cast<std::size_t>(c.integer("n_theta", static_cast<long long>(s.cell_quadrature.n_theta)));
        s.cell_quadrature.per_panel =
            static_cast<std::size_t>(c.integer("per_panel", static_cast<long long>(s.cell_quadrature.per_panel)));
        s.cell_quadrature.tolerance = c.number("tolerance", s.cell_quadrature.tolerance);
    }
    for (double k : s.cell_kappa_sweep)
        if (!(k > 1.0 && k <= 3.0))
            throw ConfigError(fmt::format("cell.kappa_sweep entries must lie in (1, 3] (got {})", k));

    if (r.has("solver")) {
        Reader v = r.sub("solver");
        v.allow({"tolerance", "max_iterations", "probes"});
        s.solver.tolerance = v.number("tolerance", s.solver.tolerance);
        const long long it = v.integer("max_iterations", 0);
        const long long probes = v.integer("probes", 100);
        if (it < 0 || probes < 0)
            throw ConfigError("solver.max_iterations and solver.probes must be non-negative");
        s.solver.max_iterations = static_cast<std::size_t>(it);
        s.perturbation_probes = static_cast<std::size_t>(probes);
    }
    require_positive(s.solver.tolerance, "solver.tolerance");
    return s;
}

} // namespace

Scenario parse_scenario_toml(const std::string& text, const std::string& origin)
{
    toml::table table;
    try {
        table = toml::parse(text, origin);
    } catch (const toml::parse_error& e) {
        const auto& src = e.source();
        throw ConfigError(fmt::format("{}:{}:{}: {}", origin, src.begin.line, src.begin.column, e.description()));
    }
    return from_json(toml_to_json(table), origin);
}

Scenario parse_scenario_json(const std::string& text, const std::string& origin)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(fmt::format("{}: {}", origin, e.what()));
    }
    return from_json(j, origin);
}

Scenario load_scenario(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError(fmt::format("cannot read config '{}'", path.string()));
    std::stringstream ss;
    ss << in.rdbuf();
    if (path.extension() == ".json")
        return parse_scenario_json(ss.str(), path.string());
    return parse_scenario_toml(ss.str(), path.string());
}

EffectiveCoefficients scenario_coefficients(const Scenario& s)
{
    Regime regime;
    regime.tag = s.regime;
    regime.gamma = s.gamma;
    regime.lambda_o = s.lambda_o;
    regime.mu_o = s.mu_o;
    regime.lambda_1 = s.lambda_1;
    regime.mu_1 = s.mu_1;
    if (s.regime == RegimeTag::Soft)
        regime.lambda_o = regime.mu_o = 0.0;
    EffectiveCoefficients eff = effective_coefficients(s.matrix, regime);
    if (s.regime != RegimeTag::Soft && s.regime != RegimeTag::Flexion) {
        eff.lambda_o_star = s.lambda_o;
        eff.mu_o_star = s.mu_o;
    }
    if (s.E_o_override)
        eff.E_o = *s.E_o_override;
    if (s.E_1_override)
        eff.E_1 = *s.E_1_override;
    return eff;
}

ScalingFamily scenario_family(const Scenario& s)
{
    ScalingFamily f;
    f.radius_rule = [s](double eps) { return scenario_radius(s, eps); };
    f.lame_rule = [s](double eps) { return scenario_fiber_lame(s, eps, scenario_radius(s, eps)); };
    return f;
}

std::vector<double> scenario_classify_epsilons(const Scenario& s)
{
    if (!s.classify_epsilons.empty())
        return s.classify_epsilons;
    // gamma = -1/(eps^2 ln r) grows only logarithmically under power-law radii.
    if (s.regime == RegimeTag::StiffGammaInfinite)
        return {1e-3, 5e-4, 2.5e-4, 1.25e-4};
    return {0.5, 0.4, 0.3};
}

double scenario_radius(const Scenario& s, double epsilon)
{
    if (s.radius)
        return s.radius->eval({0.0, 0.0, 0.0}, epsilon);
    switch (s.regime) {
    case RegimeTag::Critical:
    case RegimeTag::Soft:
    case RegimeTag::Flexion: return std::exp(-1.0 / (s.gamma * epsilon * epsilon));
    case RegimeTag::GammaZeroConjectural: return std::exp(-1.0 / (epsilon * epsilon * epsilon));
    case RegimeTag::StiffGammaInfinite: return epsilon * epsilon / 4.0;
    case RegimeTag::Unsupported: break;
    }
    throw RegimeError("no radius rule for an unsupported regime");
}

LameCoefficients scenario_fiber_lame(const Scenario& s, double epsilon, double radius)
{
    switch (s.regime) {
    case RegimeTag::Soft: return s.soft_fiber;
    case RegimeTag::Flexion: return fiber_lame_for(RegimeTag::Flexion, epsilon, radius, {s.lambda_1, s.mu_1});
    default: return fiber_lame_for(RegimeTag::Critical, epsilon, radius, {s.lambda_o, s.mu_o});
    }
}

BodyForce scenario_force(const Scenario& s)
{
    if (s.force[0].is_constant() && s.force[1].is_constant() && s.force[2].is_constant()) {
        const Vec3 c{s.force[0].eval({}), s.force[1].eval({}), s.force[2].eval({})};
        if (c[0] == 0.0 && c[1] == 0.0 && c[2] == 0.0)
            return {};
        return BodyForce::constant(c);
    }
    BodyForce f;
    const auto comps = s.force;
    f.field = [comps](const Vec3& x) { return Vec3{comps[0].eval(x), comps[1].eval(x), comps[2].eval(x)}; };
    return f;
}

WeightField scenario_weight(const Scenario& s)
{
    WeightField w;
    if (s.weight) {
        const Expression e = *s.weight;
        w.jacobian = [e](double x1, double x2) { return e.eval({x1, x2, 0.0}); };
    }
    if (s.young_profile) {
        const Expression e = *s.young_profile;
        w.young_profile = [e](double x3) { return e.eval({0.0, 0.0, x3}); };
    }
    return w;
}

StructuredGrid scenario_grid(const Scenario& s)
{
    return StructuredGrid::box(s.a, s.b, s.L, s.grid[0], s.grid[1], s.grid[2]);
}

std::pair<SmoothField, SmoothField> scenario_recovery_pair(const Scenario& s)
{
    if (!s.has_recovery)
        throw ConfigError("no [recovery] pair configured");
    return {make_field(s.recovery_u), make_field({s.recovery_u[0], s.recovery_u[1], s.recovery_v3})};
}

} // namespace reinforce
