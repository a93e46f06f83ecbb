#include "reinforce/cli.hpp"

#include "reinforce/cell_solutions.hpp"
#include "reinforce/errors.hpp"
#include "reinforce/fiber_layout.hpp"
#include "reinforce/fine_scale_solver.hpp"
#include "reinforce/limit_solver.hpp"
#include "reinforce/parallel.hpp"
#include "reinforce/scenario.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

namespace reinforce {

namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

struct Context {
    Scenario scenario;
    fs::path out_dir;
    bool allow_conjectural = false;
    std::ostream& out;
    std::ostream& err;
};

ojson num(double v)
{
    if (std::isfinite(v))
        return v;
    if (std::isnan(v))
        return nullptr;
    return v > 0 ? "inf" : "-inf";
}

ojson vec(const Vec3& v) { return ojson::array({num(v[0]), num(v[1]), num(v[2])}); }

std::string csv_num(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    return fmt::format("{:.17g}", v);
}

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\r\n") == std::string::npos)
        return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"')
            q += '"';
        q += c;
    }
    return q + "\"";
}

class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header) : width_(header.size()) { row(header); }

    void row(const std::vector<std::string>& cells)
    {
        if (cells.size() != width_)
            throw Error("internal: CSV row width mismatch");
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i)
                text_ += ',';
            text_ += csv_field(cells[i]);
        }
        text_ += "\r\n";
    }

    const std::string& text() const { return text_; }

private:
    std::size_t width_;
    std::string text_;
};

void write_file(const fs::path& path, const std::string& content)
{
    fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw ConfigError(fmt::format("cannot write '{}'", path.string()));
    f << content;
}

void write_json(const fs::path& path, const ojson& j) { write_file(path, j.dump(2) + "\n"); }

ojson coefficients_json(const EffectiveCoefficients& e)
{
    ojson j;
    j["gamma"] = num(e.gamma);
    j["kappa"] = num(e.kappa);
    j["A11"] = num(e.A(0));
    j["A22"] = num(e.A(1));
    j["A33"] = num(e.A(2));
    j["E_o"] = num(e.E_o);
    j["E_1"] = num(e.E_1);
    return j;
}

ojson layout_manifest(const FiberLayout& layout)
{
    ojson j;
    j["epsilon"] = num(layout.epsilon);
    j["r"] = num(layout.radius);
    j["s"] = num(layout.support);
    j["n_fibers"] = layout.n_fibers();
    j["nominal_fibers"] = num(layout.a * layout.b / (layout.epsilon * layout.epsilon));
    j["volume_fraction"] = num(layout.volume_fraction());
    return j;
}

ojson mesh_json(const StructuredGrid& g)
{
    ojson j;
    j["elements"] = ojson::array({g.ex(), g.ey(), g.ez()});
    j["h"] = ojson::array({num(g.hx), num(g.hy), num(g.hz)});
    j["nodes"] = g.n_nodes();
    return j;
}

void require_limit_regime(const Context& ctx, const char* what)
{
    const RegimeTag tag = ctx.scenario.regime;
    if (tag == RegimeTag::Critical || tag == RegimeTag::Soft)
        return;
    if (tag == RegimeTag::GammaZeroConjectural) {
        if (ctx.allow_conjectural)
            return;
        throw RegimeError(fmt::format("{}: the gamma = 0 limit functional is conjectural; pass --allow-conjectural",
                                      what));
    }
    throw RegimeError(fmt::format("{}: regime '{}' has no coupled (u, v3) limit problem; use solve {}", what,
                                  to_string(tag), tag == RegimeTag::Flexion ? "flexion" : "stiff"));
}

// ---- coefficients ----

int cmd_coefficients(Context& ctx)
{
    const Scenario& s = ctx.scenario;
    const EffectiveCoefficients eff = scenario_coefficients(s);
    const std::vector<double> samples = scenario_classify_epsilons(s);
    const Regime cls = classify_regime(scenario_family(s), samples);

    ojson j;
    j["scenario"] = s.name;
    j["regime"] = to_string(s.regime);
    ojson c;
    c["tag"] = to_string(cls.tag);
    c["epsilons"] = samples;
    c["gamma"] = num(cls.gamma);
    c["lambda_o"] = num(cls.lambda_o);
    c["mu_o"] = num(cls.mu_o);
    c["lambda_1"] = num(cls.lambda_1);
    c["mu_1"] = num(cls.mu_1);
    c["diagnostics"] = cls.diagnostics;
    j["classification"] = c;
    j["coefficients"] = coefficients_json(eff);
    ojson per = ojson::array();
    for (double eps : s.epsilons) {
        const double r = scenario_radius(s, eps);
        ojson row;
        row["epsilon"] = num(eps);
        row["radius"] = num(r);
        row["gamma_eps"] = num(gamma_of(eps, r));
        try {
            const LameCoefficients fl = scenario_fiber_lame(s, eps, r);
            row["fiber_lambda"] = num(fl.lambda);
            row["fiber_mu"] = num(fl.mu);
            const TransverseCoefficients t = transverse_coefficients(eps, r, fl);
            row["gamma_star"] = num(t.gamma_star);
            row["lambda_o_star"] = num(t.lambda_o_star);
            row["mu_o_star"] = num(t.mu_o_star);
            row["E_o_star"] = num(t.E_o_star);
        } catch (const PreconditionError& e) {
            row["error"] = e.what();
        }
        per.push_back(row);
    }
    j["per_epsilon"] = per;
    write_json(ctx.out_dir / "coefficients.json", j);

    ctx.out << fmt::format("regime {} (classified {})\n", to_string(s.regime), to_string(cls.tag));
    ctx.out << fmt::format("kappa {:.10g}  A = diag({:.10g}, {:.10g}, {:.10g})  gamma {:.10g}  E_o {:.10g}  E_1 {:.10g}\n",
                           eff.kappa, eff.A(0), eff.A(1), eff.A(2), eff.gamma, eff.E_o, eff.E_1);
    if (cls.tag != s.regime) {
        std::string diag;
        for (const auto& d : cls.diagnostics)
            diag += "\n  " + d;
        throw ConfigError(fmt::format("configured regime '{}' but the scaling family classifies as '{}'{}",
                                      to_string(s.regime), to_string(cls.tag), diag));
    }
    return exit_ok;
}

// ---- cell-verify ----

int cmd_cell_verify(Context& ctx)
{
    const Scenario& s = ctx.scenario;
    if (s.cell_radii.size() < 2)
        throw PreconditionError("cell-verify: the R grid needs at least two radii to fit a + b/ln R");
    std::vector<std::string> header{"kappa", "lambda", "mu", "m", "l"};
    for (double R : s.cell_radii)
        header.push_back(fmt::format("E_R={}", csv_num(R)));
    for (const char* h : {"fitted_limit", "fitted_slope", "expected_limit", "rel_error"})
        header.emplace_back(h);
    CsvWriter csv(header);

    std::vector<LameCoefficients> bases{s.matrix};
    for (double k : s.cell_kappa_sweep)
        bases.push_back({s.matrix.mu * (3.0 - k) / (k - 1.0), s.matrix.mu});

    double worst_diag = 0.0;
    double worst_off = 0.0;
    ojson summary = ojson::array();
    for (const LameCoefficients& base : bases) {
        const double k = kappa(base);
        const double diag = 2.0 * pi * coupling_matrix(base)(0);
        std::vector<double> w_values;
        auto emit = [&](const std::string& m, const std::string& l, const std::vector<double>& values,
                        double expected, double scale) {
            const LogFit fit = fit_log_limit(s.cell_radii, values);
            const double err = std::abs(fit.limit - expected) / scale;
            std::vector<std::string> row{csv_num(k), csv_num(base.lambda), csv_num(base.mu), m, l};
            for (double v : values)
                row.push_back(csv_num(v));
            row.push_back(csv_num(fit.limit));
            row.push_back(csv_num(fit.slope));
            row.push_back(csv_num(expected));
            row.push_back(csv_num(err));
            csv.row(row);
            return err;
        };
        double base_diag = 0.0, base_off = 0.0;
        for (int m = 1; m <= 3; ++m) {
            for (int l = 1; l <= 3; ++l) {
                std::vector<double> values;
                for (double R : s.cell_radii)
                    values.push_back(annulus_energy(m, l, R, base, s.cell_quadrature));
                if (m == 3 && l == 3) {
                    w_values = values;
                    for (double& v : values)
                        v *= base.mu;
                }
                double expected = 0.0;
                if (m == l)
                    expected = m == 3 ? 2.0 * pi * base.mu : diag;
                const double err = emit(std::to_string(m), std::to_string(l), values, expected,
                                        m == l ? expected : diag);
                (m == l ? base_diag : base_off) = std::max(m == l ? base_diag : base_off, err);
            }
        }
        base_diag = std::max(base_diag, emit("w", "w", w_values, 2.0 * pi, 2.0 * pi));
        worst_diag = std::max(worst_diag, base_diag);
        worst_off = std::max(worst_off, base_off);
        ojson row;
        row["kappa"] = num(k);
        row["max_diagonal_rel_error"] = num(base_diag);
        row["max_offdiagonal_rel_error"] = num(base_off);
        summary.push_back(row);
    }
    write_file(ctx.out_dir / "cell_verify.csv", csv.text());
    ojson j;
    j["scenario"] = s.name;
    j["radii"] = s.cell_radii;
    j["kappas"] = summary;
    j["max_diagonal_rel_error"] = num(worst_diag);
    j["verdict"] = worst_diag < 1e-2 ? "PASS" : "FAIL";
    write_json(ctx.out_dir / "cell_verify.json", j);
    ctx.out << fmt::format("cell-verify: max diagonal rel error {:.3e}, max off-diagonal {:.3e} ({})\n", worst_diag,
                           worst_off, worst_diag < 1e-2 ? "PASS" : "FAIL");
    return exit_ok;
}

// ---- solve ----

std::string field_table(const StructuredGrid& g, const LimitState& st)
{
    const bool flex = !st.flexion.empty();
    std::vector<std::string> header{"x", "y", "z", "u1", "u2", "u3", "v3"};
    if (flex)
        for (const char* h : {"v1", "d3v1", "v2", "d3v2"})
            header.emplace_back(h);
    CsvWriter csv(header);
    for (std::size_t n = 0; n < g.n_nodes(); ++n) {
        const Vec3 x = g.coord(n);
        std::vector<std::string> row{csv_num(x[0]), csv_num(x[1]), csv_num(x[2]), csv_num(st.u[3 * n]),
                                     csv_num(st.u[3 * n + 1]), csv_num(st.u[3 * n + 2]), csv_num(st.v3[n])};
        if (flex)
            for (std::size_t c = 0; c < 4; ++c)
                row.push_back(csv_num(st.flexion[4 * n + c]));
        csv.row(row);
    }
    return csv.text();
}

ojson energy_report(const LimitSolution& sol)
{
    ojson j;
    j["energy_total"] = num(sol.energy.total);
    j["energy_elastic"] = num(sol.energy.elastic);
    j["energy_coupling"] = num(sol.energy.coupling);
    j["energy_fiber"] = num(sol.energy.fiber);
    j["load_work"] = num(sol.load_work);
    j["objective"] = num(sol.objective);
    j["residual_norm"] = num(sol.residual_norm);
    j["iterations"] = sol.stats.iterations;
    return j;
}

// Smallest relative objective change over random admissible perturbations.
double minimality_probe(const Scenario& s, const StructuredGrid& g, const EffectiveCoefficients& eff,
                        const BodyForce& f, const WeightField& w, const LimitSolution& sol)
{
    std::mt19937_64 rng(s.seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    double scale = 0.0;
    for (double v : sol.state.u)
        scale = std::max(scale, std::abs(v));
    scale = 1e-3 * (scale > 0.0 ? scale : 1.0);
    double worst = INFINITY;
    const double ref = std::max(std::abs(sol.objective), 1e-300);
    for (std::size_t p = 0; p < s.perturbation_probes; ++p) {
        LimitState q = sol.state;
        for (std::size_t n = 0; n < g.n_nodes(); ++n) {
            if (g.node_ijk(n)[2] == 0)
                continue;
            for (std::size_t c = 0; c < 3; ++c)
                q.u[3 * n + c] += scale * nd(rng);
            q.v3[n] += scale * nd(rng);
        }
        const double obj = limit_energy(q, g, s.matrix, eff, w).total - 2.0 * load_work(q, g, f);
        worst = std::min(worst, (obj - sol.objective) / ref);
    }
    return worst;
}

std::optional<LimitSolution> limit_reference(const Context& ctx)
{
    const RegimeTag tag = ctx.scenario.regime;
    if (tag != RegimeTag::Critical && tag != RegimeTag::Soft &&
        !(tag == RegimeTag::GammaZeroConjectural && ctx.allow_conjectural))
        return std::nullopt;
    const Scenario& s = ctx.scenario;
    return solve_limit(scenario_grid(s), s.matrix, scenario_coefficients(s), scenario_force(s), scenario_weight(s),
                       s.solver);
}

struct FineRun {
    FiberLayout layout;
    StructuredGrid grid;
    LameCoefficients fiber;
    FineSolution solution;
    double korn = 0.0;
    double korn_linear = 0.0;
    Restriction restriction;
};

FineRun run_fine(const Context& ctx, double eps)
{
    const Scenario& s = ctx.scenario;
    FineRun run;
    const double r = scenario_radius(s, eps);
    run.layout = build_layout(s.a, s.b, eps, r);
    run.fiber = scenario_fiber_lame(s, eps, r);
    run.grid = fine_grid(run.layout, s.L, s.fine);
    run.solution = solve_fine(run.grid, run.layout, s.matrix, run.fiber, scenario_force(s), s.solver);
    for (const auto& w : run.solution.warnings)
        ctx.err << "warning: eps " << eps << ": " << w << "\n";
    run.korn = korn_ratio(run.solution.u, run.grid, run.solution.materials, run.layout);
    const SmoothField linear{[](const Vec3& x) { return Vec3{0.0, 0.0, x[2]}; }, nullptr};
    run.korn_linear = korn_ratio(interpolate_field(linear, run.grid), run.grid, run.solution.materials, run.layout);
    run.restriction = rescaled_restriction(run.solution.u, run.grid, run.solution.materials,
                                           [](const Vec3&) { return 1.0; });
    return run;
}

ojson fine_report(const FineRun& run, std::optional<double> F_limit)
{
    ojson j;
    j["F_eps"] = num(run.solution.energy);
    if (F_limit) {
        j["F_limit"] = num(*F_limit);
        j["gap_rel"] = num(std::abs(run.solution.energy - *F_limit) / std::max(*F_limit, 1e-300));
    } else {
        j["F_limit"] = nullptr;
        j["gap_rel"] = nullptr;
    }
    j["fiber_avg_u"] = vec(run.restriction.fiber_average);
    j["korn_ratio"] = num(run.korn);
    j["load_work"] = num(run.solution.load_work);
    j["residual_norm"] = num(run.solution.residual_norm);
    j["iterations"] = run.solution.stats.iterations;
    j["fiber_lame"] = ojson{{"lambda", num(run.fiber.lambda)}, {"mu", num(run.fiber.mu)}};
    j["mesh"] = mesh_json(run.grid);
    j["elements_per_radius"] = num(elements_per_radius(run.grid, run.layout));
    j["voxel_volume_fraction"] = num(run.solution.materials.volume_fraction(run.grid));
    j["layout"] = layout_manifest(run.layout);
    j["warnings"] = run.solution.warnings;
    return j;
}

int cmd_solve(Context& ctx, const std::string& which)
{
    const Scenario& s = ctx.scenario;
    const EffectiveCoefficients eff = scenario_coefficients(s);
    const BodyForce f = scenario_force(s);
    ojson j;
    j["scenario"] = s.name;
    j["regime"] = to_string(s.regime);
    j["solve"] = which;
    j["coefficients"] = coefficients_json(eff);

    if (which == "fine") {
        if (s.epsilons.empty())
            throw PreconditionError("solve fine: [fine] epsilons is empty");
        const std::optional<LimitSolution> lim = limit_reference(ctx);
        ojson runs = ojson::array();
        for (std::size_t k = 0; k < s.epsilons.size(); ++k) {
            const FineRun run = run_fine(ctx, s.epsilons[k]);
            const ojson rep = fine_report(run, lim ? std::optional<double>(lim->energy.total) : std::nullopt);
            write_json(ctx.out_dir / fmt::format("layout_{}.json", k), layout_manifest(run.layout));
            runs.push_back(rep);
            ctx.out << fmt::format("fine eps {:.6g}: F_eps {:.10g} ({} iterations, {} fibers)\n", s.epsilons[k],
                                   run.solution.energy, run.solution.stats.iterations, run.layout.n_fibers());
        }
        j["runs"] = runs;
        write_json(ctx.out_dir / "fine_report.json", j);
        return exit_ok;
    }

    const StructuredGrid g = scenario_grid(s);
    LimitSolution sol;
    if (which == "limit") {
        require_limit_regime(ctx, "solve limit");
        const WeightField w = scenario_weight(s);
        sol = solve_limit(g, s.matrix, eff, f, w, s.solver);
        const ResidualNorms res = el_residual(sol.state, g, s.matrix, eff, f, w);
        j["report"] = energy_report(sol);
        j["report"]["residual_u"] = num(res.u_block);
        j["report"]["residual_v"] = num(res.v_block);
        j["report"]["load_norm"] = num(res.load_norm);
        if (s.perturbation_probes > 0) {
            j["report"]["probes"] = s.perturbation_probes;
            j["report"]["probe_min_relative_change"] = num(minimality_probe(s, g, eff, f, w, sol));
        }
    } else if (which == "stiff") {
        if (s.regime != RegimeTag::StiffGammaInfinite)
            throw RegimeError(fmt::format("solve stiff: configured regime is '{}', not 'stiff'", to_string(s.regime)));
        sol = solve_stiff_limit(g, s.matrix, eff.E_o, f, s.solver);
        j["report"] = energy_report(sol);
    } else if (which == "flexion") {
        if (s.regime != RegimeTag::Flexion)
            throw RegimeError(
                fmt::format("solve flexion: configured regime is '{}', not 'flexion'", to_string(s.regime)));
        sol = solve_flexion_limit(g, s.matrix, eff.E_1, s.gamma, eff.A, f, s.solver);
        j["report"] = energy_report(sol);
    } else {
        throw ConfigError(fmt::format("solve: unknown problem '{}' (limit, stiff, flexion, fine)", which));
    }
    j["mesh"] = mesh_json(g);
    write_json(ctx.out_dir / fmt::format("{}_report.json", which), j);
    write_file(ctx.out_dir / fmt::format("{}_fields.csv", which), field_table(g, sol.state));
    ctx.out << fmt::format("{}: energy {:.12g}, residual {:.3e}, {} iterations\n", which, sol.energy.total,
                           sol.residual_norm, sol.stats.iterations);
    return exit_ok;
}

// ---- compare ----

bool strictly_decreasing(const std::vector<double>& v)
{
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] < v[i - 1]))
            return false;
    return true;
}

int cmd_compare(Context& ctx)
{
    const Scenario& s = ctx.scenario;
    if (s.epsilons.size() < 2)
        throw PreconditionError("compare: [fine] epsilons needs at least two entries");
    require_limit_regime(ctx, "compare");
    std::vector<double> eps = s.epsilons;
    std::sort(eps.begin(), eps.end(), std::greater<>());

    const EffectiveCoefficients eff = scenario_coefficients(s);
    const StructuredGrid lg = scenario_grid(s);
    const WeightField w = scenario_weight(s);
    const LimitSolution lim = solve_limit(lg, s.matrix, eff, scenario_force(s), w, s.solver);
    const double F_limit = lim.energy.total;

    std::optional<std::pair<SmoothField, SmoothField>> pair;
    double pair_limit = 0.0;
    if (s.has_recovery) {
        pair = scenario_recovery_pair(s);
        LimitState st = LimitState::zero(lg);
        st.u = interpolate_field(pair->first, lg);
        const std::vector<double> v = interpolate_field(pair->second, lg);
        for (std::size_t n = 0; n < lg.n_nodes(); ++n)
            st.v3[n] = v[3 * n + 2];
        pair_limit = limit_energy(st, lg, s.matrix, eff, w).total;
    }

    CsvWriter csv({"epsilon", "r", "s", "n_fibers", "elements_per_side", "elements_per_radius", "F_eps", "F_limit",
                   "gap_rel", "korn_ratio", "korn_ratio_linear", "recovery_energy", "limit_pair_energy",
                   "recovery_gap", "status"});
    ojson rows = ojson::array();
    std::vector<double> gaps, rec_gaps, korns;
    ojson summary;
    summary["scenario"] = s.name;
    summary["regime"] = to_string(s.regime);
    summary["coefficients"] = coefficients_json(eff);
    summary["limit"] = energy_report(lim);
    summary["limit"]["mesh"] = mesh_json(lg);
    if (pair)
        summary["limit_pair_energy"] = num(pair_limit);

    auto finish = [&](bool complete, const std::string& error) {
        summary["rows"] = rows;
        summary["complete"] = complete;
        if (!complete)
            summary["error"] = error;
        write_file(ctx.out_dir / "convergence.csv", csv.text());
        write_json(ctx.out_dir / "summary.json", summary);
    };

    for (std::size_t k = 0; k < eps.size(); ++k) {
        try {
            const FineRun run = run_fine(ctx, eps[k]);
            write_json(ctx.out_dir / fmt::format("layout_{}.json", k), layout_manifest(run.layout));
            const double gap = std::abs(run.solution.energy - F_limit) / std::max(F_limit, 1e-300);
            double rec = NAN, rec_gap = NAN;
            if (pair) {
                rec = recovery_energy(pair->first, pair->second, run.grid, run.layout, s.matrix, run.fiber);
                rec_gap = std::abs(rec - pair_limit);
                rec_gaps.push_back(rec_gap);
            }
            gaps.push_back(gap);
            korns.push_back(run.korn);
            csv.row({csv_num(eps[k]), csv_num(run.layout.radius), csv_num(run.layout.support),
                     std::to_string(run.layout.n_fibers()), std::to_string(run.grid.ex()),
                     csv_num(elements_per_radius(run.grid, run.layout)), csv_num(run.solution.energy),
                     csv_num(F_limit), csv_num(gap), csv_num(run.korn), csv_num(run.korn_linear), csv_num(rec),
                     csv_num(pair ? pair_limit : NAN), csv_num(rec_gap), "ok"});
            ojson row = fine_report(run, F_limit);
            row["recovery_energy"] = num(rec);
            row["recovery_gap"] = num(rec_gap);
            rows.push_back(row);
            ctx.out << fmt::format("eps {:.6g}: F_eps {:.10g}  F_limit {:.10g}  gap_rel {:.4f}\n", eps[k],
                                   run.solution.energy, F_limit, gap);
        } catch (const std::exception& e) {
            std::vector<std::string> row(14, "");
            row[0] = csv_num(eps[k]);
            row.push_back("failed");
            csv.row(row);
            finish(false, e.what());
            throw;
        }
    }

    const bool gap_ok = strictly_decreasing(gaps);
    summary["gap_decreasing"] = gap_ok ? "PASS" : "FAIL";
    summary["gap_max"] = num(*std::max_element(gaps.begin(), gaps.end()));
    if (pair)
        summary["recovery_gap_decreasing"] = strictly_decreasing(rec_gaps) ? "PASS" : "FAIL";
    const double baseline = korns.front();
    bool korn_ok = baseline > 0.0;
    for (double k : korns)
        korn_ok = korn_ok && k <= 2.0 * baseline && k >= 0.5 * baseline;
    summary["korn_baseline"] = num(baseline);
    summary["korn_within_2x"] = korn_ok ? "PASS" : "FAIL";
    finish(true, "");
    ctx.out << fmt::format("gap_rel decreasing: {}\n", gap_ok ? "PASS" : "FAIL");
    if (pair)
        ctx.out << fmt::format("recovery gap decreasing: {}\n", summary["recovery_gap_decreasing"].get<std::string>());
    ctx.out << fmt::format("korn ratio within 2x of baseline: {}\n", korn_ok ? "PASS" : "FAIL");
    return exit_ok;
}

// ---- regimes ----

int cmd_regimes(std::ostream& out)
{
    struct Row {
        RegimeTag tag;
        const char* terms;
    };
    const Row rows[] = {
        {RegimeTag::Critical, "sigma(u):e(u) + 2 pi gamma (v-u)'A(v-u) + pi E_o e33(v)^2"},
        {RegimeTag::Soft, "sigma(u):e(u) + 2 pi gamma (v-u)'A(v-u)"},
        {RegimeTag::StiffGammaInfinite, "sigma(u):e(u) + pi E_o e33(u)^2, v = u"},
        {RegimeTag::Flexion, "sigma(u):e(u) + 2 pi gamma (v-u)'A(v-u) + (pi E_1/4) (d33 v_a)^2, v3 = 0"},
        {RegimeTag::GammaZeroConjectural, "sigma(u):e(u) + pi E_o e33(v)^2 (conjectural, needs --allow-conjectural)"},
    };
    for (const Row& r : rows)
        out << fmt::format("{:<12} {}\n", to_string(r.tag), r.terms);
    return exit_ok;
}

int exit_code_for(const std::exception& e)
{
    if (dynamic_cast<const RegimeError*>(&e))
        return exit_regime;
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const PreconditionError*>(&e) ||
        dynamic_cast<const EmptyLayoutError*>(&e))
        return exit_config;
    return exit_numerical;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Fiber-reinforced elastic body: effective coefficients, limit and fine-scale solves"};
    app.require_subcommand(1);
    std::string config;
    std::string out_dir = "out";
    int threads = 1;
    std::optional<std::uint64_t> seed;
    bool allow = false;
    std::string which;

    auto common = [&](CLI::App* sc) {
        sc->add_option("--config", config, "scenario file (TOML, or JSON by extension)")->required();
        sc->add_option("--out", out_dir, "output directory");
        sc->add_option("--threads", threads, "worker threads")->check(CLI::Range(1, 256));
        sc->add_option("--seed", seed, "overrides the scenario seed");
        sc->add_flag("--allow-conjectural", allow, "permit the gamma = 0 limit functional");
    };
    CLI::App* coeff = app.add_subcommand("coefficients", "effective coefficients and regime classification");
    CLI::App* cell = app.add_subcommand("cell-verify", "annulus energies of the cell fields and their log fits");
    CLI::App* solve = app.add_subcommand("solve", "solve one problem: limit, stiff, flexion or fine");
    CLI::App* compare = app.add_subcommand("compare", "fine-scale versus limit energies over the eps list");
    CLI::App* regimes = app.add_subcommand("regimes", "list the supported regimes");
    for (CLI::App* sc : {coeff, cell, solve, compare})
        common(sc);
    solve->add_option("problem", which, "limit | stiff | flexion | fine")
        ->required()
        ->check(CLI::IsMember({"limit", "stiff", "flexion", "fine"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        std::ostringstream o, er;
        const int code = app.exit(e, o, er);
        out << o.str();
        err << er.str();
        return code == 0 ? exit_ok : exit_config;
    }

    if (regimes->parsed())
        return cmd_regimes(out);

    try {
        set_thread_count(threads);
        Context ctx{load_scenario(config), fs::path(out_dir), allow, out, err};
        if (seed)
            ctx.scenario.seed = *seed;
        if (coeff->parsed())
            return cmd_coefficients(ctx);
        if (cell->parsed())
            return cmd_cell_verify(ctx);
        if (solve->parsed())
            return cmd_solve(ctx, which);
        return cmd_compare(ctx);
    } catch (const ClassificationError& e) {
        err << "error: " << e.what() << "\n";
        for (const auto& d : e.diagnostics())
            err << "  " << d << "\n";
        return exit_numerical;
    } catch (const SolverError& e) {
        err << "error: " << e.what() << "\n";
        const auto& h = e.residual_history();
        if (!h.empty())
            err << fmt::format("  residual history: first {:.3e}, last {:.3e} ({} entries)\n", h.front(), h.back(),
                               h.size());
        return exit_numerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
}

} // namespace reinforce
