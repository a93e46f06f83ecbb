// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit if any fails.
//
// Usage: acceptance <scenario.toml> [work_dir]

#include "reinforce/cell_solutions.hpp"
#include "reinforce/cli.hpp"
#include "reinforce/errors.hpp"
#include "reinforce/expression.hpp"
#include "reinforce/fiber_layout.hpp"
#include "reinforce/limit_solver.hpp"
#include "reinforce/material_law.hpp"
#include "reinforce/parallel.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace reinforce;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

LameCoefficients base_for_kappa(double k) { return {(3.0 - k) / (k - 1.0), 1.0}; }

// ---- 1, 2: annulus energies of the cell fields ----

const std::vector<double> kRadii{1e2, 1e3, 1e4, 1e6};

Outcome diagonal_limit()
{
    const auto t0 = std::chrono::steady_clock::now();
    const LameCoefficients base{1.0, 1.0};
    double worst = 0.0;
    std::string detail;
    for (int m = 1; m <= 3; ++m) {
        std::vector<double> values;
        for (double R : kRadii)
            values.push_back(annulus_energy(m, m, R, base));
        const double expected = m == 3 ? 2.0 * pi : 3.0 * pi;
        const double err = std::abs(fit_log_limit(kRadii, values).limit - expected) / expected;
        worst = std::max(worst, err);
        detail += fmt::format("{}({},{}) rel err {:.2e}; ", m == 3 ? "w " : "", m, m, err);
    }
    const double t = seconds_since(t0);
    return {worst < 1e-2 && t < 30.0, detail + fmt::format("{:.1f} s (limits 1e-2, 30 s)", t)};
}

Outcome off_diagonal()
{
    const LameCoefficients base{1.0, 1.0};
    std::vector<double> off;
    for (double R : kRadii)
        off.push_back(std::abs(annulus_energy(1, 2, R, base)));
    const double diag = annulus_energy(1, 1, 1e6, base);
    // The pair vanishes identically by angular orthogonality, so the quadrature
    // returns round-off; changes below this floor do not count as growth.
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * diag;
    bool decreasing = true;
    for (std::size_t i = 1; i < off.size(); ++i)
        decreasing = decreasing && off[i] <= off[i - 1] + floor;
    const bool small = off.back() <= 0.05 * diag;
    return {small && decreasing,
            fmt::format("|E12(1e6)|/E11(1e6) = {:.2e} (limit 0.05), |E12| over R: {:.2e} {:.2e} {:.2e} {:.2e} "
                        "(non-increasing up to round-off floor {:.1e})",
                        off.back() / diag, off[0], off[1], off[2], off[3], floor)};
}

// ---- 3: equilibrium and boundary values of the cell fields ----

double frob(const Mat2& s)
{
    return std::sqrt(s[0][0] * s[0][0] + s[0][1] * s[0][1] + s[1][0] * s[1][0] + s[1][1] * s[1][1]);
}

Outcome cell_equilibrium()
{
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> rad(1.5, 50.0), ang(0.0, 2.0 * pi);
    const double h = 1e-4;
    double worst = 0.0, boundary = 0.0;
    for (double k : {1.5, 2.0, 3.0}) {
        const LameCoefficients base = base_for_kappa(k);
        for (auto kind : {CellFieldKind::W1, CellFieldKind::W2, CellFieldKind::WLog}) {
            const CellField f{kind, k};
            for (int p = 0; p < 100; ++p) {
                const double rho = rad(rng), th = ang(rng);
                const PlanePoint y{rho * std::cos(th), rho * std::sin(th)};
                double div[2]{}, scale = 0.0;
                if (kind == CellFieldKind::WLog) {
                    const Vec2 xp = eval_antiplane_stress({y.y1 + h, y.y2}, base);
                    const Vec2 xm = eval_antiplane_stress({y.y1 - h, y.y2}, base);
                    const Vec2 yp = eval_antiplane_stress({y.y1, y.y2 + h}, base);
                    const Vec2 ym = eval_antiplane_stress({y.y1, y.y2 - h}, base);
                    div[0] = (xp[0] - xm[0]) / (2 * h) + (yp[1] - ym[1]) / (2 * h);
                    const Vec2 s = eval_antiplane_stress(y, base);
                    scale = std::hypot(s[0], s[1]);
                } else {
                    const Mat2 xp = eval_stress(f, {y.y1 + h, y.y2}, base);
                    const Mat2 xm = eval_stress(f, {y.y1 - h, y.y2}, base);
                    const Mat2 yp = eval_stress(f, {y.y1, y.y2 + h}, base);
                    const Mat2 ym = eval_stress(f, {y.y1, y.y2 - h}, base);
                    for (int i = 0; i < 2; ++i)
                        div[i] = (xp[i][0] - xm[i][0]) / (2 * h) + (yp[i][1] - ym[i][1]) / (2 * h);
                    scale = frob(eval_stress(f, y, base));
                }
                worst = std::max(worst, std::hypot(div[0], div[1]) / scale);
            }
            for (int p = 0; p < 360; ++p) {
                const double th = 2.0 * pi * p / 360.0;
                const Vec2 w = eval_w(f, {std::cos(th), std::sin(th)});
                boundary = std::max(boundary, std::hypot(w[0], w[1]));
            }
        }
    }
    return {worst < 1e-5 && boundary < 1e-12,
            fmt::format("max relative divergence {:.2e} (limit 1e-5), max |w| on |y| = 1 {:.2e} (limit 1e-12)", worst,
                        boundary)};
}

// ---- 4: corrector energy of one fiber ----

Outcome corrector_energy()
{
    const LameCoefficients base{1.0, 1.0};
    const double eps = 4.0;
    std::vector<double> errs;
    double off_ratio = 0.0;
    std::string detail;
    for (double r : {1e-4, 1e-6, 1e-8}) {
        const FiberLayout layout = build_layout(8.0, 8.0, eps, r);
        if (layout.n_fibers() != 1)
            return {false, fmt::format("layout at r = {:g} has {} fibers", r, layout.n_fibers())};
        const double volume = eps * eps * 1.0;
        const double predicted = predicted_corrector_energy(3, 3, gamma_of(eps, r), base, volume);
        const double numeric = corrector_energy_numeric(3, 3, layout, base, 1.0);
        errs.push_back(std::abs(numeric / predicted - 1.0));
        off_ratio = std::max(off_ratio, std::abs(corrector_energy_numeric(1, 3, layout, base, 1.0)) / numeric);
        detail += fmt::format("r {:g}: rel err {:.3e}; ", r, errs.back());
    }
    const bool within = *std::max_element(errs.begin(), errs.end()) < 0.1;
    const bool decreasing = errs[1] < errs[0] && errs[2] < errs[1];
    return {within && decreasing && off_ratio <= 0.05,
            detail + fmt::format("(1,3)/(3,3) {:.2e} (limits 10%, decreasing, 5%)", off_ratio)};
}

// ---- 5: manufactured cubic displacement ----

struct Manufactured {
    std::vector<Expression> u;
    /// sigma[3 i + j].
    std::vector<Expression> sigma;
    std::vector<Expression> f;
};

std::string paren(const Expression& e) { return "(" + e.str() + ")"; }

// Body force -div sigma(u) and stresses by symbolic differentiation.
Manufactured manufacture(const LameCoefficients& m, const std::array<std::string, 3>& u_text)
{
    using V = Expression::Var;
    const V vars[3] = {V::X1, V::X2, V::X3};
    Manufactured out;
    for (const auto& t : u_text)
        out.u.push_back(Expression::parse(t));
    const std::string div = paren(out.u[0].derivative(V::X1)) + "+" + paren(out.u[1].derivative(V::X2)) + "+" +
                            paren(out.u[2].derivative(V::X3));
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            std::string s = fmt::format("{}*({}+{})", m.mu, paren(out.u[i].derivative(vars[j])),
                                        paren(out.u[j].derivative(vars[i])));
            if (i == j)
                s += fmt::format("+{}*({})", m.lambda, div);
            out.sigma.push_back(Expression::parse(s));
        }
    }
    for (std::size_t i = 0; i < 3; ++i)
        out.f.push_back(Expression::parse("-(" + paren(out.sigma[3 * i].derivative(V::X1)) + "+" +
                                          paren(out.sigma[3 * i + 1].derivative(V::X2)) + "+" +
                                          paren(out.sigma[3 * i + 2].derivative(V::X3)) + ")"));
    return out;
}

double l2_error(const StructuredGrid& g, const std::vector<double>& u, const Manufactured& man, double& norm)
{
    const HexRule rule = hex_rule(g, 3, 3, 3);
    double err = 0.0;
    norm = 0.0;
    for (int k = 0; k < g.ez(); ++k)
        for (int j = 0; j < g.ey(); ++j)
            for (int i = 0; i < g.ex(); ++i)
                for (std::size_t q = 0; q < rule.size(); ++q) {
                    const Vec3 x{i * g.hx + rule.offset[q][0], j * g.hy + rule.offset[q][1],
                                 k * g.hz + rule.offset[q][2]};
                    for (int c = 0; c < 3; ++c) {
                        const double exact = man.u[static_cast<std::size_t>(c)].eval(x);
                        const double d = interpolate(g, u, 3, c, x) - exact;
                        err += rule.weight[q] * d * d;
                        norm += rule.weight[q] * exact * exact;
                    }
                }
    norm = std::sqrt(norm);
    return std::sqrt(err);
}

Outcome manufactured_rate()
{
    const LameCoefficients m{2.0, 1.0};
    const Manufactured man = manufacture(m, {"x3^3 + x1*x2*x3", "x1^2*x3 - 0.5*x2*x3^2", "x1*x3^2 + x2^2*x3"});
    BodyForce f;
    f.field = [&](const Vec3& x) { return Vec3{man.f[0].eval(x), man.f[1].eval(x), man.f[2].eval(x)}; };
    f.traction = [&](const Vec3& x, const Vec3& n) {
        Vec3 t{};
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j)
                t[i] += man.sigma[3 * i + j].eval(x) * n[j];
        return t;
    };
    std::vector<double> errs;
    double t_finest = 0.0;
    for (int n : {8, 16, 32}) {
        const auto g = StructuredGrid::box(1, 1, 1, n, n, n);
        const auto t0 = std::chrono::steady_clock::now();
        const LimitSolution s = solve_elasticity(g, m, f);
        t_finest = seconds_since(t0);
        double norm = 0.0;
        errs.push_back(l2_error(g, s.state.u, man, norm) / norm);
    }
    const double r1 = std::log2(errs[0] / errs[1]);
    const double r2 = std::log2(errs[1] / errs[2]);
    return {r1 >= 1.8 && r2 >= 1.8 && t_finest < 60.0,
            fmt::format("relative L2 errors {:.3e} {:.3e} {:.3e}, rates {:.3f} {:.3f}, finest solve {:.1f} s "
                        "(limits 1.8, 60 s)",
                        errs[0], errs[1], errs[2], r1, r2, t_finest)};
}

// ---- 6, 7: limit functional ----

EffectiveCoefficients critical_coefficients(const LameCoefficients& base, double gamma, double lambda_o, double mu_o)
{
    Regime reg;
    reg.tag = RegimeTag::Critical;
    reg.gamma = gamma;
    reg.lambda_o = lambda_o;
    reg.mu_o = mu_o;
    return effective_coefficients(base, reg);
}

Outcome minimality()
{
    const LameCoefficients base{1.0, 1.0};
    const auto g = StructuredGrid::box(1, 1, 1, 8, 8, 8);
    const EffectiveCoefficients eff = critical_coefficients(base, 2.0, 1.0, 1.0);
    const BodyForce f = BodyForce::constant({0.0, 0.0, 1.0});
    const LimitSolution s = solve_limit(g, base, eff, f);
    double umax = 0.0;
    for (double v : s.state.u)
        umax = std::max(umax, std::abs(v));
    std::mt19937_64 rng(11);
    std::normal_distribution<double> nd(0.0, 1.0);
    double worst = INFINITY;
    for (int p = 0; p < 100; ++p) {
        // Amplitudes from 1e-6 to 1e-1 of the solution size.
        const double amp = umax * std::pow(10.0, -6.0 + 5.0 * p / 99.0);
        LimitState q = s.state;
        for (std::size_t n = 0; n < g.n_nodes(); ++n) {
            if (g.node_ijk(n)[2] == 0)
                continue;
            for (std::size_t c = 0; c < 3; ++c)
                q.u[3 * n + c] += amp * nd(rng);
            q.v3[n] += amp * nd(rng);
        }
        const double obj = limit_energy(q, g, base, eff).total - 2.0 * load_work(q, g, f);
        worst = std::min(worst, (obj - s.objective) / std::abs(s.objective));
    }
    return {worst >= -1e-8, fmt::format("min relative objective change {:.3e} over 100 probes (limit -1e-8)", worst)};
}

double l2_gap(const StructuredGrid& g, const LimitState& st)
{
    const HexRule rule = hex_rule(g, 2, 2, 2);
    double acc = 0.0;
    for (int k = 0; k < g.ez(); ++k)
        for (int j = 0; j < g.ey(); ++j)
            for (int i = 0; i < g.ex(); ++i)
                for (std::size_t q = 0; q < rule.size(); ++q) {
                    const Vec3 x{i * g.hx + rule.offset[q][0], j * g.hy + rule.offset[q][1],
                                 k * g.hz + rule.offset[q][2]};
                    const double d = interpolate(g, st.v3, 1, 0, x) - interpolate(g, st.u, 3, 2, x);
                    acc += rule.weight[q] * d * d;
                }
    return std::sqrt(acc);
}

Outcome monotonicity()
{
    const LameCoefficients base{1.0, 1.0};
    const auto g = StructuredGrid::box(1, 1, 1, 6, 6, 6);
    LimitState st = LimitState::zero(g);
    for (std::size_t n = 0; n < g.n_nodes(); ++n) {
        const Vec3 x = g.coord(n);
        st.u[3 * n + 0] = 0.1 * x[2] * x[2];
        st.u[3 * n + 1] = 0.05 * x[0] * x[2];
        st.u[3 * n + 2] = 0.2 * x[2];
        st.v3[n] = 0.3 * x[2] + 0.1 * x[0] * x[2];
    }
    std::vector<double> F;
    for (double gamma : {0.5, 1.0, 2.0, 4.0, 8.0})
        F.push_back(limit_energy(st, g, base, critical_coefficients(base, gamma, 1.0, 1.0)).total);
    bool increasing = true;
    for (std::size_t i = 1; i < F.size(); ++i)
        increasing = increasing && F[i] > F[i - 1];

    const BodyForce f = BodyForce::constant({0.0, 0.0, 1.0});
    std::vector<double> gaps;
    for (double gamma : {1e2, 1e4, 1e6})
        gaps.push_back(l2_gap(g, solve_limit(g, base, critical_coefficients(base, gamma, 1.0, 1.0), f).state));
    const bool shrinking = gaps[1] < gaps[0] && gaps[2] < gaps[1];
    return {increasing && shrinking,
            fmt::format("F over gamma 0.5..8: {:.6g} {:.6g} {:.6g} {:.6g} {:.6g}; |v3-u3| at gamma 1e2, 1e4, 1e6: "
                        "{:.3e} {:.3e} {:.3e}",
                        F[0], F[1], F[2], F[3], F[4], gaps[0], gaps[1], gaps[2])};
}

// ---- 8, 9, 10: scenario runs through the command line ----

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

struct CompareRun {
    int code = -1;
    double seconds = 0.0;
    std::string log;
};

CompareRun run_compare(const std::string& config, const fs::path& out, int threads)
{
    fs::remove_all(out);
    const std::string t = std::to_string(threads);
    const std::string o = out.string();
    const char* argv[] = {"reinforce", "compare", "--config", config.c_str(), "--out", o.c_str(), "--threads",
                          t.c_str()};
    std::ostringstream so, se;
    const auto t0 = std::chrono::steady_clock::now();
    CompareRun r;
    r.code = run_cli(8, argv, so, se);
    r.seconds = seconds_since(t0);
    r.log = so.str() + se.str();
    return r;
}

Outcome energy_convergence(const CompareRun& run, const nlohmann::json& summary)
{
    if (run.code != 0)
        return {false, fmt::format("compare exited with {}: {}", run.code, run.log)};
    const auto& rows = summary.at("rows");
    std::vector<double> gaps, rec;
    for (const auto& r : rows) {
        gaps.push_back(r.at("gap_rel").get<double>());
        rec.push_back(r.at("recovery_gap").get<double>());
    }
    bool gap_ok = gaps.size() >= 2, rec_ok = rec.size() >= 2;
    for (std::size_t i = 1; i < gaps.size(); ++i) {
        gap_ok = gap_ok && gaps[i] <= gaps[i - 1];
        rec_ok = rec_ok && rec[i] < rec[i - 1];
    }
    const double gmax = gaps.empty() ? INFINITY : *std::max_element(gaps.begin(), gaps.end());
    std::string detail = "gap_rel";
    for (double g : gaps)
        detail += fmt::format(" {:.4f}", g);
    detail += "; recovery gap";
    for (double g : rec)
        detail += fmt::format(" {:.3e}", g);
    detail += fmt::format("; {:.0f} s (limits 0.5, 600 s)", run.seconds);
    return {gap_ok && rec_ok && gmax <= 0.5 && run.seconds <= 600.0, detail};
}

Outcome korn(const CompareRun& run, const nlohmann::json& summary)
{
    if (run.code != 0)
        return {false, "compare failed"};
    const double baseline = summary.at("korn_baseline").get<double>();
    bool ok = baseline > 0.0;
    std::string detail = fmt::format("baseline {:.4e}, ratios", baseline);
    for (const auto& r : summary.at("rows")) {
        const double k = r.at("korn_ratio").get<double>();
        ok = ok && k <= 2.0 * baseline && k >= 0.5 * baseline;
        detail += fmt::format(" {:.4e}", k);
    }
    return {ok, detail + " (limit factor 2)"};
}

Outcome round_trips(const CompareRun& a, const CompareRun& b, const fs::path& dir_a, const fs::path& dir_b)
{
    // classify_regime of the family built by fiber_lame_for.
    double worst_rt = 0.0;
    for (double gamma : {0.5, 1.0, 2.0}) {
        const LameCoefficients targets{0.7, 1.3};
        ScalingFamily f;
        f.radius_rule = [gamma](double e) { return std::exp(-1.0 / (gamma * e * e)); };
        f.lame_rule = [&](double e) { return fiber_lame_for(RegimeTag::Critical, e, f.radius_rule(e), targets); };
        const std::vector<double> eps{0.5, 0.4, 0.3, 0.25};
        const Regime reg = classify_regime(f, eps);
        if (reg.tag != RegimeTag::Critical)
            return {false, "round trip classified as " + to_string(reg.tag)};
        worst_rt = std::max({worst_rt, std::abs(reg.gamma - gamma) / gamma,
                             std::abs(reg.lambda_o - targets.lambda) / targets.lambda,
                             std::abs(reg.mu_o - targets.mu) / targets.mu});
    }

    // gamma_of(eps, r) * eps^2 ln r = -1; allowed deviation one unit in the last place.
    double worst_gamma = 0.0;
    for (double e : {0.5, 0.354, 0.1, 1e-3})
        for (double r : {0.3, 1e-3, 1e-9, 1e-200})
            worst_gamma = std::max(worst_gamma, std::abs(gamma_of(e, r) * (e * e * std::log(r)) + 1.0));
    const double ulp = std::numeric_limits<double>::epsilon();

    bool identical = a.code == 0 && b.code == 0;
    std::size_t files = 0;
    std::string mismatch;
    if (identical) {
        for (const auto& entry : fs::directory_iterator(dir_a)) {
            ++files;
            const fs::path other = dir_b / entry.path().filename();
            if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) {
                identical = false;
                mismatch = entry.path().filename().string();
            }
        }
        std::size_t files_b = 0;
        for ([[maybe_unused]] const auto& entry : fs::directory_iterator(dir_b))
            ++files_b;
        identical = identical && files == files_b;
    }
    return {worst_rt <= 1e-10 && worst_gamma <= ulp && identical,
            fmt::format("round trip rel err {:.2e} (limit 1e-10), |gamma_of eps^2 ln r + 1| {:.2e} (limit 1 ulp), "
                        "threads 1 vs 4: {} files {}{}",
                        worst_rt, worst_gamma, files, identical ? "byte-identical" : "DIFFER",
                        mismatch.empty() ? "" : " at " + mismatch)};
}

} // namespace

int main(int argc, char** argv)
{
    if (argc < 2) {
        std::cerr << "usage: acceptance <scenario.toml> [work_dir]\n";
        return 2;
    }
    const std::string config = argv[1];
    const fs::path work = argc > 2 ? fs::path(argv[2]) : fs::temp_directory_path() / "reinforce_acceptance";
    fs::create_directories(work);

    int failures = 0;
    auto report = [&](int id, const char* title, const std::function<Outcome()>& check) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            set_thread_count(1);
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass)
            ++failures;
        std::cout << fmt::format("criterion {:>2} {} {}: {} [{:.1f} s]\n", id, o.pass ? "PASS" : "FAIL", title,
                                 o.detail, seconds_since(t0))
                  << std::flush;
    };

    report(1, "cell energy diagonal limits", diagonal_limit);
    report(2, "cell energy off-diagonal", off_diagonal);
    report(3, "cell field equilibrium", cell_equilibrium);
    report(4, "corrector energy of one fiber", corrector_energy);
    report(5, "manufactured elasticity rate", manufactured_rate);
    report(6, "discrete minimality", minimality);
    report(7, "coupling monotonicity", monotonicity);

    const fs::path dir1 = work / "threads1", dir4 = work / "threads4";
    const CompareRun run1 = run_compare(config, dir1, 1);
    const CompareRun run4 = run_compare(config, dir4, 4);
    nlohmann::json summary;
    if (run1.code == 0)
        summary = nlohmann::json::parse(slurp(dir1 / "summary.json"));
    report(8, "energy convergence", [&] { return energy_convergence(run1, summary); });
    report(9, "korn ratio boundedness", [&] { return korn(run1, summary); });
    report(10, "round trips and determinism", [&] { return round_trips(run1, run4, dir1, dir4); });

    std::cout << fmt::format("{} of 10 criteria passed\n", 10 - failures);
    return failures == 0 ? 0 : 1;
}
