#pragma once

#include "reinforce/cell_solutions.hpp"
#include "reinforce/expression.hpp"
#include "reinforce/fine_scale_solver.hpp"
#include "reinforce/limit_solver.hpp"
#include "reinforce/material_law.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace reinforce {

/// A run description loaded from TOML (or JSON when the file ends in .json).
struct Scenario {
    std::string name = "scenario";
    RegimeTag regime = RegimeTag::Critical;
    std::uint64_t seed = 1;

    LameCoefficients matrix{1.0, 1.0};

    /// Limit constants; which ones are required depends on the regime.
    double gamma = 0.0;
    double lambda_o = 0.0;
    double mu_o = 0.0;
    double lambda_1 = 0.0;
    double mu_1 = 0.0;
    std::optional<double> E_o_override;
    std::optional<double> E_1_override;
    /// Fiber Lame coefficients of the soft regime, held fixed in eps.
    LameCoefficients soft_fiber{1.0, 1.0};

    double a = 1.0;
    double b = 1.0;
    double L = 1.0;
    std::array<int, 3> grid{8, 8, 8};

    std::array<Expression, 3> force{Expression::constant(0.0), Expression::constant(0.0), Expression::constant(1.0)};
    std::optional<Expression> weight;
    std::optional<Expression> young_profile;

    std::vector<double> epsilons;
    /// Fiber radius as a function of eps; the default is the scaling of the regime.
    std::optional<Expression> radius;
    FineGridOptions fine;

    std::array<Expression, 3> recovery_u{Expression::constant(0.0), Expression::constant(0.0),
                                         Expression::constant(0.0)};
    Expression recovery_v3 = Expression::constant(0.0);
    bool has_recovery = false;

    /// eps samples for classify_regime; empty selects a default for the regime.
    std::vector<double> classify_epsilons;

    std::vector<double> cell_radii{1e2, 1e3, 1e4, 1e6};
    /// Extra kappa values for cell-verify; lambda is derived from the matrix mu.
    std::vector<double> cell_kappa_sweep{};
    AnnulusQuadrature cell_quadrature;

    SolverOptions solver;
    std::size_t perturbation_probes = 100;
};

/// Throws ConfigError on syntax errors, unknown keys and missing or inconsistent values.
Scenario load_scenario(const std::filesystem::path& path);
Scenario parse_scenario_toml(const std::string& text, const std::string& origin = "<string>");
Scenario parse_scenario_json(const std::string& text, const std::string& origin = "<string>");

/// Effective coefficients of the scenario's regime, with the configured overrides.
EffectiveCoefficients scenario_coefficients(const Scenario& s);

/// The scaling family (radius and fiber Lame coefficients as functions of eps).
ScalingFamily scenario_family(const Scenario& s);
std::vector<double> scenario_classify_epsilons(const Scenario& s);

/// Fiber radius for a given eps.
double scenario_radius(const Scenario& s, double epsilon);

/// Fiber Lame coefficients producing the scenario's limit constants at eps.
LameCoefficients scenario_fiber_lame(const Scenario& s, double epsilon, double radius);

BodyForce scenario_force(const Scenario& s);
WeightField scenario_weight(const Scenario& s);
StructuredGrid scenario_grid(const Scenario& s);

/// The configured smooth pair (u, v) with v = (u1, u2, v3).
std::pair<SmoothField, SmoothField> scenario_recovery_pair(const Scenario& s);

} // namespace reinforce
