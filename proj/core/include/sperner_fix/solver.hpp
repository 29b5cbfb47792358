#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sperner_fix/labeling.hpp"
#include "sperner_fix/self_map.hpp"
#include "sperner_fix/simplex.hpp"

namespace sperner_fix {

/// Smallest m whose grid mesh (plus `perturbation_allowance` / m) is below
/// min(delta(eps / (2n(n+1))), eps / (2n(n+1))).
std::int64_t required_resolution(const std::optional<Modulus>& modulus, int n, double eps,
                                 double perturbation_allowance = 0.0);

/// Per-coordinate guarantees at the label-0 vertex of a fully labeled cell.
struct ExtractionBounds {
    double coordinate0_gap = 0.0;     ///< |v_0 - f_0(v)|
    double coordinate0_bound = 0.0;   ///< eps / (n+1)
    double max_other_gap = 0.0;       ///< max_{k != 0} |v_k - f_k(v)|
    double other_bound = 0.0;         ///< max(1, n-1) eps / (n(n+1))
    double residual = 0.0;            ///< |v - f(v)|_1
    bool holds = false;
};

ExtractionBounds check_extraction_bounds(const BarycentricPoint& v, const BarycentricPoint& fv,
                                         double eps);

/// Returns the label-0 vertex of `cell` after asserting the bounds above.
/// Throws MeshInsufficiency when they fail and InvalidArgument when the cell
/// is not fully labeled.
BarycentricPoint extract_approximation(const SimplexGrid& grid, const Labeling& labeling,
                                       const SelfMap& f, std::size_t cell, double eps);
BarycentricPoint extract_approximation(const PerturbedGrid& grid, const Labeling& labeling,
                                       const SelfMap& f, std::size_t cell, double eps);

enum class SearchMode { path, exhaustive };

struct SolverConfig {
    double epsilon0 = 2.0;                     ///< First level; the simplex's l1 diameter.
    std::optional<double> tau_fix;             ///< Early-exit threshold; eps_k / 4 when unset.
    double tau_nonconstant = 1e-10;            ///< Residual treated as f(v) == v.
    double perturbation_scale = 0.25;          ///< Radius rho = scale / m; below 1/2.
    int max_attempts = 64;
    std::uint64_t seed = 0;
    std::int64_t max_resolution = 1'000'000'000;
    std::size_t max_pivots = 200'000'000;
    SearchMode search = SearchMode::path;
    unsigned workers = 1;
    bool warm_start = false;
    int modulus_samples = 1000;
};

enum class SolveStatus { converged, early_vertex_hit, non_constancy_violation };

std::string to_string(SolveStatus status);
std::string to_string(SearchMode mode);

struct RefinementStep {
    double epsilon = 0.0;
    BarycentricPoint point;
    double residual = 0.0;
    std::int64_t resolution = 0;
    bool early_hit = false;
    std::size_t pivots = 0;
};

struct FixedPointResult {
    BarycentricPoint point;
    double residual = 0.0;
    std::int64_t resolution = 0;
    std::vector<RefinementStep> trace;
    SolveStatus status = SolveStatus::converged;
    bool modulus_estimated = false;
    std::optional<double> lipschitz_estimate;
    std::string message;
    std::vector<std::int64_t> violating_vertex;

    bool ok() const noexcept { return status != SolveStatus::non_constancy_violation; }
};

/// Refines eps_k = epsilon0 * 2^-k down to eps_target, restarting the search at
/// each level. A map without modulus gets one from estimate_modulus.
/// Throws ResolutionCap when a level needs m above `max_resolution`.
FixedPointResult solve(const SelfMap& f, double eps_target, const SolverConfig& config = {});

struct ModulusEstimate {
    double lipschitz = 0.0;       ///< Largest observed |f(v)-f(u)|_1 / |v-u|_1.
    double safety_factor = 2.0;
    Modulus modulus;              ///< eps / (safety_factor * lipschitz), capped at 2.
};

ModulusEstimate estimate_modulus(const SelfMap& f, int samples, std::uint64_t seed);

struct BallReport {
    BarycentricPoint center;
    std::vector<double> thresholds;
    std::vector<std::size_t> counts;   ///< Sequence endpoints below each threshold.
    std::vector<double> spreads;       ///< Their largest pairwise l1 distance.
    bool suspected_violation = false;
};

struct SlncReport {
    double epsilon = 0.0;       ///< Ball radius (eps_bar / 2).
    std::int64_t net_resolution = 0;
    std::vector<BallReport> balls;
    std::size_t flagged = 0;
};

/// Samples residual-minimizing sequences inside every l1 ball of a lattice
/// eps-approximation and flags balls where sequences with vanishing residual
/// stay apart. A diagnostic only; it proves nothing.
SlncReport slnc_diagnostic(const SelfMap& f, double eps_bar, int sequences_per_ball,
                           int sequence_length, std::uint64_t seed);

}  // namespace sperner_fix
