#pragma once

#include <cstddef>
#include <functional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "sperner_fix/self_map.hpp"
#include "sperner_fix/simplex.hpp"

namespace sperner_fix {

/// Margin for the strict comparison v_k > f_k(v).
inline constexpr double kCompareTolerance = 1e-12;

enum class Provenance { rule_based, function_induced };

/// Labels indexed by vertex id; -1 marks an unlabeled vertex.
struct Labeling {
    std::vector<int> labels;
    Provenance provenance = Provenance::rule_based;
};

/// Smallest k with v_k > f_k + tau_cmp. Throws ApproximateFixedPoint when
/// |v - fv|_1 <= tau_fix, or when no coordinate clears the comparison margin.
int sperner_label(const BarycentricPoint& v, const BarycentricPoint& fv, double tau_fix,
                  double tau_cmp = kCompareTolerance);

/// Vertex whose residual fell to tau_fix or below while labeling.
struct EarlyFixedPoint {
    std::size_t vertex = 0;
    BarycentricPoint point;
    double residual = 0.0;
};

using LabelGridResult = std::variant<Labeling, EarlyFixedPoint>;

/// Function-induced labeling. Vertices are evaluated once each, split over
/// `workers` threads; the early exit reported is the lowest qualifying vertex id.
LabelGridResult label_grid(const SimplexGrid& grid, const SelfMap& f, double tau_fix,
                           unsigned workers = 1);
LabelGridResult label_grid(const PerturbedGrid& grid, const SelfMap& f, double tau_fix,
                           unsigned workers = 1);

struct LabelViolation {
    std::size_t vertex = 0;
    std::string rule;
};

struct LabelingReport {
    bool admissible = true;
    std::vector<LabelViolation> violations;
};

/// Checks corner labels, face labels (v_i = 0 forbids label i) and label range.
/// Throws IncompleteLabeling if any vertex is unlabeled.
LabelingReport validate_labeling(const SimplexGrid& grid, const Labeling& labeling);

/// Labels a vertex may carry: the indices of its nonzero coordinates.
std::vector<int> admissible_labels(const LatticePoint& vertex);

Labeling random_admissible_labeling(const SimplexGrid& grid, std::mt19937_64& rng);

/// Number of admissible labelings (saturates at SIZE_MAX).
std::size_t count_admissible_labelings(const SimplexGrid& grid);

/// Calls `visit` for every admissible labeling; stops early when it returns false.
void for_each_admissible_labeling(const SimplexGrid& grid,
                                  const std::function<bool(const Labeling&)>& visit);

}  // namespace sperner_fix
