#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sperner_fix/labeling.hpp"
#include "sperner_fix/simplex.hpp"

namespace sperner_fix {

/// Cells carrying every label 0..n, sorted by cell id. Validates the labeling
/// first and throws InadmissibleLabeling on failure. The scan is split over
/// `workers` threads and merged in cell order.
std::vector<std::size_t> find_fully_labeled_exhaustive(const SimplexGrid& grid,
                                                       const Labeling& labeling,
                                                       unsigned workers = 1);

/// Door graph: one node per cell plus an outside node (id = cell count).
/// Cells are joined across facets labeled exactly {0..n-1}; such facets on
/// the boundary lie on the face opposite corner n and join the outside node.
struct DualGraph {
    std::size_t outside = 0;
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    std::vector<std::vector<std::size_t>> adjacency;

    std::size_t node_count() const noexcept { return adjacency.size(); }
    std::size_t degree(std::size_t node) const { return adjacency.at(node).size(); }
    std::vector<std::size_t> degrees() const;
    std::string to_dot() const;
};

DualGraph build_dual_graph(const SimplexGrid& grid, const Labeling& labeling);

/// Door-to-door walk from the outside node. Returns a fully labeled cell.
std::size_t find_fully_labeled_path(const SimplexGrid& grid, const Labeling& labeling);

/// True iff sum(degrees) == 2 * edge_count and the odd entries are even in number.
bool handshake_check(std::span<const std::size_t> degrees, std::size_t edge_count);

/// Labels a lattice vertex of the resolution-m grid; must be admissible.
using VertexLabeler = std::function<int(const LatticePoint&)>;

struct WalkResult {
    KuhnCell cell;
    std::vector<LatticePoint> vertices;  ///< Kuhn order.
    std::vector<int> labels;
    std::size_t pivots = 0;
};

/// Door-to-door walk on the implicit resolution-m grid, never materialized.
/// The outside node is expanded through the nested faces
/// {e_0} c F_1 c ... c F_{n-1}: the walk starts at corner 0, climbs a face
/// whenever it completes that face's labels, and drops back to the lower face
/// when it exits through it. Only vertices on the path are labeled.
WalkResult walk_to_fully_labeled(int n, std::int64_t m, const VertexLabeler& label,
                                 std::size_t max_pivots = 1'000'000'000);

}  // namespace sperner_fix
