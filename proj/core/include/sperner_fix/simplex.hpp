#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

namespace sperner_fix {

/// Tolerance for barycentric sum and sign checks.
inline constexpr double kSumTolerance = 1e-12;

/// A point of the standard n-simplex: n+1 nonnegative weights summing to 1.
class BarycentricPoint {
public:
    BarycentricPoint() = default;

    /// Validates nonnegativity and the unit sum within `tolerance`.
    explicit BarycentricPoint(std::vector<double> coords, double tolerance = kSumTolerance);

    static BarycentricPoint corner(std::size_t n, std::size_t k);
    static BarycentricPoint barycenter(std::size_t n);

    std::size_t dimension() const noexcept { return coords_.empty() ? 0 : coords_.size() - 1; }
    std::size_t size() const noexcept { return coords_.size(); }
    std::span<const double> coords() const noexcept { return coords_; }
    double operator[](std::size_t i) const { return coords_[i]; }

    friend bool operator==(const BarycentricPoint&, const BarycentricPoint&) = default;

private:
    std::vector<double> coords_;
};

bool is_in_simplex(std::span<const double> coords, double tolerance = kSumTolerance);
double l1_distance(std::span<const double> a, std::span<const double> b);

/// Exact lattice vertex: numerators a_0..a_n with sum m.
using LatticePoint = std::vector<std::int64_t>;

struct LatticePointHash {
    std::size_t operator()(const LatticePoint& p) const noexcept;
};

BarycentricPoint lattice_to_point(const LatticePoint& numerators, std::int64_t m);

/// Kuhn cell of the Freudenthal triangulation, expressed in cumulative
/// coordinates y_i = a_i + ... + a_n (i = 1..k). Vertex j is
/// base + e_{perm[0]} + ... + e_{perm[j-1]}; `perm` holds 0-based axes.
struct KuhnCell {
    std::vector<std::int64_t> base;
    std::vector<int> perm;

    int dimension() const noexcept { return static_cast<int>(base.size()); }
    std::vector<std::int64_t> vertex(int j) const;

    friend bool operator==(const KuhnCell&, const KuhnCell&) = default;
};

namespace kuhn {

/// Region of the scaled k-simplex: m >= y_1 >= ... >= y_k >= 0.
bool in_region(std::span<const std::int64_t> y, std::int64_t m);

/// Barycentric numerators (padded to dimension n) of cumulative point y.
LatticePoint to_lattice(std::span<const std::int64_t> y, std::int64_t m, int n);
std::vector<std::int64_t> to_cumulative(const LatticePoint& numerators);

/// Replaces vertex `j`; returns the neighbour and the index of its new vertex.
/// The neighbour may leave the region; callers check with in_region.
std::pair<KuhnCell, int> pivot(const KuhnCell& cell, int j);

/// Cell of the resolution-m triangulation containing a barycentric point.
KuhnCell locate(std::span<const double> point, std::int64_t m);

/// Largest l1 distance between two vertices of one cell, times m, once m >= ceil(n/2).
std::int64_t mesh_numerator(int n);

}  // namespace kuhn

/// Grid mesh (maximum l1 vertex distance within a cell) at resolution m.
double grid_mesh(int n, std::int64_t m);

struct GridCell {
    std::vector<std::size_t> vertex_ids;  ///< In Kuhn order w_0..w_n.
    KuhnCell kuhn;
};

/// Edgewise subdivision of the n-simplex at resolution m; immutable once built.
class SimplexGrid {
public:
    SimplexGrid(int n, std::int64_t m, std::vector<LatticePoint> vertices,
                std::vector<GridCell> cells);

    int dimension() const noexcept { return n_; }
    std::int64_t resolution() const noexcept { return m_; }
    const std::vector<LatticePoint>& vertices() const noexcept { return vertices_; }
    const std::vector<GridCell>& cells() const noexcept { return cells_; }

    std::optional<std::size_t> find_vertex(const LatticePoint& p) const;
    BarycentricPoint vertex_coords(std::size_t id) const;
    double mesh() const { return grid_mesh(n_, m_); }

    bool is_corner(std::size_t id) const;

private:
    int n_;
    std::int64_t m_;
    std::vector<LatticePoint> vertices_;
    std::vector<GridCell> cells_;
    std::unordered_map<LatticePoint, std::size_t, LatticePointHash> index_;
};

/// Largest number of cells `subdivide` will materialize.
inline constexpr std::size_t kMaxMaterializedCells = 20'000'000;

SimplexGrid subdivide(int n, std::int64_t m);

BarycentricPoint vertex_coords(const SimplexGrid& grid, std::size_t id);

/// The n+1 facets of a cell; facet j omits vertex j.
std::vector<std::vector<std::size_t>> cell_facets(const GridCell& cell);

struct SelfMap;

/// Grid with vertices displaced inside their carrier faces.
struct PerturbedGrid {
    std::shared_ptr<const SimplexGrid> base;
    std::unordered_map<std::size_t, BarycentricPoint> displaced;
    double radius = 0.0;
    std::uint64_t seed = 0;

    BarycentricPoint position(std::size_t id) const;
};

inline double default_perturbation_radius(std::int64_t m) { return 1.0 / (4.0 * static_cast<double>(m)); }

/// Returns `vertex` itself when its residual already exceeds `tau_fix`, else a
/// point within `radius` (l1) in the same carrier face with residual > tau_fix.
/// A fixed corner is returned unchanged when f moves points near it along every
/// edge and inside the simplex: it is then an exact fixed point.
/// Sampling is seeded by (seed, vertex) so results do not depend on visiting order.
/// Throws NonConstancyViolation when `max_attempts` samples all fail.
BarycentricPoint perturb_vertex(const LatticePoint& vertex, std::int64_t m, const SelfMap& f,
                                double radius, double tau_fix, int max_attempts,
                                std::uint64_t seed);

PerturbedGrid perturb_grid(std::shared_ptr<const SimplexGrid> grid, const SelfMap& f,
                           double radius, double tau_fix, int max_attempts,
                           std::uint64_t seed = 0);

}  // namespace sperner_fix
