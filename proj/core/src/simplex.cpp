#include "sperner_fix/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "sperner_fix/errors.hpp"
#include "sperner_fix/self_map.hpp"

namespace sperner_fix {

namespace {

std::string describe(std::span<const double> coords) {
    std::ostringstream out;
    out << '(';
    for (std::size_t i = 0; i < coords.size(); ++i) {
        if (i) out << ", ";
        out << coords[i];
    }
    out << ')';
    return out.str();
}

std::string describe(const LatticePoint& p) {
    std::ostringstream out;
    out << '[';
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (i) out << ", ";
        out << p[i];
    }
    out << ']';
    return out.str();
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Weakly decreasing sequences in [0, m-1]: candidate Kuhn bases.
void enumerate_bases(int n, std::int64_t m, std::vector<std::int64_t>& current,
                     std::vector<std::vector<std::int64_t>>& out) {
    if (static_cast<int>(current.size()) == n) {
        out.push_back(current);
        return;
    }
    const std::int64_t upper = current.empty() ? m - 1 : current.back();
    for (std::int64_t v = upper; v >= 0; --v) {
        current.push_back(v);
        enumerate_bases(n, m, current, out);
        current.pop_back();
    }
}

// Compositions of m into n+1 parts in descending lexicographic order.
void enumerate_lattice(int n, std::int64_t remaining, LatticePoint& current,
                       std::vector<LatticePoint>& out) {
    if (static_cast<int>(current.size()) == n) {
        current.push_back(remaining);
        out.push_back(current);
        current.pop_back();
        return;
    }
    for (std::int64_t v = remaining; v >= 0; --v) {
        current.push_back(v);
        enumerate_lattice(n, remaining - v, current, out);
        current.pop_back();
    }
}

}  // namespace

BarycentricPoint::BarycentricPoint(std::vector<double> coords, double tolerance)
    : coords_(std::move(coords)) {
    if (coords_.empty()) throw InvalidArgument("barycentric point needs at least one coordinate");
    if (!is_in_simplex(coords_, tolerance))
        throw InvalidArgument("not a barycentric point: " + describe(coords_));
}

BarycentricPoint BarycentricPoint::corner(std::size_t n, std::size_t k) {
    if (k > n) throw IndexError("corner index out of range");
    std::vector<double> c(n + 1, 0.0);
    c[k] = 1.0;
    return BarycentricPoint(std::move(c));
}

BarycentricPoint BarycentricPoint::barycenter(std::size_t n) {
    return BarycentricPoint(std::vector<double>(n + 1, 1.0 / static_cast<double>(n + 1)));
}

bool is_in_simplex(std::span<const double> coords, double tolerance) {
    if (coords.empty()) return false;
    double sum = 0.0;
    for (double c : coords) {
        if (!std::isfinite(c) || c < -tolerance) return false;
        sum += c;
    }
    return std::abs(sum - 1.0) <= tolerance;
}

double l1_distance(std::span<const double> a, std::span<const double> b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
    return d;
}

std::size_t LatticePointHash::operator()(const LatticePoint& p) const noexcept {
    std::uint64_t h = 0x84222325cbf29ce4ULL;
    for (auto v : p) h = splitmix64(h ^ static_cast<std::uint64_t>(v));
    return static_cast<std::size_t>(h);
}

BarycentricPoint lattice_to_point(const LatticePoint& numerators, std::int64_t m) {
    std::vector<double> c(numerators.size());
    const double md = static_cast<double>(m);
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = static_cast<double>(numerators[i]) / md;
    return BarycentricPoint(std::move(c));
}

std::vector<std::int64_t> KuhnCell::vertex(int j) const {
    std::vector<std::int64_t> y = base;
    for (int t = 0; t < j; ++t) ++y[static_cast<std::size_t>(perm[static_cast<std::size_t>(t)])];
    return y;
}

namespace kuhn {

bool in_region(std::span<const std::int64_t> y, std::int64_t m) {
    std::int64_t upper = m;
    for (auto v : y) {
        if (v > upper) return false;
        upper = v;
    }
    return y.empty() || y.back() >= 0;
}

LatticePoint to_lattice(std::span<const std::int64_t> y, std::int64_t m, int n) {
    LatticePoint a(static_cast<std::size_t>(n) + 1, 0);
    const std::size_t k = y.size();
    if (k == 0) {
        a[0] = m;
        return a;
    }
    a[0] = m - y[0];
    for (std::size_t i = 1; i < k; ++i) a[i] = y[i - 1] - y[i];
    a[k] = y[k - 1];
    return a;
}

std::vector<std::int64_t> to_cumulative(const LatticePoint& numerators) {
    const std::size_t n = numerators.size() - 1;
    std::vector<std::int64_t> y(n, 0);
    std::int64_t acc = 0;
    for (std::size_t i = n; i >= 1; --i) {
        acc += numerators[i];
        y[i - 1] = acc;
    }
    return y;
}

std::pair<KuhnCell, int> pivot(const KuhnCell& cell, int j) {
    const int k = cell.dimension();
    KuhnCell next = cell;
    if (j == 0) {
        ++next.base[static_cast<std::size_t>(cell.perm.front())];
        std::rotate(next.perm.begin(), next.perm.begin() + 1, next.perm.end());
        return {std::move(next), k};
    }
    if (j == k) {
        --next.base[static_cast<std::size_t>(cell.perm.back())];
        std::rotate(next.perm.rbegin(), next.perm.rbegin() + 1, next.perm.rend());
        return {std::move(next), 0};
    }
    std::swap(next.perm[static_cast<std::size_t>(j) - 1], next.perm[static_cast<std::size_t>(j)]);
    return {std::move(next), j};
}

KuhnCell locate(std::span<const double> point, std::int64_t m) {
    const std::size_t n = point.size() - 1;
    std::vector<double> y(n);
    double acc = 0.0;
    for (std::size_t i = n; i >= 1; --i) {
        acc += point[i];
        y[i - 1] = acc * static_cast<double>(m);
    }
    KuhnCell cell;
    cell.base.resize(n);
    std::vector<double> frac(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto b = static_cast<std::int64_t>(std::floor(y[i]));
        b = std::clamp<std::int64_t>(b, 0, m - 1);
        cell.base[i] = b;
        frac[i] = y[i] - static_cast<double>(b);
    }
    cell.perm.resize(n);
    std::iota(cell.perm.begin(), cell.perm.end(), 0);
    std::stable_sort(cell.perm.begin(), cell.perm.end(),
                     [&](int a, int b) { return frac[static_cast<std::size_t>(a)] > frac[static_cast<std::size_t>(b)]; });
    for (int j = 0; j <= static_cast<int>(n); ++j) {
        if (!in_region(cell.vertex(j), m))
            throw InvalidArgument("point lies outside the simplex: " + describe(point));
    }
    return cell;
}

std::int64_t mesh_numerator(int n) {
    if (n < 1) return 0;
    return 2 * ((n + 1) / 2);
}

}  // namespace kuhn

double grid_mesh(int n, std::int64_t m) {
    return std::min(2.0, static_cast<double>(kuhn::mesh_numerator(n)) / static_cast<double>(m));
}

SimplexGrid::SimplexGrid(int n, std::int64_t m, std::vector<LatticePoint> vertices,
                         std::vector<GridCell> cells)
    : n_(n), m_(m), vertices_(std::move(vertices)), cells_(std::move(cells)) {
    index_.reserve(vertices_.size());
    for (std::size_t i = 0; i < vertices_.size(); ++i) index_.emplace(vertices_[i], i);
}

std::optional<std::size_t> SimplexGrid::find_vertex(const LatticePoint& p) const {
    auto it = index_.find(p);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

BarycentricPoint SimplexGrid::vertex_coords(std::size_t id) const {
    if (id >= vertices_.size())
        throw IndexError("vertex id " + std::to_string(id) + " out of range");
    return lattice_to_point(vertices_[id], m_);
}

bool SimplexGrid::is_corner(std::size_t id) const {
    const auto& a = vertices_.at(id);
    return std::count(a.begin(), a.end(), m_) == 1;
}

SimplexGrid subdivide(int n, std::int64_t m) {
    if (n == 0) throw TrivialDimension();
    if (n < 0) throw InvalidArgument("dimension must be positive");
    if (m < 1) throw InvalidArgument("resolution must be positive");
    double expected = std::pow(static_cast<double>(m), n);
    if (expected > static_cast<double>(kMaxMaterializedCells))
        throw InvalidArgument("grid too large to materialize: " + std::to_string(m) + "^" +
                              std::to_string(n) + " cells");

    std::vector<LatticePoint> vertices;
    LatticePoint scratch;
    enumerate_lattice(n, m, scratch, vertices);
    std::unordered_map<LatticePoint, std::size_t, LatticePointHash> index;
    index.reserve(vertices.size());
    for (std::size_t i = 0; i < vertices.size(); ++i) index.emplace(vertices[i], i);

    std::vector<std::vector<std::int64_t>> bases;
    std::vector<std::int64_t> current;
    enumerate_bases(n, m, current, bases);

    std::vector<GridCell> cells;
    cells.reserve(static_cast<std::size_t>(expected));
    std::vector<int> perm(static_cast<std::size_t>(n));
    for (const auto& base : bases) {
        std::iota(perm.begin(), perm.end(), 0);
        do {
            std::vector<std::int64_t> y = base;
            bool inside = true;
            for (int j = 0; j < n && inside; ++j) {
                ++y[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])];
                inside = kuhn::in_region(y, m);
            }
            if (!inside) continue;
            GridCell cell;
            cell.kuhn = KuhnCell{base, perm};
            cell.vertex_ids.reserve(static_cast<std::size_t>(n) + 1);
            for (int j = 0; j <= n; ++j)
                cell.vertex_ids.push_back(index.at(kuhn::to_lattice(cell.kuhn.vertex(j), m, n)));
            cells.push_back(std::move(cell));
        } while (std::next_permutation(perm.begin(), perm.end()));
    }
    if (cells.size() != static_cast<std::size_t>(expected))
        throw InternalConsistency("subdivision produced " + std::to_string(cells.size()) +
                                  " cells, expected m^n");

    std::vector<std::vector<std::size_t>> keys(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
        keys[i] = cells[i].vertex_ids;
        std::sort(keys[i].begin(), keys[i].end());
    }
    std::vector<std::size_t> order(cells.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
    std::vector<GridCell> sorted;
    sorted.reserve(cells.size());
    for (auto i : order) sorted.push_back(std::move(cells[i]));

    return SimplexGrid(n, m, std::move(vertices), std::move(sorted));
}

BarycentricPoint vertex_coords(const SimplexGrid& grid, std::size_t id) {
    return grid.vertex_coords(id);
}

std::vector<std::vector<std::size_t>> cell_facets(const GridCell& cell) {
    std::vector<std::vector<std::size_t>> facets;
    facets.reserve(cell.vertex_ids.size());
    for (std::size_t skip = 0; skip < cell.vertex_ids.size(); ++skip) {
        std::vector<std::size_t> facet;
        facet.reserve(cell.vertex_ids.size() - 1);
        for (std::size_t j = 0; j < cell.vertex_ids.size(); ++j)
            if (j != skip) facet.push_back(cell.vertex_ids[j]);
        facets.push_back(std::move(facet));
    }
    return facets;
}

BarycentricPoint PerturbedGrid::position(std::size_t id) const {
    if (auto it = displaced.find(id); it != displaced.end()) return it->second;
    return base->vertex_coords(id);
}

BarycentricPoint perturb_vertex(const LatticePoint& vertex, std::int64_t m, const SelfMap& f,
                                double radius, double tau_fix, int max_attempts,
                                std::uint64_t seed) {
    BarycentricPoint origin = lattice_to_point(vertex, m);
    if (residual(f, origin) > tau_fix) return origin;

    std::vector<std::size_t> support;
    for (std::size_t i = 0; i < vertex.size(); ++i)
        if (vertex[i] > 0) support.push_back(i);
    const std::string where = "non-constancy violation at vertex " + describe(vertex) + "/" +
                              std::to_string(m);
    std::mt19937_64 rng(splitmix64(seed ^ LatticePointHash{}(vertex)));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (support.size() < 2) {
        const std::size_t k = support.front();
        auto moves = [&](std::vector<double> p) { return residual(f, BarycentricPoint(std::move(p))) > tau_fix; };
        for (std::size_t j = 0; j < vertex.size(); ++j) {
            if (j == k) continue;
            bool moved = false;
            for (int attempt = 0; attempt < max_attempts && !moved; ++attempt) {
                const double t = 0.5 * radius * (1.0 - unit(rng));
                std::vector<double> p(vertex.size(), 0.0);
                p[k] = 1.0 - t;
                p[j] = t;
                moved = moves(std::move(p));
            }
            if (!moved)
                throw NonConstancyViolation(vertex, where + ": fixed along the edge to corner " +
                                                        std::to_string(j));
        }
        bool moved = vertex.size() == 2;
        std::gamma_distribution<double> expo(1.0, 1.0);
        for (int attempt = 0; attempt < max_attempts && !moved; ++attempt) {
            const double t = 0.5 * radius * (1.0 - unit(rng));
            std::vector<double> w(vertex.size());
            double total = 0.0;
            for (std::size_t j = 0; j < w.size(); ++j)
                if (j != k) total += (w[j] = expo(rng) + 1e-12);
            std::vector<double> p(vertex.size());
            for (std::size_t j = 0; j < p.size(); ++j) p[j] = j == k ? 1.0 - t : t * w[j] / total;
            moved = moves(std::move(p));
        }
        if (!moved) throw NonConstancyViolation(vertex, where + ": fixed on a neighbourhood of the corner");
        return origin;
    }

    std::vector<double> step(vertex.size(), 0.0);
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        double mean = 0.0;
        for (auto i : support) {
            step[i] = 2.0 * unit(rng) - 1.0;
            mean += step[i];
        }
        mean /= static_cast<double>(support.size());
        double norm = 0.0;
        for (auto i : support) {
            step[i] -= mean;
            norm += std::abs(step[i]);
        }
        const double length = radius * unit(rng);
        if (norm <= 0.0 || length <= 0.0) continue;

        std::vector<double> candidate(origin.coords().begin(), origin.coords().end());
        bool interior = true;
        for (auto i : support) {
            candidate[i] += step[i] * length / norm;
            interior = interior && candidate[i] > 0.0;
        }
        if (!interior) continue;
        BarycentricPoint p(std::move(candidate));
        if (residual(f, p) > tau_fix) return p;
    }
    throw NonConstancyViolation(vertex, where + ": no nearby point with f(v) != v");
}

PerturbedGrid perturb_grid(std::shared_ptr<const SimplexGrid> grid, const SelfMap& f,
                           double radius, double tau_fix, int max_attempts, std::uint64_t seed) {
    const std::int64_t m = grid->resolution();
    if (!(radius > 0.0) || radius >= 1.0 / (2.0 * static_cast<double>(m)))
        throw InvalidArgument("perturbation radius must lie in (0, 1/(2m))");
    PerturbedGrid out;
    out.radius = radius;
    out.seed = seed;
    for (std::size_t id = 0; id < grid->vertices().size(); ++id) {
        const auto& v = grid->vertices()[id];
        BarycentricPoint p = perturb_vertex(v, m, f, radius, tau_fix, max_attempts, seed);
        if (p != lattice_to_point(v, m)) out.displaced.emplace(id, std::move(p));
    }
    out.base = std::move(grid);
    return out;
}

}  // namespace sperner_fix
