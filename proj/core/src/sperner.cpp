#include "sperner_fix/sperner.hpp"

#include <algorithm>
#include <exception>
#include <sstream>
#include <thread>

#include "sperner_fix/errors.hpp"

namespace sperner_fix {

namespace {

using LabelMask = std::uint64_t;

LabelMask mask_of(const Labeling& labeling, std::span<const std::size_t> ids) {
    LabelMask mask = 0;
    for (auto id : ids) mask |= LabelMask{1} << labeling.labels[id];
    return mask;
}

LabelMask full_mask(int count) { return (LabelMask{1} << count) - 1; }

void require_admissible(const SimplexGrid& grid, const Labeling& labeling) {
    if (grid.dimension() >= 63) throw InvalidArgument("dimension too large for label masks");
    auto report = validate_labeling(grid, labeling);
    if (!report.admissible) {
        const auto& v = report.violations.front();
        throw InadmissibleLabeling("inadmissible labeling at vertex " + std::to_string(v.vertex) +
                                   ": " + v.rule);
    }
}

}  // namespace

std::vector<std::size_t> find_fully_labeled_exhaustive(const SimplexGrid& grid,
                                                       const Labeling& labeling,
                                                       unsigned workers) {
    require_admissible(grid, labeling);
    const auto& cells = grid.cells();
    const LabelMask target = full_mask(grid.dimension() + 1);
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(cells.size(), 1))));

    std::vector<std::vector<std::size_t>> partial(workers);
    auto scan = [&](unsigned w) {
        const std::size_t begin = cells.size() * w / workers;
        const std::size_t end = cells.size() * (w + 1) / workers;
        for (std::size_t c = begin; c < end; ++c)
            if (mask_of(labeling, cells[c].vertex_ids) == target) partial[w].push_back(c);
    };
    if (workers == 1) {
        scan(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(scan, w);
        for (auto& t : pool) t.join();
    }
    std::vector<std::size_t> found;
    for (auto& p : partial) found.insert(found.end(), p.begin(), p.end());
    return found;
}

std::vector<std::size_t> DualGraph::degrees() const {
    std::vector<std::size_t> out;
    out.reserve(adjacency.size());
    for (const auto& a : adjacency) out.push_back(a.size());
    return out;
}

std::string DualGraph::to_dot() const {
    std::ostringstream out;
    out << "graph dual {\n";
    out << "  " << outside << " [label=\"outside\", shape=box];\n";
    for (const auto& [a, b] : edges) out << "  " << a << " -- " << b << ";\n";
    out << "}\n";
    return out.str();
}

DualGraph build_dual_graph(const SimplexGrid& grid, const Labeling& labeling) {
    require_admissible(grid, labeling);
    const int n = grid.dimension();
    const auto& cells = grid.cells();
    const LabelMask door = full_mask(n);

    // (sorted facet, cell) for every door facet, grouped by facet.
    std::vector<std::pair<std::vector<std::size_t>, std::size_t>> doors;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        for (auto& facet : cell_facets(cells[c])) {
            if (mask_of(labeling, facet) != door) continue;
            std::sort(facet.begin(), facet.end());
            doors.emplace_back(std::move(facet), c);
        }
    }
    std::sort(doors.begin(), doors.end());

    DualGraph graph;
    graph.outside = cells.size();
    graph.adjacency.resize(cells.size() + 1);
    for (std::size_t i = 0; i < doors.size();) {
        std::size_t j = i;
        while (j < doors.size() && doors[j].first == doors[i].first) ++j;
        if (j - i == 2) {
            graph.edges.emplace_back(doors[i].second, doors[i + 1].second);
        } else if (j - i == 1) {
            for (auto id : doors[i].first) {
                if (grid.vertices()[id][static_cast<std::size_t>(n)] != 0)
                    throw InternalConsistency("boundary door off the face opposite corner n");
            }
            graph.edges.emplace_back(doors[i].second, graph.outside);
        } else {
            throw InternalConsistency("facet shared by more than two cells");
        }
        i = j;
    }
    std::sort(graph.edges.begin(), graph.edges.end());
    for (const auto& [a, b] : graph.edges) {
        graph.adjacency[a].push_back(b);
        graph.adjacency[b].push_back(a);
    }
    return graph;
}

std::size_t find_fully_labeled_path(const SimplexGrid& grid, const Labeling& labeling) {
    DualGraph graph = build_dual_graph(grid, labeling);
    const std::size_t outside = graph.outside;
    std::vector<bool> used(graph.edges.size(), false);

    auto edge_index = [&](std::size_t a, std::size_t b) {
        auto key = std::minmax(a, b);
        auto it = std::lower_bound(graph.edges.begin(), graph.edges.end(),
                                   std::pair<std::size_t, std::size_t>(key.first, key.second));
        return static_cast<std::size_t>(it - graph.edges.begin());
    };

    for (std::size_t start : graph.adjacency[outside]) {
        std::size_t e = edge_index(start, outside);
        if (used[e]) continue;
        used[e] = true;
        std::size_t current = start;
        while (true) {
            if (graph.degree(current) == 1) return current;
            std::size_t next = outside;
            bool moved = false;
            for (std::size_t nb : graph.adjacency[current]) {
                std::size_t idx = edge_index(current, nb);
                if (!used[idx]) {
                    used[idx] = true;
                    next = nb;
                    moved = true;
                    break;
                }
            }
            if (!moved) throw InternalConsistency("door walk stalled inside the simplex");
            if (next == outside) break;
            current = next;
        }
    }
    throw InternalConsistency("all outside doors exhausted without a fully labeled cell");
}

bool handshake_check(std::span<const std::size_t> degrees, std::size_t edge_count) {
    std::size_t sum = 0;
    std::size_t odd = 0;
    for (auto d : degrees) {
        sum += d;
        odd += d % 2;
    }
    return sum == 2 * edge_count && odd % 2 == 0;
}

WalkResult walk_to_fully_labeled(int n, std::int64_t m, const VertexLabeler& label,
                                 std::size_t max_pivots) {
    if (n == 0) throw TrivialDimension();
    if (n < 0 || m < 1) throw InvalidArgument("walk needs n >= 1 and m >= 1");

    auto label_of = [&](const std::vector<std::int64_t>& y, int level) {
        int l = label(kuhn::to_lattice(y, m, n));
        if (l < 0 || l > level)
            throw InadmissibleLabeling("label " + std::to_string(l) +
                                       " on a vertex of the face spanned by corners 0.." +
                                       std::to_string(level));
        return l;
    };

    WalkResult result;
    KuhnCell cell{{0}, {0}};
    int level = 1;
    std::vector<int> labels{label_of(cell.vertex(0), 1), label_of(cell.vertex(1), 1)};
    if (labels[0] != 0) throw InadmissibleLabeling("corner 0 must carry label 0");
    int fresh = 1;

    while (true) {
        const int l = labels[static_cast<std::size_t>(fresh)];
        if (l == level) {
            if (level == n) break;
            // Completed face F_level: enter the unique cell of F_{level+1} on it.
            cell.base.push_back(0);
            cell.perm.push_back(level);
            ++level;
            labels.push_back(label_of(cell.vertex(level), level));
            fresh = level;
            continue;
        }
        int out = -1;
        for (int j = 0; j <= level; ++j)
            if (j != fresh && labels[static_cast<std::size_t>(j)] == l) out = j;
        if (out < 0) throw InternalConsistency("entry facet is not a door");

        while (true) {
            if (++result.pivots > max_pivots)
                throw Error("walk exceeded the pivot budget of " + std::to_string(max_pivots));
            auto [next, added] = kuhn::pivot(cell, out);
            auto y = next.vertex(added);
            if (kuhn::in_region(y, m)) {
                if (out == 0) {
                    labels.erase(labels.begin());
                    labels.push_back(label_of(y, level));
                } else if (out == level) {
                    labels.pop_back();
                    labels.insert(labels.begin(), label_of(y, level));
                } else {
                    labels[static_cast<std::size_t>(out)] = label_of(y, level);
                }
                cell = std::move(next);
                fresh = added;
                break;
            }
            // Left through the boundary: the door lies on F_{level-1}, where it
            // is a completed cell; continue there through its other door.
            const auto axis = static_cast<std::size_t>(level - 1);
            if (out != level || cell.base[axis] != 0 || cell.perm[axis] != level - 1 || level == 1)
                throw InternalConsistency("door walk left the simplex off the lower face");
            cell.base.pop_back();
            cell.perm.pop_back();
            labels.pop_back();
            --level;
            out = static_cast<int>(std::find(labels.begin(), labels.end(), level) - labels.begin());
        }
    }

    result.cell = cell;
    result.labels = labels;
    for (int j = 0; j <= n; ++j) result.vertices.push_back(kuhn::to_lattice(cell.vertex(j), m, n));
    return result;
}

}  // namespace sperner_fix
