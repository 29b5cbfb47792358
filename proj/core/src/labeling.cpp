#include "sperner_fix/labeling.hpp"

#include <algorithm>
#include <exception>
#include <limits>
#include <optional>
#include <thread>

#include "sperner_fix/errors.hpp"

namespace sperner_fix {

int sperner_label(const BarycentricPoint& v, const BarycentricPoint& fv, double tau_fix,
                  double tau_cmp) {
    if (v.size() != fv.size()) throw InvalidArgument("point and image differ in dimension");
    auto vc = v.coords();
    if (l1_distance(vc, fv.coords()) <= tau_fix)
        throw ApproximateFixedPoint(std::vector<double>(vc.begin(), vc.end()));
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (v[k] > fv[k] + tau_cmp && v[k] > 0.0) return static_cast<int>(k);
    }
    // Both points sum to one, so this only happens when |v - fv| is at the
    // scale of tau_cmp: the vertex is a fixed point for all practical purposes.
    throw ApproximateFixedPoint(std::vector<double>(vc.begin(), vc.end()));
}

namespace {

struct VertexOutcome {
    int label = -1;
    bool fixed = false;
    BarycentricPoint point;
    double residual = 0.0;
};

template <typename PositionFn>
LabelGridResult label_vertices(std::size_t count, PositionFn position, const SelfMap& f,
                               double tau_fix, unsigned workers) {
    std::vector<VertexOutcome> outcomes(count);
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
    std::vector<std::exception_ptr> errors(workers);

    auto run = [&](unsigned w) {
        const std::size_t begin = count * w / workers;
        const std::size_t end = count * (w + 1) / workers;
        try {
            for (std::size_t id = begin; id < end; ++id) {
                VertexOutcome& out = outcomes[id];
                out.point = position(id);
                BarycentricPoint image = f(out.point);
                out.residual = l1_distance(image.coords(), out.point.coords());
                try {
                    out.label = sperner_label(out.point, image, tau_fix);
                } catch (const ApproximateFixedPoint&) {
                    out.fixed = true;
                }
            }
        } catch (...) {
            errors[w] = std::current_exception();
        }
    };

    if (workers == 1) {
        run(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    for (std::size_t id = 0; id < count; ++id) {
        if (outcomes[id].fixed)
            return EarlyFixedPoint{id, outcomes[id].point, outcomes[id].residual};
    }
    Labeling labeling;
    labeling.provenance = Provenance::function_induced;
    labeling.labels.reserve(count);
    for (const auto& o : outcomes) labeling.labels.push_back(o.label);
    return labeling;
}

}  // namespace

LabelGridResult label_grid(const SimplexGrid& grid, const SelfMap& f, double tau_fix,
                           unsigned workers) {
    return label_vertices(
        grid.vertices().size(), [&](std::size_t id) { return grid.vertex_coords(id); }, f,
        tau_fix, workers);
}

LabelGridResult label_grid(const PerturbedGrid& grid, const SelfMap& f, double tau_fix,
                           unsigned workers) {
    return label_vertices(
        grid.base->vertices().size(), [&](std::size_t id) { return grid.position(id); }, f,
        tau_fix, workers);
}

LabelingReport validate_labeling(const SimplexGrid& grid, const Labeling& labeling) {
    const auto& vertices = grid.vertices();
    if (labeling.labels.size() != vertices.size())
        throw IncompleteLabeling("labeling covers " + std::to_string(labeling.labels.size()) +
                                 " of " + std::to_string(vertices.size()) + " vertices");
    const int n = grid.dimension();
    const std::int64_t m = grid.resolution();
    LabelingReport report;
    for (std::size_t id = 0; id < vertices.size(); ++id) {
        const int label = labeling.labels[id];
        if (label < 0) throw IncompleteLabeling("vertex " + std::to_string(id) + " is unlabeled");
        const auto& a = vertices[id];
        if (label > n) {
            report.violations.push_back({id, "rule (4): label outside 0..n"});
            continue;
        }
        auto corner = std::find(a.begin(), a.end(), m);
        if (corner != a.end()) {
            if (label != static_cast<int>(corner - a.begin()))
                report.violations.push_back({id, "rule (1): corner k must carry label k"});
            continue;
        }
        if (a[static_cast<std::size_t>(label)] == 0)
            report.violations.push_back({id, "rules (2)/(3): label of a vertex outside its face"});
    }
    report.admissible = report.violations.empty();
    return report;
}

std::vector<int> admissible_labels(const LatticePoint& vertex) {
    std::vector<int> out;
    for (std::size_t i = 0; i < vertex.size(); ++i)
        if (vertex[i] > 0) out.push_back(static_cast<int>(i));
    return out;
}

Labeling random_admissible_labeling(const SimplexGrid& grid, std::mt19937_64& rng) {
    Labeling labeling;
    labeling.labels.reserve(grid.vertices().size());
    for (const auto& v : grid.vertices()) {
        auto options = admissible_labels(v);
        std::uniform_int_distribution<std::size_t> pick(0, options.size() - 1);
        labeling.labels.push_back(options[pick(rng)]);
    }
    return labeling;
}

std::size_t count_admissible_labelings(const SimplexGrid& grid) {
    std::size_t total = 1;
    for (const auto& v : grid.vertices()) {
        const std::size_t k = admissible_labels(v).size();
        if (total > std::numeric_limits<std::size_t>::max() / k)
            return std::numeric_limits<std::size_t>::max();
        total *= k;
    }
    return total;
}

void for_each_admissible_labeling(const SimplexGrid& grid,
                                  const std::function<bool(const Labeling&)>& visit) {
    const auto& vertices = grid.vertices();
    std::vector<std::vector<int>> options;
    options.reserve(vertices.size());
    for (const auto& v : vertices) options.push_back(admissible_labels(v));

    std::vector<std::size_t> digit(vertices.size(), 0);
    Labeling labeling;
    labeling.labels.resize(vertices.size());
    for (std::size_t i = 0; i < vertices.size(); ++i) labeling.labels[i] = options[i][0];
    while (true) {
        if (!visit(labeling)) return;
        std::size_t i = 0;
        for (; i < vertices.size(); ++i) {
            if (++digit[i] < options[i].size()) {
                labeling.labels[i] = options[i][digit[i]];
                break;
            }
            digit[i] = 0;
            labeling.labels[i] = options[i][0];
        }
        if (i == vertices.size()) return;
    }
}

}  // namespace sperner_fix
