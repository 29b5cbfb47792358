#include "sperner_fix/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <random>
#include <sstream>
#include <unordered_map>

#include "sperner_fix/errors.hpp"
#include "sperner_fix/sperner.hpp"

namespace sperner_fix {

std::string to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::converged: return "converged";
        case SolveStatus::early_vertex_hit: return "early_vertex_hit";
        case SolveStatus::non_constancy_violation: return "non_constancy_violation";
    }
    return "unknown";
}

std::string to_string(SearchMode mode) {
    return mode == SearchMode::path ? "path" : "exhaustive";
}

std::int64_t required_resolution(const std::optional<Modulus>& modulus, int n, double eps,
                                 double perturbation_allowance) {
    if (!modulus) throw ModulusRequired();
    if (n < 1) throw InvalidArgument("required_resolution needs n >= 1");
    if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
    const double share = eps / (2.0 * n * (n + 1.0));
    const double delta = (*modulus)(share);
    if (!(delta > 0.0)) throw InvalidArgument("modulus returned a non-positive delta");
    const double bound = std::min(delta, share);
    const double numerator = static_cast<double>(kuhn::mesh_numerator(n)) + perturbation_allowance;

    const double estimate = std::floor(numerator / bound) + 1.0;
    if (estimate > 4e18) return std::numeric_limits<std::int64_t>::max();
    auto m = static_cast<std::int64_t>(estimate);
    auto mesh = [&](std::int64_t r) { return numerator / static_cast<double>(r); };
    while (m > 1 && mesh(m - 1) < bound) --m;
    while (!(mesh(m) < bound)) ++m;
    return m;
}

ExtractionBounds check_extraction_bounds(const BarycentricPoint& v, const BarycentricPoint& fv,
                                         double eps) {
    const auto n = static_cast<double>(v.dimension());
    ExtractionBounds b;
    b.coordinate0_gap = std::abs(v[0] - fv[0]);
    b.coordinate0_bound = eps / (n + 1.0);
    // The (n-1) factor degenerates to 0 at n = 1, where the same derivation
    // gives eps / 2; max(1, n-1) covers both.
    b.other_bound = std::max(1.0, n - 1.0) * eps / (n * (n + 1.0));
    for (std::size_t k = 1; k < v.size(); ++k)
        b.max_other_gap = std::max(b.max_other_gap, std::abs(v[k] - fv[k]));
    b.residual = l1_distance(v.coords(), fv.coords());
    b.holds = b.coordinate0_gap < b.coordinate0_bound && b.max_other_gap < b.other_bound &&
              b.residual < eps;
    return b;
}

namespace {

std::string describe_bounds(const ExtractionBounds& b) {
    std::ostringstream out;
    out << "mesh insufficiency: |v0 - f0| = " << b.coordinate0_gap << " (bound "
        << b.coordinate0_bound << "), max other gap = " << b.max_other_gap << " (bound "
        << b.other_bound << "), residual = " << b.residual;
    return out.str();
}

template <typename PositionFn>
BarycentricPoint extract_from_cell(const SimplexGrid& grid, const Labeling& labeling,
                                   const SelfMap& f, std::size_t cell, double eps,
                                   PositionFn position) {
    const auto& ids = grid.cells().at(cell).vertex_ids;
    std::uint64_t mask = 0;
    std::size_t zero = ids.front();
    for (auto id : ids) {
        const int l = labeling.labels.at(id);
        mask |= std::uint64_t{1} << l;
        if (l == 0) zero = id;
    }
    if (mask != (std::uint64_t{1} << ids.size()) - 1)
        throw InvalidArgument("cell " + std::to_string(cell) + " is not fully labeled");
    BarycentricPoint v = position(zero);
    auto bounds = check_extraction_bounds(v, f(v), eps);
    if (!bounds.holds) throw MeshInsufficiency(describe_bounds(bounds));
    return v;
}

struct EarlyHit {
    BarycentricPoint point;
    double residual;
};

struct LevelOutcome {
    BarycentricPoint point;
    double residual = 0.0;
    bool early = false;
    std::size_t pivots = 0;
};

class PathLevel {
public:
    PathLevel(const SelfMap& f, int n, std::int64_t m, double tau_fix, const SolverConfig& config)
        : f_(f), n_(n), m_(m), tau_fix_(tau_fix), config_(config),
          radius_(config.perturbation_scale / static_cast<double>(m)) {}

    int label(const LatticePoint& a) {
        if (auto it = cache_.find(a); it != cache_.end()) return it->second.label;
        BarycentricPoint pos = lattice_to_point(a, m_);
        BarycentricPoint image = f_(pos);
        if (l1_distance(image.coords(), pos.coords()) <= config_.tau_nonconstant) {
            pos = perturb_vertex(a, m_, f_, radius_, config_.tau_nonconstant,
                                 config_.max_attempts, config_.seed);
            image = f_(pos);
        }
        const double r = l1_distance(image.coords(), pos.coords());
        if (r <= tau_fix_) throw EarlyHit{pos, r};
        int l = 0;
        try {
            l = sperner_label(pos, image, tau_fix_);
        } catch (const ApproximateFixedPoint&) {
            throw EarlyHit{pos, r};
        }
        cache_.emplace(a, Entry{std::move(pos), l});
        return l;
    }

    LevelOutcome run(const std::optional<BarycentricPoint>& previous) {
        try {
            if (previous) {
                KuhnCell near = kuhn::locate(previous->coords(), m_);
                for (int j = 0; j <= n_; ++j) label(kuhn::to_lattice(near.vertex(j), m_, n_));
            }
            auto walk = walk_to_fully_labeled(
                n_, m_, [this](const LatticePoint& a) { return label(a); }, config_.max_pivots);
            auto zero = std::find(walk.labels.begin(), walk.labels.end(), 0) - walk.labels.begin();
            const BarycentricPoint& v = cache_.at(walk.vertices[static_cast<std::size_t>(zero)]).position;
            return {v, 0.0, false, walk.pivots};
        } catch (EarlyHit& hit) {
            return {std::move(hit.point), hit.residual, true, 0};
        }
    }

private:
    struct Entry {
        BarycentricPoint position;
        int label;
    };

    const SelfMap& f_;
    int n_;
    std::int64_t m_;
    double tau_fix_;
    const SolverConfig& config_;
    double radius_;
    std::unordered_map<LatticePoint, Entry, LatticePointHash> cache_;
};

LevelOutcome run_exhaustive_level(const SelfMap& f, int n, std::int64_t m, double tau_fix,
                                  double eps, const SolverConfig& config) {
    auto grid = std::make_shared<const SimplexGrid>(subdivide(n, m));
    PerturbedGrid perturbed =
        perturb_grid(grid, f, config.perturbation_scale / static_cast<double>(m),
                     config.tau_nonconstant, config.max_attempts, config.seed);
    auto labeled = label_grid(perturbed, f, tau_fix, config.workers);
    if (auto* early = std::get_if<EarlyFixedPoint>(&labeled))
        return {early->point, early->residual, true, 0};
    const auto& labeling = std::get<Labeling>(labeled);
    auto cells = find_fully_labeled_exhaustive(*grid, labeling, config.workers);
    if (cells.empty() || cells.size() % 2 == 0)
        throw InternalConsistency("even number of fully labeled cells");
    BarycentricPoint v = extract_approximation(perturbed, labeling, f, cells.front(), eps);
    return {v, 0.0, false, grid->cells().size()};
}

}  // namespace

BarycentricPoint extract_approximation(const SimplexGrid& grid, const Labeling& labeling,
                                       const SelfMap& f, std::size_t cell, double eps) {
    return extract_from_cell(grid, labeling, f, cell, eps,
                             [&](std::size_t id) { return grid.vertex_coords(id); });
}

BarycentricPoint extract_approximation(const PerturbedGrid& grid, const Labeling& labeling,
                                       const SelfMap& f, std::size_t cell, double eps) {
    return extract_from_cell(*grid.base, labeling, f, cell, eps,
                             [&](std::size_t id) { return grid.position(id); });
}

FixedPointResult solve(const SelfMap& f, double eps_target, const SolverConfig& config) {
    if (!(eps_target > 0.0)) throw InvalidArgument("eps_target must be positive");
    if (!(config.perturbation_scale > 0.0) || config.perturbation_scale >= 0.5)
        throw InvalidArgument("perturbation_scale must lie in (0, 1/2)");
    const int n = static_cast<int>(f.dimension);
    FixedPointResult result;

    if (n == 0) {
        result.point = BarycentricPoint({1.0});
        result.residual = residual(f, result.point);
        result.resolution = 1;
        result.trace.push_back({eps_target, result.point, result.residual, 1, true, 0});
        result.status = SolveStatus::early_vertex_hit;
        return result;
    }

    std::optional<Modulus> modulus = f.modulus;
    result.modulus_estimated = f.modulus_estimated;
    if (!modulus) {
        auto estimate = estimate_modulus(f, config.modulus_samples, config.seed);
        modulus = estimate.modulus;
        result.modulus_estimated = true;
        result.lipschitz_estimate = estimate.lipschitz;
    }

    std::optional<BarycentricPoint> previous;
    double eps = std::max(config.epsilon0, eps_target);
    for (int level = 0;; ++level) {
        const std::int64_t m =
            required_resolution(modulus, n, eps, 2.0 * config.perturbation_scale);
        if (m > config.max_resolution) throw ResolutionCap(m, config.max_resolution);
        const double tau_fix = config.tau_fix.value_or(eps / 4.0);

        LevelOutcome outcome;
        try {
            if (config.search == SearchMode::exhaustive) {
                outcome = run_exhaustive_level(f, n, m, tau_fix, eps, config);
            } else {
                PathLevel path(f, n, m, tau_fix, config);
                outcome = path.run(config.warm_start ? previous : std::nullopt);
                if (!outcome.early) {
                    auto bounds = check_extraction_bounds(outcome.point, f(outcome.point), eps);
                    if (!bounds.holds) throw MeshInsufficiency(describe_bounds(bounds));
                }
            }
        } catch (const NonConstancyViolation& violation) {
            result.status = SolveStatus::non_constancy_violation;
            result.message = violation.what();
            result.violating_vertex = violation.vertex();
            result.resolution = m;
            result.point = lattice_to_point(violation.vertex(), m);
            result.residual = residual(f, result.point);
            return result;
        }

        RefinementStep step;
        step.epsilon = eps;
        step.point = outcome.point;
        step.residual = residual(f, outcome.point);
        step.resolution = m;
        step.early_hit = outcome.early;
        step.pivots = outcome.pivots;
        result.trace.push_back(step);
        previous = outcome.point;

        if (eps <= eps_target) break;
        eps = std::max(config.epsilon0 * std::ldexp(1.0, -(level + 1)), eps_target);
    }

    const RefinementStep& last = result.trace.back();
    result.point = last.point;
    result.residual = residual(f, result.point);
    result.resolution = last.resolution;
    result.status = last.early_hit ? SolveStatus::early_vertex_hit : SolveStatus::converged;
    if (!(result.residual < eps_target))
        throw InternalConsistency("final residual does not meet the target");
    return result;
}

ModulusEstimate estimate_modulus(const SelfMap& f, int samples, std::uint64_t seed) {
    if (samples < 2) throw InvalidArgument("estimate_modulus needs at least two samples");
    const std::size_t dim = f.dimension + 1;
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> expo(1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> axis(0, dim - 1);

    std::vector<BarycentricPoint> points;
    std::vector<BarycentricPoint> images;
    points.reserve(static_cast<std::size_t>(samples));
    for (int s = 0; s < samples; ++s) {
        std::vector<double> c(dim);
        double sum = 0.0;
        for (auto& x : c) sum += (x = expo(rng));
        for (auto& x : c) x /= sum;
        points.emplace_back(std::move(c), 1e-12);
        images.push_back(f(points.back()));
    }

    double best = 0.0;
    bool any = false;
    auto consider = [&](const BarycentricPoint& a, const BarycentricPoint& fa,
                        const BarycentricPoint& b, const BarycentricPoint& fb) {
        const double d = l1_distance(a.coords(), b.coords());
        if (d <= 0.0) return;
        any = true;
        best = std::max(best, l1_distance(fa.coords(), fb.coords()) / d);
    };

    for (std::size_t i = 0; i < points.size(); ++i) {
        const std::size_t j = (i + 1) % points.size();
        consider(points[i], images[i], points[j], images[j]);
        if (dim < 2) continue;
        // Short step along an edge direction e_a - e_b.
        const std::size_t a = axis(rng);
        std::size_t b = axis(rng);
        if (a == b) b = (b + 1) % dim;
        const double h = std::min(1e-3, points[i][b]) * (0.5 + 0.5 * unit(rng));
        if (h <= 0.0) continue;
        std::vector<double> c(points[i].coords().begin(), points[i].coords().end());
        c[a] += h;
        c[b] -= h;
        BarycentricPoint q(std::move(c), 1e-12);
        consider(points[i], images[i], q, f(q));
    }
    if (!any) throw DegenerateSampling("all sampled pairs coincide");

    ModulusEstimate estimate;
    estimate.lipschitz = best;
    const double scaled = estimate.safety_factor * best;
    estimate.modulus = [scaled](double eps) {
        return scaled > 0.0 ? std::min(eps / scaled, 2.0) : 2.0;
    };
    return estimate;
}

namespace {

void lattice_points(int n, std::int64_t remaining, LatticePoint& current,
                    std::vector<LatticePoint>& out) {
    if (static_cast<int>(current.size()) == n) {
        current.push_back(remaining);
        out.push_back(current);
        current.pop_back();
        return;
    }
    for (std::int64_t v = remaining; v >= 0; --v) {
        current.push_back(v);
        lattice_points(n, remaining - v, current, out);
        current.pop_back();
    }
}

}  // namespace

SlncReport slnc_diagnostic(const SelfMap& f, double eps_bar, int sequences_per_ball,
                           int sequence_length, std::uint64_t seed) {
    if (!(eps_bar > 0.0)) throw InvalidArgument("eps_bar must be positive");
    const int n = static_cast<int>(f.dimension);
    const std::size_t dim = f.dimension + 1;
    SlncReport report;
    report.epsilon = eps_bar / 2.0;
    const double eps = report.epsilon;
    // Largest-remainder rounding moves a point by less than (n+1)/r in l1.
    report.net_resolution = static_cast<std::int64_t>(std::ceil((n + 1) / eps));

    std::vector<LatticePoint> net;
    LatticePoint scratch;
    lattice_points(n, report.net_resolution, scratch, net);

    constexpr int kThresholds = 5;
    constexpr double kSpreadFraction = 0.1;
    std::vector<double> thresholds;
    for (int k = 1; k <= kThresholds; ++k) thresholds.push_back(eps * std::pow(10.0, -k));

    for (std::size_t b = 0; b < net.size(); ++b) {
        BallReport ball;
        ball.center = lattice_to_point(net[b], report.net_resolution);
        ball.thresholds = thresholds;
        const auto center = ball.center.coords();
        std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + b);
        std::uniform_real_distribution<double> unit(0.0, 1.0);

        auto inside = [&](std::span<const double> x) {
            for (double c : x)
                if (c < 0.0) return false;
            return l1_distance(x, center) < eps;
        };
        auto res = [&](std::span<const double> x) {
            BarycentricPoint p(std::vector<double>(x.begin(), x.end()), 1e-9);
            return residual(f, p);
        };

        std::vector<std::vector<double>> starts{std::vector<double>(center.begin(), center.end())};
        while (static_cast<int>(starts.size()) < sequences_per_ball) {
            std::vector<double> candidate(center.begin(), center.end());
            for (int attempt = 0; attempt < 100; ++attempt) {
                std::vector<double> d(dim);
                double mean = 0.0;
                for (auto& x : d) mean += (x = 2.0 * unit(rng) - 1.0);
                mean /= static_cast<double>(dim);
                double norm = 0.0;
                for (auto& x : d) norm += std::abs(x -= mean);
                if (norm <= 0.0) continue;
                const double length = 0.999 * eps * unit(rng);
                std::vector<double> trial(center.begin(), center.end());
                for (std::size_t i = 0; i < dim; ++i) trial[i] += d[i] * length / norm;
                if (inside(trial)) {
                    candidate = std::move(trial);
                    break;
                }
            }
            starts.push_back(std::move(candidate));
        }

        std::vector<std::pair<std::vector<double>, double>> endpoints;
        for (auto& x : starts) {
            double r = res(x);
            double step = eps / 4.0;
            for (int it = 0; it < sequence_length && step > 1e-13; ++it) {
                bool improved = false;
                for (std::size_t i = 0; i < dim && !improved; ++i) {
                    for (std::size_t j = 0; j < dim && !improved; ++j) {
                        if (i == j) continue;
                        const double s = std::min(step, x[j]);
                        if (s <= 0.0) continue;
                        std::vector<double> y = x;
                        y[i] += s;
                        y[j] -= s;
                        if (!inside(y)) continue;
                        const double ry = res(y);
                        if (ry < r) {
                            x = std::move(y);
                            r = ry;
                            improved = true;
                        }
                    }
                }
                if (!improved) step /= 2.0;
            }
            endpoints.emplace_back(x, r);
        }

        for (double t : thresholds) {
            std::vector<const std::vector<double>*> below;
            for (const auto& [x, r] : endpoints)
                if (r < t) below.push_back(&x);
            double spread = 0.0;
            for (std::size_t i = 0; i < below.size(); ++i)
                for (std::size_t j = i + 1; j < below.size(); ++j)
                    spread = std::max(spread, l1_distance(*below[i], *below[j]));
            ball.counts.push_back(below.size());
            ball.spreads.push_back(spread);
        }
        ball.suspected_violation = ball.counts.back() >= 2 && ball.spreads.back() > kSpreadFraction * eps;
        report.flagged += ball.suspected_violation ? 1 : 0;
        report.balls.push_back(std::move(ball));
    }
    return report;
}

}  // namespace sperner_fix
