#include "sperner_fix/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>

#include "sperner_fix/errors.hpp"

namespace sperner_fix {

std::string to_string(NormKind kind) {
    switch (kind) {
        case NormKind::l1: return "l1";
        case NormKind::l2: return "l2";
        case NormKind::linf: return "linf";
    }
    return "l2";
}

NormKind parse_norm_kind(const std::string& name) {
    if (name == "l1") return NormKind::l1;
    if (name == "l2") return NormKind::l2;
    if (name == "linf") return NormKind::linf;
    throw InvalidArgument("unknown norm kind '" + name + "' (expected l1, l2 or linf)");
}

double norm_value(NormKind kind, std::span<const double> x) {
    double acc = 0.0;
    for (double v : x) {
        switch (kind) {
            case NormKind::l1: acc += std::abs(v); break;
            case NormKind::l2: acc += v * v; break;
            case NormKind::linf: acc = std::max(acc, std::abs(v)); break;
        }
    }
    return kind == NormKind::l2 ? std::sqrt(acc) : acc;
}

// ---------------------------------------------------------------- seminorms

Seminorm Seminorm::coordinate(std::size_t i) {
    Seminorm p;
    p.kind = Kind::coordinate;
    p.index = i;
    return p;
}

Seminorm Seminorm::functional(Vector w) {
    Seminorm p;
    p.kind = Kind::functional;
    p.weights = std::move(w);
    return p;
}

Seminorm Seminorm::make_norm(NormKind k) {
    Seminorm p;
    p.kind = Kind::norm;
    p.norm = k;
    return p;
}

double Seminorm::operator()(std::span<const double> x) const {
    switch (kind) {
        case Kind::coordinate:
            if (index >= x.size()) throw IndexError("seminorm coordinate out of range");
            return std::abs(x[index]);
        case Kind::functional: {
            if (weights.size() != x.size()) throw InvalidArgument("functional dimension mismatch");
            double s = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) s += weights[i] * x[i];
            return std::abs(s);
        }
        case Kind::norm: return norm_value(norm, x);
    }
    return 0.0;
}

double Seminorm::box_bound(std::span<const double> h) const {
    switch (kind) {
        case Kind::coordinate:
            if (index >= h.size()) throw IndexError("seminorm coordinate out of range");
            return h[index];
        case Kind::functional: {
            double s = 0.0;
            for (std::size_t i = 0; i < h.size(); ++i) s += std::abs(weights[i]) * h[i];
            return s;
        }
        case Kind::norm: return norm_value(norm, h);
    }
    return 0.0;
}

double Seminorm::smooth(std::span<const double> d, double sigma, std::span<double> grad) const {
    switch (kind) {
        case Kind::coordinate: {
            const double s = std::hypot(d[index], sigma);
            grad[index] += d[index] / s;
            return s;
        }
        case Kind::functional: {
            double t = 0.0;
            for (std::size_t i = 0; i < d.size(); ++i) t += weights[i] * d[i];
            const double s = std::hypot(t, sigma);
            for (std::size_t i = 0; i < d.size(); ++i) grad[i] += weights[i] * t / s;
            return s;
        }
        case Kind::norm:
            break;
    }
    switch (norm) {
        case NormKind::l1: {
            double total = 0.0;
            for (std::size_t i = 0; i < d.size(); ++i) {
                const double s = std::hypot(d[i], sigma);
                grad[i] += d[i] / s;
                total += s;
            }
            return total;
        }
        case NormKind::l2: {
            double sq = sigma * sigma;
            for (double v : d) sq += v * v;
            const double s = std::sqrt(sq);
            for (std::size_t i = 0; i < d.size(); ++i) grad[i] += d[i] / s;
            return s;
        }
        case NormKind::linf: {
            // sigma * log sum exp(+-d_i / sigma), shifted by the max for stability.
            double top = 0.0;
            for (double v : d) top = std::max(top, std::abs(v));
            double z = 0.0;
            std::vector<double> wp(d.size()), wm(d.size());
            for (std::size_t i = 0; i < d.size(); ++i) {
                wp[i] = std::exp((d[i] - top) / sigma);
                wm[i] = std::exp((-d[i] - top) / sigma);
                z += wp[i] + wm[i];
            }
            for (std::size_t i = 0; i < d.size(); ++i) grad[i] += (wp[i] - wm[i]) / z;
            return top + sigma * std::log(z);
        }
    }
    return 0.0;
}

double Seminorm::curvature() const {
    if (kind == Kind::functional) {
        double s = 0.0;
        for (double w : weights) s += w * w;
        return s;
    }
    return 1.0;
}

SeminormFamily::SeminormFamily(std::vector<Seminorm> members) : members_(std::move(members)) {
    active_.resize(members_.size());
    std::iota(active_.begin(), active_.end(), std::size_t{0});
}

SeminormFamily::SeminormFamily(std::vector<Seminorm> members, std::vector<std::size_t> active)
    : members_(std::move(members)), active_(std::move(active)) {
    for (auto i : active_)
        if (i >= members_.size()) throw IndexError("active seminorm index out of range");
}

SeminormFamily SeminormFamily::single(NormKind kind) {
    return SeminormFamily({Seminorm::make_norm(kind)});
}

double SeminormFamily::aggregate(std::span<const double> x) const {
    double s = 0.0;
    for (auto i : active_) s += members_[i](x);
    return s;
}

double SeminormFamily::box_bound(std::span<const double> h) const {
    double s = 0.0;
    for (auto i : active_) s += members_[i].box_bound(h);
    return s;
}

double SeminormFamily::smooth(std::span<const double> d, double sigma, std::span<double> grad) const {
    std::fill(grad.begin(), grad.end(), 0.0);
    double s = 0.0;
    for (auto i : active_) s += members_[i].smooth(d, sigma, grad);
    return s;
}

double SeminormFamily::curvature() const {
    double s = 0.0;
    for (auto i : active_) s += members_[i].curvature();
    return s;
}

// ---------------------------------------------------------------- hull geometry

namespace {

Vector difference(std::span<const double> a, std::span<const double> b) {
    Vector d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    return d;
}

/// Euclidean projection onto the probability simplex.
void project_to_simplex(Vector& a) {
    Vector u = a;
    std::sort(u.begin(), u.end(), std::greater<>());
    double cumulative = 0.0;
    double theta = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        cumulative += u[j];
        const double t = (cumulative - 1.0) / static_cast<double>(j + 1);
        if (u[j] - t > 0.0) theta = t;
    }
    for (double& v : a) v = std::max(v - theta, 0.0);
}

/// Dense solve with partial pivoting; returns false when singular.
bool solve_dense(std::vector<double> a, std::vector<double>& b, std::size_t q) {
    for (std::size_t c = 0; c < q; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < q; ++r)
            if (std::abs(a[r * q + c]) > std::abs(a[p * q + c])) p = r;
        if (a[p * q + c] == 0.0) return false;
        if (p != c) {
            for (std::size_t k = 0; k < q; ++k) std::swap(a[p * q + k], a[c * q + k]);
            std::swap(b[p], b[c]);
        }
        for (std::size_t r = c + 1; r < q; ++r) {
            const double f = a[r * q + c] / a[c * q + c];
            if (f == 0.0) continue;
            for (std::size_t k = c; k < q; ++k) a[r * q + k] -= f * a[c * q + k];
            b[r] -= f * b[c];
        }
    }
    for (std::size_t c = q; c-- > 0;) {
        double s = b[c];
        for (std::size_t k = c + 1; k < q; ++k) s -= a[c * q + k] * b[k];
        b[c] = s / a[c * q + c];
    }
    return true;
}

/// Points stored centered and scaled so that coordinates are O(1).
class Hull {
public:
    explicit Hull(const std::vector<Vector>& points)
        : d_(points.front().size()), n_(points.size()), centroid_(d_, 0.0) {
        for (const auto& p : points)
            for (std::size_t i = 0; i < d_; ++i) centroid_[i] += p[i] / static_cast<double>(n_);
        scale_ = 0.0;
        for (const auto& p : points)
            for (std::size_t i = 0; i < d_; ++i)
                scale_ = std::max(scale_, std::abs(p[i] - centroid_[i]));
        if (scale_ == 0.0) scale_ = 1.0;
        cols_.resize(n_ * d_);
        for (std::size_t j = 0; j < n_; ++j)
            for (std::size_t i = 0; i < d_; ++i)
                cols_[j * d_ + i] = (points[j][i] - centroid_[i]) / scale_;
        gram_trace_ = 0.0;
        for (double v : cols_) gram_trace_ += v * v;
    }

    std::size_t size() const { return n_; }
    double scale() const { return scale_; }

    Vector to_local(std::span<const double> x) const {
        Vector u(d_);
        for (std::size_t i = 0; i < d_; ++i) u[i] = (x[i] - centroid_[i]) / scale_;
        return u;
    }

    Vector combine_local(std::span<const double> alpha) const {
        Vector u(d_, 0.0);
        for (std::size_t j = 0; j < n_; ++j)
            for (std::size_t i = 0; i < d_; ++i) u[i] += alpha[j] * cols_[j * d_ + i];
        return u;
    }

    Vector combine(std::span<const double> alpha) const {
        Vector u = combine_local(alpha);
        for (std::size_t i = 0; i < d_; ++i) u[i] = centroid_[i] + scale_ * u[i];
        return u;
    }

    /// Minimum-norm alpha on the simplex with combine_local(alpha) == u, by
    /// semismooth Newton on the (d+1)-dimensional dual. Empty if u is not
    /// representable (outside the hull) or Newton stalls.
    std::optional<Vector> min_norm_representation(std::span<const double> u, int max_iter,
                                                  double tol = 1e-12) const {
        const std::size_t q = d_ + 1;
        Vector b(u.begin(), u.end());
        b.push_back(1.0);
        Vector lambda(q, 0.0);
        lambda[d_] = 1.0 / static_cast<double>(n_);
        Vector alpha(n_);

        auto primal = [&](const Vector& lam) {
            Vector a(n_);
            for (std::size_t j = 0; j < n_; ++j) {
                double z = lam[d_];
                for (std::size_t i = 0; i < d_; ++i) z += cols_[j * d_ + i] * lam[i];
                a[j] = std::max(z, 0.0);
            }
            return a;
        };
        auto dual_value = [&](const Vector& lam, const Vector& a) {
            double v = 0.0;
            for (std::size_t i = 0; i < q; ++i) v += b[i] * lam[i];
            for (double x : a) v -= 0.5 * x * x;
            return v;
        };

        for (int it = 0; it <= max_iter; ++it) {
            alpha = primal(lambda);
            Vector r = b;
            for (std::size_t j = 0; j < n_; ++j) {
                for (std::size_t i = 0; i < d_; ++i) r[i] -= cols_[j * d_ + i] * alpha[j];
                r[d_] -= alpha[j];
            }
            double worst = 0.0;
            for (double v : r) worst = std::max(worst, std::abs(v));
            if (worst <= tol) {
                const double total = std::accumulate(alpha.begin(), alpha.end(), 0.0);
                if (!(total > 0.0)) return std::nullopt;
                for (double& a : alpha) a /= total;
                return alpha;
            }
            if (it == max_iter) break;

            std::vector<double> hess(q * q, 0.0);
            for (std::size_t j = 0; j < n_; ++j) {
                if (alpha[j] <= 0.0) continue;
                for (std::size_t a = 0; a < q; ++a) {
                    const double ca = a < d_ ? cols_[j * d_ + a] : 1.0;
                    for (std::size_t c = 0; c < q; ++c) {
                        const double cc = c < d_ ? cols_[j * d_ + c] : 1.0;
                        hess[a * q + c] += ca * cc;
                    }
                }
            }
            double trace = 0.0;
            for (std::size_t a = 0; a < q; ++a) trace += hess[a * q + a];
            for (std::size_t a = 0; a < q; ++a) hess[a * q + a] += 1e-12 * (1.0 + trace);
            Vector step = r;
            if (!solve_dense(hess, step, q)) return std::nullopt;

            double slope = 0.0;
            for (std::size_t i = 0; i < q; ++i) slope += r[i] * step[i];
            const double current = dual_value(lambda, alpha);
            const double slack = 1e-14 * (1.0 + std::abs(current));
            double t = 1.0;
            Vector trial(q);
            while (true) {
                for (std::size_t i = 0; i < q; ++i) trial[i] = lambda[i] + t * step[i];
                if (dual_value(trial, primal(trial)) >= current + 1e-4 * t * slope - slack) break;
                t *= 0.5;
                if (t < 1e-14) break;
            }
            if (t < 1e-14) {
                // Rounding floor: accept a nearly feasible point, else give up.
                if (worst > 1e3 * tol) return std::nullopt;
                const double total = std::accumulate(alpha.begin(), alpha.end(), 0.0);
                for (double& a : alpha) a /= total;
                return alpha;
            }
            lambda = trial;
            double size = 0.0;
            for (double v : lambda) size = std::max(size, std::abs(v));
            if (size > 1e12) return std::nullopt;
        }
        return std::nullopt;
    }

    struct L2Projection {
        Vector alpha;
        double error_bound = 0.0;   ///< Certified l2 distance to the exact projection (local units).
    };

    /// Accelerated projected gradient on 0.5 |U alpha - u|^2 with a
    /// Frank-Wolfe duality gap certificate.
    L2Projection l2_project(std::span<const double> u, int max_iter, double target) const {
        const double lipschitz = std::max(gram_trace_, 1e-300);
        Vector alpha(n_, 1.0 / static_cast<double>(n_));
        Vector y = alpha;
        Vector grad(n_);
        double t = 1.0;
        double gap = std::numeric_limits<double>::infinity();
        auto gradient_at = [&](const Vector& a, Vector& g) {
            Vector res = combine_local(a);
            for (std::size_t i = 0; i < d_; ++i) res[i] -= u[i];
            for (std::size_t j = 0; j < n_; ++j) {
                double s = 0.0;
                for (std::size_t i = 0; i < d_; ++i) s += cols_[j * d_ + i] * res[i];
                g[j] = s;
            }
        };
        for (int it = 0; it < max_iter; ++it) {
            gradient_at(y, grad);
            Vector next(n_);
            for (std::size_t j = 0; j < n_; ++j) next[j] = y[j] - grad[j] / lipschitz;
            project_to_simplex(next);
            const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
            for (std::size_t j = 0; j < n_; ++j)
                y[j] = next[j] + ((t - 1.0) / t_next) * (next[j] - alpha[j]);
            alpha = std::move(next);
            t = t_next;
            if (it % 16 == 15 || it + 1 == max_iter) {
                gradient_at(alpha, grad);
                double dot = 0.0;
                for (std::size_t j = 0; j < n_; ++j) dot += grad[j] * alpha[j];
                gap = std::max(0.0, dot - *std::min_element(grad.begin(), grad.end()));
                if (std::sqrt(2.0 * gap) <= target) break;
            }
        }
        return {alpha, std::sqrt(2.0 * gap)};
    }

    /// Smoothed accelerated descent on aggregate(U alpha - u), continuation in
    /// the smoothing width; returns the best iterate by the exact objective.
    Vector descend(const SeminormFamily& family, std::span<const double> u, Vector start,
                   int max_iter) const {
        const double curvature = std::max(family.curvature(), 1e-300) * std::max(gram_trace_, 1e-300);
        auto exact = [&](const Vector& a) {
            Vector r = combine_local(a);
            for (std::size_t i = 0; i < d_; ++i) r[i] -= u[i];
            return family.aggregate(r);
        };
        Vector best = start;
        double best_value = exact(best);
        const int stages = 6;
        const int per_stage = std::max(1, max_iter / stages);
        Vector alpha = start;
        Vector grad_u(d_), grad(n_);
        double sigma = 0.1;
        for (int stage = 0; stage < stages && best_value > 0.0; ++stage, sigma *= 0.1) {
            const double lipschitz = curvature / sigma;
            Vector y = alpha;
            double t = 1.0;
            for (int it = 0; it < per_stage; ++it) {
                Vector r = combine_local(y);
                for (std::size_t i = 0; i < d_; ++i) r[i] -= u[i];
                family.smooth(r, sigma, grad_u);
                for (std::size_t j = 0; j < n_; ++j) {
                    double s = 0.0;
                    for (std::size_t i = 0; i < d_; ++i) s += cols_[j * d_ + i] * grad_u[i];
                    grad[j] = s;
                }
                Vector next(n_);
                for (std::size_t j = 0; j < n_; ++j) next[j] = y[j] - grad[j] / lipschitz;
                project_to_simplex(next);
                const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
                for (std::size_t j = 0; j < n_; ++j)
                    y[j] = next[j] + ((t - 1.0) / t_next) * (next[j] - alpha[j]);
                alpha = std::move(next);
                t = t_next;
                const double value = exact(alpha);
                if (value < best_value) {
                    best_value = value;
                    best = alpha;
                }
            }
            alpha = best;
        }
        return best;
    }

private:
    std::size_t d_;
    std::size_t n_;
    Vector centroid_;
    double scale_ = 1.0;
    std::vector<double> cols_;   ///< Column j at [j*d, (j+1)*d).
    double gram_trace_ = 0.0;
};

double domain_scale(const Domain& domain) {
    double s = 0.0;
    switch (domain.kind) {
        case Domain::Kind::box:
            for (std::size_t i = 0; i < domain.ambient_dim; ++i)
                s = std::max({s, std::abs(domain.lower[i]), std::abs(domain.upper[i])});
            break;
        case Domain::Kind::ball:
            for (double c : domain.center) s = std::max(s, std::abs(c));
            s += domain.radius;
            break;
        case Domain::Kind::hull:
            for (const auto& g : domain.generators)
                for (double v : g) s = std::max(s, std::abs(v));
            break;
    }
    return s;
}

}  // namespace

// ---------------------------------------------------------------- domains

Domain Domain::box(Vector lower, Vector upper) {
    if (lower.empty() || lower.size() != upper.size())
        throw InvalidArgument("box bounds must be non-empty and of equal dimension");
    for (std::size_t i = 0; i < lower.size(); ++i)
        if (!(lower[i] <= upper[i])) throw InvalidArgument("box lower bound exceeds upper bound");
    Domain d;
    d.kind = Kind::box;
    d.ambient_dim = lower.size();
    d.lower = std::move(lower);
    d.upper = std::move(upper);
    return d;
}

Domain Domain::ball(Vector center, double radius, NormKind norm) {
    if (center.empty()) throw InvalidArgument("ball center must be non-empty");
    if (!(radius >= 0.0)) throw InvalidArgument("ball radius must be non-negative");
    Domain d;
    d.kind = Kind::ball;
    d.ambient_dim = center.size();
    d.center = std::move(center);
    d.radius = radius;
    d.ball_norm = norm;
    return d;
}

Domain Domain::hull(std::vector<Vector> generators) {
    if (generators.empty() || generators.front().empty())
        throw InvalidArgument("hull needs at least one non-empty generator");
    for (const auto& g : generators)
        if (g.size() != generators.front().size())
            throw InvalidArgument("hull generators differ in dimension");
    Domain d;
    d.kind = Kind::hull;
    d.ambient_dim = generators.front().size();
    d.generators = std::move(generators);
    return d;
}

bool Domain::contains(std::span<const double> x, double tolerance) const {
    if (x.size() != ambient_dim) return false;
    switch (kind) {
        case Kind::box:
            for (std::size_t i = 0; i < ambient_dim; ++i)
                if (x[i] < lower[i] - tolerance || x[i] > upper[i] + tolerance) return false;
            return true;
        case Kind::ball:
            return norm_value(ball_norm, difference(x, center)) <= radius + tolerance;
        case Kind::hull: {
            Hull h(generators);
            Vector u = h.to_local(x);
            if (h.min_norm_representation(u, 100)) return true;
            auto proj = h.l2_project(u, 20000, 1e-3 * tolerance / h.scale());
            Vector p = h.combine(proj.alpha);
            return norm_value(NormKind::l2, difference(p, x)) - proj.error_bound * h.scale() <=
                   tolerance;
        }
    }
    return false;
}

Vector Domain::sample(std::mt19937_64& rng) const {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    switch (kind) {
        case Kind::box: {
            Vector x(ambient_dim);
            for (std::size_t i = 0; i < ambient_dim; ++i)
                x[i] = lower[i] + (upper[i] - lower[i]) * unit(rng);
            return x;
        }
        case Kind::ball: {
            if (radius == 0.0) return center;
            Vector x(ambient_dim);
            while (true) {
                for (std::size_t i = 0; i < ambient_dim; ++i)
                    x[i] = center[i] + radius * (2.0 * unit(rng) - 1.0);
                if (norm_value(ball_norm, difference(x, center)) <= radius) return x;
            }
        }
        case Kind::hull: {
            std::exponential_distribution<double> expo(1.0);
            Vector w(generators.size());
            double total = 0.0;
            for (double& v : w) total += (v = expo(rng));
            Vector x(ambient_dim, 0.0);
            for (std::size_t j = 0; j < generators.size(); ++j)
                for (std::size_t i = 0; i < ambient_dim; ++i) x[i] += w[j] / total * generators[j][i];
            return x;
        }
    }
    return {};
}

// ---------------------------------------------------------------- nets

namespace {

struct Sample {
    std::vector<Vector> points;
    double radius = 0.0;   ///< Every domain point lies within this of some sample point.
};

constexpr double kSampleFraction = 0.1;

/// Number of lattice steps per axis so that `unit_radius / k <= target`.
std::int64_t steps_for(double unit_radius, double target) {
    if (unit_radius <= 0.0) return 1;
    return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(unit_radius / target)));
}

void require_budget(std::size_t nonzero_axes, std::int64_t k, double unit_radius,
                    const NetConfig& config, double eps) {
    const double count = std::pow(static_cast<double>(k + 1), static_cast<double>(nonzero_axes));
    if (count <= static_cast<double>(config.max_samples)) return;
    const double k_max = std::max(
        1.0, std::floor(std::pow(static_cast<double>(config.max_samples),
                                 1.0 / static_cast<double>(nonzero_axes))) - 1.0);
    const double achievable = unit_radius / k_max / kSampleFraction;
    std::ostringstream msg;
    msg << "resolution: eps = " << eps << " needs about " << count
        << " sample points (budget " << config.max_samples << "); achievable eps is "
        << achievable;
    throw ResolutionError(achievable, msg.str());
}

/// Lattice over [lo, hi] with k steps on every axis of positive width.
template <typename Visit>
void for_each_lattice_point(const Vector& lo, const Vector& hi, std::int64_t k, Visit visit) {
    const std::size_t d = lo.size();
    std::vector<std::int64_t> steps(d);
    for (std::size_t i = 0; i < d; ++i) steps[i] = hi[i] > lo[i] ? k : 0;
    std::vector<std::int64_t> idx(d, 0);
    Vector x(d);
    while (true) {
        for (std::size_t i = 0; i < d; ++i)
            x[i] = steps[i] == 0 ? lo[i]
                                 : lo[i] + (hi[i] - lo[i]) * static_cast<double>(idx[i]) /
                                               static_cast<double>(steps[i]);
        visit(x);
        std::size_t i = 0;
        for (; i < d; ++i) {
            if (++idx[i] <= steps[i]) break;
            idx[i] = 0;
        }
        if (i == d) return;
    }
}

std::size_t positive_axes(const Vector& lo, const Vector& hi) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < lo.size(); ++i) n += hi[i] > lo[i] ? 1 : 0;
    return n;
}

Vector half_cell(const Vector& lo, const Vector& hi, std::int64_t k) {
    Vector h(lo.size());
    for (std::size_t i = 0; i < lo.size(); ++i)
        h[i] = (hi[i] - lo[i]) / (2.0 * static_cast<double>(k));
    return h;
}

Sample sample_box(const Domain& domain, const SeminormFamily& family, double eps,
                  const NetConfig& config) {
    const double unit = family.box_bound(half_cell(domain.lower, domain.upper, 1));
    const double target = kSampleFraction * eps;
    const std::int64_t k = steps_for(unit, target);
    require_budget(positive_axes(domain.lower, domain.upper), k, unit, config, eps);
    Sample s;
    s.radius = family.box_bound(half_cell(domain.lower, domain.upper, k));
    for_each_lattice_point(domain.lower, domain.upper, k,
                           [&](const Vector& x) { s.points.push_back(x); });
    return s;
}

Sample sample_ball(const Domain& domain, const SeminormFamily& family, double eps,
                   const NetConfig& config) {
    const std::size_t d = domain.ambient_dim;
    Vector lo(d), hi(d);
    for (std::size_t i = 0; i < d; ++i) {
        lo[i] = domain.center[i] - domain.radius;
        hi[i] = domain.center[i] + domain.radius;
    }
    const double to_family = family.box_bound(Vector(d, 1.0));
    auto radius_at = [&](std::int64_t k) {
        Vector h = half_cell(lo, hi, k);
        return family.box_bound(h) + norm_value(domain.ball_norm, h) * to_family;
    };
    const double unit = radius_at(1);
    const std::int64_t k = steps_for(unit, kSampleFraction * eps);
    require_budget(positive_axes(lo, hi), k, unit, config, eps);
    Sample s;
    s.radius = radius_at(k);
    for_each_lattice_point(lo, hi, k, [&](const Vector& x) {
        Vector off = difference(x, domain.center);
        const double r = norm_value(domain.ball_norm, off);
        if (r <= domain.radius) {
            s.points.push_back(x);
            return;
        }
        Vector y(d);
        for (std::size_t i = 0; i < d; ++i) y[i] = domain.center[i] + off[i] * (domain.radius / r);
        s.points.push_back(std::move(y));
    });
    return s;
}

Sample sample_hull(const Domain& domain, const SeminormFamily& family, double eps,
                   const NetConfig& config) {
    const std::size_t d = domain.ambient_dim;
    Vector lo = domain.generators.front(), hi = domain.generators.front();
    for (const auto& g : domain.generators)
        for (std::size_t i = 0; i < d; ++i) {
            lo[i] = std::min(lo[i], g[i]);
            hi[i] = std::max(hi[i], g[i]);
        }
    // Off-hull lattice points are replaced by their Euclidean projection,
    // which is non-expansive; the family is bounded by to_family * |.|_2.
    const double to_family = family.box_bound(Vector(d, 1.0));
    auto lattice_radius = [&](std::int64_t k) {
        return to_family * norm_value(NormKind::l2, half_cell(lo, hi, k));
    };
    const double unit = lattice_radius(1);
    const double target = kSampleFraction * eps;
    const std::int64_t k = steps_for(unit, 0.9 * target);
    require_budget(positive_axes(lo, hi), k, unit, config, eps);

    Hull hull(domain.generators);
    const double projection_target = 0.1 * target / std::max(to_family, 1e-300) / hull.scale();
    double worst_error = 0.0;
    Sample s;
    for_each_lattice_point(lo, hi, k, [&](const Vector& x) {
        Vector u = hull.to_local(x);
        if (hull.min_norm_representation(u, 60)) {
            s.points.push_back(x);
            return;
        }
        auto proj = hull.l2_project(u, 20000, projection_target);
        worst_error = std::max(worst_error, proj.error_bound);
        s.points.push_back(hull.combine(proj.alpha));
    });
    s.radius = lattice_radius(k) + to_family * worst_error * hull.scale();
    return s;
}

}  // namespace

double EpsilonNet::h_lipschitz() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j)
            worst = std::max(worst, family.aggregate(difference(points[i], points[j])));
    return worst / 2.0;
}

EpsilonNet build_net(const Domain& domain, const SeminormFamily& family, double eps,
                     const NetConfig& config) {
    if (!(eps > 0.0)) throw InvalidArgument("net radius must be positive");
    if (family.active().empty()) throw InvalidArgument("seminorm family has no active member");
    if (config.max_net_size < 1) throw InvalidArgument("net size cap must be at least 1");

    Sample sample;
    switch (domain.kind) {
        case Domain::Kind::box: sample = sample_box(domain, family, eps, config); break;
        case Domain::Kind::ball: sample = sample_ball(domain, family, eps, config); break;
        case Domain::Kind::hull: sample = sample_hull(domain, family, eps, config); break;
    }
    const auto& pts = sample.points;
    if (pts.empty()) throw DegenerateSampling("domain sample is empty");
    const double threshold = eps - sample.radius;
    if (!(threshold > 0.0))
        throw ResolutionError(sample.radius / kSampleFraction,
                              "resolution: sample covering radius reaches eps");

    auto dist = [&](std::size_t a, std::size_t b) {
        return family.aggregate(difference(pts[a], pts[b]));
    };

    // Start from the sample point closest to the sample mean.
    Vector mean(domain.ambient_dim, 0.0);
    for (const auto& p : pts)
        for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += p[i] / static_cast<double>(pts.size());
    std::size_t start = 0;
    double start_dist = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double v = family.aggregate(difference(pts[i], mean));
        if (v < start_dist) {
            start_dist = v;
            start = i;
        }
    }

    std::vector<std::size_t> chosen{start};
    std::vector<double> nearest(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) nearest[i] = dist(i, start);
    while (true) {
        auto far = std::max_element(nearest.begin(), nearest.end());
        if (*far < threshold) break;
        if (chosen.size() == config.max_net_size) {
            std::ostringstream msg;
            msg << "resolution: net size cap " << config.max_net_size << " binds at eps = " << eps
                << "; the capped net covers eps = " << *far + sample.radius;
            throw ResolutionError(*far + sample.radius, msg.str());
        }
        const auto next = static_cast<std::size_t>(far - nearest.begin());
        chosen.push_back(next);
        for (std::size_t i = 0; i < pts.size(); ++i) nearest[i] = std::min(nearest[i], dist(i, next));
    }

    // Drop net points whose samples are all covered by the others, latest first.
    for (std::size_t c = chosen.size(); c-- > 0 && chosen.size() > 1;) {
        bool redundant = true;
        for (std::size_t i = 0; i < pts.size() && redundant; ++i) {
            if (dist(i, chosen[c]) >= threshold) continue;
            bool covered = false;
            for (std::size_t o = 0; o < chosen.size() && !covered; ++o)
                covered = o != c && dist(i, chosen[o]) < threshold;
            redundant = covered;
        }
        if (redundant) chosen.erase(chosen.begin() + static_cast<std::ptrdiff_t>(c));
    }

    EpsilonNet net;
    net.epsilon = eps;
    net.family = family;
    net.sample_radius = sample.radius;
    net.sample_count = pts.size();
    for (auto i : chosen) net.points.push_back(pts[i]);
    return net;
}

Vector h(const EpsilonNet& net, const BarycentricPoint& v) {
    if (v.size() != net.points.size())
        throw InvalidArgument("barycentric point has " + std::to_string(v.size()) +
                              " coordinates for a net of " + std::to_string(net.points.size()));
    Vector x(net.ambient_dim(), 0.0);
    for (std::size_t j = 0; j < net.points.size(); ++j)
        for (std::size_t i = 0; i < x.size(); ++i) x[i] += v[j] * net.points[j][i];
    return x;
}

BarycentricPoint h_inv(const EpsilonNet& net, std::span<const double> x,
                       const ProjectionConfig& config) {
    if (net.points.empty()) throw InvalidArgument("empty net");
    if (x.size() != net.ambient_dim()) throw InvalidArgument("ambient dimension mismatch");
    const std::size_t n = net.points.size();
    if (n == 1) {
        const double r = net.family.aggregate(difference(net.points[0], x));
        if (r > net.epsilon)
            throw ProjectionFailure(r, "projection failure: residual " + std::to_string(r) +
                                           " exceeds the net radius");
        return BarycentricPoint({1.0});
    }

    Hull hull(net.points);
    const Vector u = hull.to_local(x);
    const double tol = std::min(1e-12, config.tau_proj / hull.scale());
    if (auto exact = hull.min_norm_representation(u, config.max_newton_iterations, tol))
        return BarycentricPoint(std::move(*exact), 1e-9);

    auto residual_of = [&](std::span<const double> alpha) {
        return net.family.aggregate(difference(hull.combine(alpha), x));
    };

    // Witness: the nearest net point.
    std::size_t witness = 0;
    double witness_residual = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
        const double r = net.family.aggregate(difference(net.points[j], x));
        if (r < witness_residual) {
            witness_residual = r;
            witness = j;
        }
    }
    Vector start(n, 0.0);
    start[witness] = 1.0;
    Vector best = hull.descend(net.family, u, start, config.max_descent_iterations);
    double best_residual = residual_of(best);

    // Among representations of the best approximation, take the minimum-norm one.
    if (auto tidy = hull.min_norm_representation(hull.combine_local(best),
                                                 config.max_newton_iterations, tol)) {
        const double r = residual_of(*tidy);
        if (r <= best_residual + config.tau_proj) {
            best = std::move(*tidy);
            best_residual = r;
        }
    }
    if (best_residual > net.epsilon)
        throw ProjectionFailure(best_residual,
                                "projection failure: residual " + std::to_string(best_residual) +
                                    " exceeds the net radius " + std::to_string(net.epsilon));
    return BarycentricPoint(std::move(best), 1e-9);
}

SelfMap lift(AmbientMap g, std::shared_ptr<const EpsilonNet> net, Domain domain,
             ProjectionConfig config) {
    if (!net || net->points.empty()) throw InvalidArgument("lift needs a non-empty net");
    SelfMap f;
    f.name = "lift";
    f.dimension = net->simplex_dimension();
    const double tolerance = 1e-9 * (1.0 + domain_scale(domain));
    f.eval = [g = std::move(g), net, domain = std::move(domain), config,
              tolerance](std::span<const double> v) {
        Vector x(net->ambient_dim(), 0.0);
        for (std::size_t j = 0; j < net->points.size(); ++j)
            for (std::size_t i = 0; i < x.size(); ++i) x[i] += v[j] * net->points[j][i];
        Vector y = g(x);
        if (!domain.contains(y, tolerance)) {
            std::ostringstream msg;
            msg << "range violation: the ambient map leaves its domain at (";
            for (std::size_t i = 0; i < x.size(); ++i) msg << (i ? ", " : "") << x[i];
            msg << ")";
            throw RangeViolation(x, msg.str());
        }
        auto alpha = h_inv(*net, y, config);
        return Vector(alpha.coords().begin(), alpha.coords().end());
    };
    return f;
}

SchauderResult schauder_solve(const Domain& domain, const AmbientMap& g,
                              const SeminormFamily& family, double eps_target,
                              const SchauderConfig& config) {
    if (!(eps_target > 0.0)) throw InvalidArgument("eps_target must be positive");
    SchauderResult result;
    result.epsilon_net = config.net_fraction * eps_target;
    auto net = std::make_shared<const EpsilonNet>(
        build_net(domain, family, result.epsilon_net, config.net));
    result.net_size = net->points.size();
    result.h_lipschitz = net->h_lipschitz();
    result.simplex_target =
        result.h_lipschitz > 0.0 ? std::min(2.0, eps_target / (2.0 * result.h_lipschitz)) : 2.0;

    SelfMap f = lift(g, net, domain, config.projection);
    result.simplex = solve(f, result.simplex_target, config.solver);
    result.simplex_residual = result.simplex.residual;
    result.point = h(*net, result.simplex.point);
    result.ambient_residual = family.aggregate(difference(g(result.point), result.point));
    if (!result.ok()) return result;

    const double bound = eps_target + 2.0 * result.epsilon_net;
    const double consistency =
        result.h_lipschitz * result.simplex_residual + 2.0 * result.epsilon_net;
    if (!(result.ambient_residual < bound) || result.ambient_residual > consistency) {
        std::ostringstream msg;
        msg << "embedding distortion: ambient residual " << result.ambient_residual
            << " against bound " << std::min(bound, consistency) << " (simplex residual "
            << result.simplex_residual << ")";
        throw EmbeddingDistortion(result.ambient_residual, result.simplex_residual, msg.str());
    }
    return result;
}

}  // namespace sperner_fix
