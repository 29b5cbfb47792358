#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "sperner_fix/self_map.hpp"
#include "sperner_fix/simplex.hpp"
#include "sperner_fix/solver.hpp"

namespace sperner_fix {

using Vector = std::vector<double>;

enum class NormKind { l1, l2, linf };

std::string to_string(NormKind kind);
NormKind parse_norm_kind(const std::string& name);

double norm_value(NormKind kind, std::span<const double> x);

/// One seminorm on the ambient space: |x_i|, |<w, x>|, or a norm.
struct Seminorm {
    enum class Kind { coordinate, functional, norm };

    Kind kind = Kind::norm;
    std::size_t index = 0;  ///< coordinate
    Vector weights;         ///< functional
    NormKind norm = NormKind::l2;

    static Seminorm coordinate(std::size_t i);
    static Seminorm functional(Vector w);
    static Seminorm make_norm(NormKind k);

    double operator()(std::span<const double> x) const;

    /// sup p(d) over |d_j| <= half_width[j].
    double box_bound(std::span<const double> half_width) const;

    /// Smooth upper approximation within `sigma` (times a log factor for linf)
    /// of p(d); accumulates its gradient into `grad`.
    double smooth(std::span<const double> d, double sigma, std::span<double> grad) const;

    /// Bound on the smoothed Hessian, times sigma.
    double curvature() const;
};

/// Finite seminorm family; distances use the sum over the active subset F.
class SeminormFamily {
public:
    SeminormFamily() = default;
    explicit SeminormFamily(std::vector<Seminorm> members);
    SeminormFamily(std::vector<Seminorm> members, std::vector<std::size_t> active);

    static SeminormFamily single(NormKind kind);

    const std::vector<Seminorm>& members() const noexcept { return members_; }
    const std::vector<std::size_t>& active() const noexcept { return active_; }

    double aggregate(std::span<const double> x) const;
    double box_bound(std::span<const double> half_width) const;
    double smooth(std::span<const double> d, double sigma, std::span<double> grad) const;
    double curvature() const;

private:
    std::vector<Seminorm> members_;
    std::vector<std::size_t> active_;
};

/// Compact convex set in finite ambient dimension.
struct Domain {
    enum class Kind { box, ball, hull };

    Kind kind = Kind::box;
    std::size_t ambient_dim = 0;
    Vector lower, upper;                 ///< box
    Vector center;                       ///< ball
    double radius = 0.0;                 ///< ball
    NormKind ball_norm = NormKind::l2;   ///< ball
    std::vector<Vector> generators;      ///< hull

    static Domain box(Vector lower, Vector upper);
    static Domain ball(Vector center, double radius, NormKind norm = NormKind::l2);
    static Domain hull(std::vector<Vector> generators);

    bool contains(std::span<const double> x, double tolerance = 1e-9) const;
    Vector sample(std::mt19937_64& rng) const;
};

struct NetConfig {
    std::size_t max_samples = 400'000;
    std::size_t max_net_size = 64;
};

/// Finite eps-approximation {x^0..x^n} of a domain relative to a family.
struct EpsilonNet {
    std::vector<Vector> points;
    double epsilon = 0.0;
    SeminormFamily family;
    double sample_radius = 0.0;   ///< Certified covering radius of the build sample.
    std::size_t sample_count = 0;

    std::size_t simplex_dimension() const { return points.size() - 1; }
    std::size_t ambient_dim() const { return points.front().size(); }

    /// Lipschitz constant of h from l1 on the simplex to the aggregate seminorm.
    double h_lipschitz() const;
};

/// Greedy farthest-point net over a lattice sample whose covering radius is
/// certified analytically, followed by a pruning pass. Every domain point is
/// strictly within eps of the net. Throws ResolutionError when the sample
/// budget or the net size cap cannot support eps.
EpsilonNet build_net(const Domain& domain, const SeminormFamily& family, double eps,
                     const NetConfig& config = {});

/// h(v) = sum_j v_j x^j.
Vector h(const EpsilonNet& net, const BarycentricPoint& v);

struct ProjectionConfig {
    double tau_proj = 1e-10;
    int max_newton_iterations = 100;
    int max_descent_iterations = 4000;
};

/// Coefficients of the best aggregate-seminorm approximation of x from the
/// convex hull of the net, with the minimum Euclidean norm among
/// representations of that approximation. Never worse than the nearest net
/// point. Throws ProjectionFailure when the achieved residual exceeds the net
/// radius, i.e. x lies outside the domain.
BarycentricPoint h_inv(const EpsilonNet& net, std::span<const double> x,
                       const ProjectionConfig& config = {});

using AmbientMap = std::function<Vector(std::span<const double>)>;

/// f = h_inv o g o h. The lifted map has no closed-form modulus.
SelfMap lift(AmbientMap g, std::shared_ptr<const EpsilonNet> net, Domain domain,
             ProjectionConfig config = {});

struct SchauderConfig {
    SolverConfig solver;
    NetConfig net;
    ProjectionConfig projection;
    double net_fraction = 0.25;   ///< eps_net = net_fraction * eps_target.
};

struct SchauderResult {
    Vector point;
    double ambient_residual = 0.0;
    double simplex_residual = 0.0;
    double simplex_target = 0.0;
    double epsilon_net = 0.0;
    double h_lipschitz = 0.0;
    std::size_t net_size = 0;
    FixedPointResult simplex;

    bool ok() const noexcept { return simplex.ok(); }
};

/// Builds the net, lifts g to the simplex, solves there and maps back through h.
/// Throws EmbeddingDistortion if the ambient residual misses eps_target + 2 eps_net.
SchauderResult schauder_solve(const Domain& domain, const AmbientMap& g,
                              const SeminormFamily& family, double eps_target,
                              const SchauderConfig& config = {});

}  // namespace sperner_fix
