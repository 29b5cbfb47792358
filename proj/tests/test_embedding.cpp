#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "sperner_fix/embedding.hpp"
#include "sperner_fix/errors.hpp"
#include "sperner_fix/maps.hpp"
#include "support/oracles.hpp"

using namespace sperner_fix;

namespace {

EpsilonNet manual_net(std::vector<Vector> points, double eps, NormKind kind = NormKind::l2) {
    EpsilonNet net;
    net.points = std::move(points);
    net.epsilon = eps;
    net.family = SeminormFamily::single(kind);
    return net;
}

Vector sub(const Vector& a, const Vector& b) {
    Vector d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    return d;
}

std::vector<Seminorm> sample_seminorms() {
    return {Seminorm::coordinate(0), Seminorm::coordinate(2), Seminorm::functional({1.0, -2.0, 0.5}),
            Seminorm::make_norm(NormKind::l1), Seminorm::make_norm(NormKind::l2),
            Seminorm::make_norm(NormKind::linf)};
}

Vector random_vector(std::size_t d, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, scale);
    Vector v(d);
    for (auto& x : v) x = g(rng);
    return v;
}

}  // namespace

TEST(Seminorm, Axioms) {
    std::mt19937_64 rng(1);
    for (const auto& p : sample_seminorms()) {
        EXPECT_EQ(p(Vector(3, 0.0)), 0.0);
        for (int s = 0; s < 1000; ++s) {
            auto x = random_vector(3, rng), y = random_vector(3, rng);
            const double lambda = std::normal_distribution<double>(0.0, 3.0)(rng);
            Vector lx(3), xy(3);
            for (std::size_t i = 0; i < 3; ++i) {
                lx[i] = lambda * x[i];
                xy[i] = x[i] + y[i];
            }
            EXPECT_GE(p(x), 0.0);
            EXPECT_NEAR(p(lx), std::abs(lambda) * p(x), 1e-12 * (1 + std::abs(lambda) * p(x)));
            EXPECT_LE(p(xy), p(x) + p(y) + 1e-12);
        }
    }
}

TEST(Seminorm, BoxBoundAndSmoothing) {
    std::mt19937_64 rng(2);
    const Vector half{0.3, 0.1, 0.7};
    for (const auto& p : sample_seminorms()) {
        const double bound = p.box_bound(half);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int s = 0; s < 500; ++s) {
            Vector d(3);
            for (std::size_t i = 0; i < 3; ++i) d[i] = half[i] * u(rng);
            EXPECT_LE(p(d), bound + 1e-12);
            for (double sigma : {1e-1, 1e-3}) {
                Vector grad(3, 0.0);
                const double sm = p.smooth(d, sigma, grad);
                EXPECT_GE(sm, p(d) - 1e-12);
                EXPECT_LE(sm, p(d) + sigma * (3.0 + std::log(6.0)) + 1e-12);
                // Gradient by central differences.
                for (std::size_t i = 0; i < 3; ++i) {
                    const double h = 1e-7;
                    Vector a = d, b = d, scratch(3, 0.0);
                    a[i] += h;
                    b[i] -= h;
                    const double fd = (p.smooth(a, sigma, scratch) - p.smooth(b, sigma, scratch)) / (2 * h);
                    EXPECT_NEAR(grad[i], fd, 1e-4 * (1 + std::abs(fd)));
                }
            }
        }
        // The corner of the box attains the bound for norms.
        if (p.kind == Seminorm::Kind::norm) EXPECT_NEAR(bound, p(half), 1e-12);
    }
}

TEST(SeminormFamily, AggregateOverActiveSubset) {
    SeminormFamily fam({Seminorm::coordinate(0), Seminorm::coordinate(1), Seminorm::make_norm(NormKind::l1)},
                       {0, 2});
    const Vector x{0.5, -2.0};
    EXPECT_DOUBLE_EQ(fam.aggregate(x), 0.5 + 2.5);
    EXPECT_EQ(fam.aggregate(Vector{0.0, 0.0}), 0.0);
    EXPECT_THROW(SeminormFamily({Seminorm::coordinate(0)}, {3}), IndexError);
}

TEST(Domain, ContainsAndSample) {
    std::mt19937_64 rng(3);
    const std::vector<Domain> domains{
        Domain::box({0.0, -1.0}, {1.0, 1.0}), Domain::ball({0.5, 0.5}, 0.3, NormKind::l2),
        Domain::ball({0.0, 0.0}, 1.0, NormKind::l1), Domain::ball({0.0, 0.0}, 1.0, NormKind::linf),
        Domain::hull({{0.0, 0.0}, {1.0, 0.0}, {0.2, 0.9}})};
    for (const auto& d : domains)
        for (int s = 0; s < 500; ++s) EXPECT_TRUE(d.contains(d.sample(rng)));
    EXPECT_FALSE(domains[0].contains(Vector{1.5, 0.0}));
    EXPECT_FALSE(domains[1].contains(Vector{0.9, 0.5}));
    EXPECT_TRUE(domains[2].contains(Vector{0.5, 0.5}));
    EXPECT_FALSE(domains[2].contains(Vector{0.6, 0.5}));
    EXPECT_TRUE(domains[3].contains(Vector{1.0, -1.0}));
    EXPECT_FALSE(domains[4].contains(Vector{1.0, 1.0}));
    EXPECT_TRUE(domains[4].contains(Vector{0.4, 0.3}));
    EXPECT_THROW(Domain::box({0.0}, {-1.0}), InvalidArgument);
    EXPECT_THROW(Domain::ball({0.0}, -1.0), InvalidArgument);
}

TEST(BuildNet, UnitIntervalCoverage) {
    auto net = build_net(Domain::box({0.0}, {1.0}), SeminormFamily::single(NormKind::l2), 0.3);
    EXPECT_LE(net.points.size(), 3u);
    std::vector<std::pair<double, double>> intervals;
    for (const auto& p : net.points) {
        ASSERT_GE(p[0], 0.0);
        ASSERT_LE(p[0], 1.0);
        intervals.emplace_back(p[0] - 0.3, p[0] + 0.3);
    }
    std::sort(intervals.begin(), intervals.end());
    // Open intervals must cover [0, 1] with no gap.
    double reach = 0.0;
    EXPECT_LT(intervals.front().first, 0.0);
    for (auto [lo, hi] : intervals) {
        EXPECT_LT(lo, reach);
        reach = std::max(reach, hi);
    }
    EXPECT_GT(reach, 1.0);
}

TEST(BuildNet, SinglePointDomain) {
    for (double eps : {1e-6, 0.1, 10.0}) {
        auto net = build_net(Domain::hull({{0.25, -1.0}}), SeminormFamily::single(NormKind::l1), eps);
        ASSERT_EQ(net.points.size(), 1u);
        EXPECT_EQ(net.points[0], (Vector{0.25, -1.0}));
    }
}

TEST(BuildNet, DiameterRadiusGivesOnePoint) {
    auto net = build_net(Domain::box({0.0, 0.0}, {1.0, 1.0}), SeminormFamily::single(NormKind::l2),
                         std::sqrt(2.0));
    ASSERT_EQ(net.points.size(), 1u);
    EXPECT_TRUE(Domain::box({0.0, 0.0}, {1.0, 1.0}).contains(net.points[0]));
}

TEST(BuildNet, NetPropertyOnWitnessSamples) {
    std::mt19937_64 rng(4);
    const std::vector<Domain> domains{Domain::box({0.0, 0.0}, {1.0, 0.5}),
                                      Domain::ball({0.0, 0.0}, 0.5, NormKind::l2),
                                      Domain::hull({{0.0, 0.0}, {1.0, 0.2}, {0.3, 0.8}})};
    for (auto kind : {NormKind::l1, NormKind::l2, NormKind::linf})
        for (const auto& d : domains) {
            auto fam = SeminormFamily::single(kind);
            auto net = build_net(d, fam, 0.3);
            for (const auto& p : net.points) EXPECT_TRUE(d.contains(p, 1e-9));
            for (int s = 0; s < 2000; ++s) {
                auto w = d.sample(rng);
                double best = 1e300;
                for (const auto& p : net.points) best = std::min(best, fam.aggregate(sub(w, p)));
                EXPECT_LT(best, 0.3);
            }
        }
}

TEST(BuildNet, ResolutionErrorWhenTheCapBinds) {
    NetConfig tight;
    tight.max_net_size = 4;
    try {
        build_net(Domain::box({0.0, 0.0}, {1.0, 1.0}), SeminormFamily::single(NormKind::l2), 0.05, tight);
        FAIL() << "expected a resolution error";
    } catch (const ResolutionError& e) {
        EXPECT_GT(e.achievable(), 0.05);
    }
}

TEST(H, CornersMidpointsAndScalars) {
    auto net = manual_net({{0.0, 0.0}, {2.0, 0.0}, {0.0, 4.0}}, 1.0);
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(h(net, BarycentricPoint::corner(2, j)), net.points[j]);
    auto pair = manual_net({{1.0, 3.0}, {3.0, -1.0}}, 1.0);
    EXPECT_EQ(h(pair, BarycentricPoint::barycenter(1)), (Vector{2.0, 1.0}));
    auto line = manual_net({{0.0}, {1.0}}, 1.0);
    EXPECT_DOUBLE_EQ(h(line, BarycentricPoint({0.3, 0.7}))[0], 0.7);
}

TEST(H, Affinity) {
    std::mt19937_64 rng(5);
    auto net = build_net(Domain::box({0.0, 0.0}, {1.0, 1.0}), SeminormFamily::single(NormKind::l2), 0.4);
    const auto n = net.simplex_dimension();
    for (int s = 0; s < 1000; ++s) {
        auto u = oracle::uniform_simplex(n, rng), v = oracle::uniform_simplex(n, rng);
        const double lambda = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        Vector mix(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) mix[i] = lambda * u[i] + (1 - lambda) * v[i];
        auto hm = h(net, BarycentricPoint(mix, 1e-9));
        auto hu = h(net, BarycentricPoint(u, 1e-9)), hv = h(net, BarycentricPoint(v, 1e-9));
        Vector d(hm.size());
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = hm[i] - lambda * hu[i] - (1 - lambda) * hv[i];
        EXPECT_LT(net.family.aggregate(d), 1e-9);
    }
}

TEST(HInv, ExactRepresentations) {
    auto net = manual_net({{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}, 0.5);
    for (std::size_t j = 0; j < 3; ++j) {
        auto a = h_inv(net, net.points[j]);
        EXPECT_LT(oracle::l1(a.coords(), BarycentricPoint::corner(2, j).coords()), 1e-9);
    }
    auto mid = h_inv(net, Vector{0.5, 0.0});
    EXPECT_LT(oracle::l1(mid.coords(), std::vector<double>{0.5, 0.5, 0.0}), 1e-9);
}

TEST(HInv, FivePointSquareAgainstGridSearch) {
    // Corners and center of the unit square.
    auto net = manual_net({{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}, {0.5, 0.5}}, 0.75);
    std::mt19937_64 rng(6);
    for (int s = 0; s < 5; ++s) {
        Vector x{std::uniform_real_distribution<double>(0.0, 1.0)(rng),
                 std::uniform_real_distribution<double>(0.0, 1.0)(rng)};
        auto alpha = h_inv(net, x);
        const double achieved = net.family.aggregate(sub(h(net, alpha), x));
        EXPECT_LE(achieved, net.epsilon);

        // Exhaustive search over the coefficient simplex at step 1e-2.
        double best = 1e300;
        const int steps = 100;
        for (int a = 0; a <= steps; ++a)
            for (int b = 0; a + b <= steps; ++b)
                for (int c = 0; a + b + c <= steps; ++c)
                    for (int d = 0; a + b + c + d <= steps; ++d) {
                        const double w[5] = {a / 100.0, b / 100.0, c / 100.0, d / 100.0,
                                             (steps - a - b - c - d) / 100.0};
                        double px = 0.0, py = 0.0;
                        for (int k = 0; k < 5; ++k) {
                            px += w[k] * net.points[static_cast<std::size_t>(k)][0];
                            py += w[k] * net.points[static_cast<std::size_t>(k)][1];
                        }
                        best = std::min(best, std::hypot(px - x[0], py - x[1]));
                    }
        EXPECT_LE(achieved, best + 1e-12);
        EXPECT_LT(achieved, 1e-9);

        // Representations of x form alpha + s d1 + t d2; the minimum-norm one by grid search.
        const double d1[5] = {1, -1, -1, 1, 0}, d2[5] = {1, 0, 0, 1, -2};
        double best_norm = 1e300;
        for (int i = -1000; i <= 1000; ++i)
            for (int j = -1000; j <= 1000; ++j) {
                const double si = i * 1e-3, tj = j * 1e-3;
                double nsq = 0.0;
                bool feasible = true;
                for (int k = 0; k < 5 && feasible; ++k) {
                    const double v = alpha[static_cast<std::size_t>(k)] + si * d1[k] + tj * d2[k];
                    feasible = v >= 0.0;
                    nsq += v * v;
                }
                if (feasible) best_norm = std::min(best_norm, nsq);
            }
        double own = 0.0;
        for (double v : alpha.coords()) own += v * v;
        EXPECT_LE(own, best_norm + 1e-9);
    }
}

TEST(HInv, OutsidePointsGetTheBestApproximation) {
    auto net = manual_net({{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}, 0.5);
    auto a = h_inv(net, Vector{0.8, 0.8});
    // The l2 projection of (0.8, 0.8) onto the triangle is (0.5, 0.5).
    auto p = h(net, a);
    EXPECT_NEAR(p[0], 0.5, 1e-6);
    EXPECT_NEAR(p[1], 0.5, 1e-6);
    EXPECT_THROW(h_inv(net, Vector{3.0, 3.0}), ProjectionFailure);
}

TEST(HInv, RoundTripAndLeftIdentity) {
    std::mt19937_64 rng(7);
    for (auto kind : {NormKind::l1, NormKind::l2, NormKind::linf}) {
        const Domain d = Domain::ball({0.2, -0.1}, 0.5, NormKind::l2);
        auto fam = SeminormFamily::single(kind);
        auto net = build_net(d, fam, 0.25);
        for (int s = 0; s < 300; ++s) {
            auto x = d.sample(rng);
            auto a = h_inv(net, x);
            EXPECT_LE(fam.aggregate(sub(h(net, a), x)), net.epsilon);
            auto v = oracle::uniform_simplex(net.simplex_dimension(), rng);
            auto hv = h(net, BarycentricPoint(v, 1e-9));
            auto back = h(net, h_inv(net, hv));
            EXPECT_LT(fam.aggregate(sub(back, hv)), 1e-9);
        }
    }
}

TEST(Lift, IdentityDistortion) {
    std::mt19937_64 rng(8);
    const Domain d = Domain::box({0.0, 0.0}, {1.0, 1.0});
    auto net = std::make_shared<const EpsilonNet>(build_net(d, SeminormFamily::single(NormKind::l2), 0.4));
    auto f = lift([](std::span<const double> x) { return Vector(x.begin(), x.end()); }, net, d);
    EXPECT_EQ(f.dimension, net->simplex_dimension());
    EXPECT_FALSE(f.modulus.has_value());
    for (int s = 0; s < 300; ++s) {
        BarycentricPoint v(oracle::uniform_simplex(f.dimension, rng), 1e-9);
        EXPECT_LE(net->family.aggregate(sub(h(*net, f(v)), h(*net, v))), 2 * net->epsilon);
    }
}

TEST(Lift, ConstantToANetPoint) {
    auto net = std::make_shared<const EpsilonNet>(manual_net({{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}, 0.5));
    const Domain d = Domain::hull(net->points);
    auto f = lift([](std::span<const double>) { return Vector{1.0, 0.0}; }, net, d);
    std::mt19937_64 rng(9);
    for (int s = 0; s < 50; ++s) {
        BarycentricPoint v(oracle::uniform_simplex(2, rng), 1e-9);
        EXPECT_LT(oracle::l1(f(v).coords(), BarycentricPoint::corner(2, 1).coords()), 1e-9);
    }
}

TEST(Lift, RangeViolationCarriesTheAmbientPoint) {
    auto net = std::make_shared<const EpsilonNet>(manual_net({{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}, 0.5));
    const Domain d = Domain::hull(net->points);
    auto f = lift([](std::span<const double> x) { return Vector{x[0] + 5.0, x[1]}; }, net, d);
    try {
        f(BarycentricPoint::corner(2, 0));
        FAIL() << "expected a range violation";
    } catch (const RangeViolation& e) {
        EXPECT_EQ(e.where(), (std::vector<double>{0.0, 0.0}));
    }
}

TEST(Lift, LinearContractionFixedPoint) {
    const Domain d = Domain::box({0.0, 0.0}, {0.006, 0.006});
    const Vector c{0.004, 0.001};
    auto g = maps::ambient_contraction(c, 0.5);
    auto net = std::make_shared<const EpsilonNet>(build_net(d, SeminormFamily::single(NormKind::l2), 0.0025));
    auto f = lift(g, net, d);
    const double eps = 0.5;
    auto r = solve(f, eps);
    ASSERT_TRUE(r.ok());
    auto x = h(*net, r.point);
    // |g(x) - x| <= lambda |f(v) - v| + eps_net, and |x - c| <= |g(x) - x| / (1 - 0.5).
    const double bound = 2.0 * (r.residual * net->h_lipschitz() + net->epsilon);
    EXPECT_LE(std::hypot(x[0] - c[0], x[1] - c[1]), bound);
}

TEST(Schauder, HalvingOnTheUnitBall) {
    auto g = [](std::span<const double> x) { return Vector{x[0] / 2, x[1] / 2}; };
    const double eps = 2.0;
    auto r = schauder_solve(Domain::ball({0.0, 0.0}, 1.0), g, SeminormFamily::single(NormKind::l2), eps);
    ASSERT_TRUE(r.ok());
    EXPECT_LT(std::hypot(r.point[0], r.point[1]), eps + 2 * r.epsilon_net);
    EXPECT_LT(r.ambient_residual, eps + 2 * r.epsilon_net);
}

TEST(Schauder, HalvingOnASmallBallEveryNorm) {
    auto g = [](std::span<const double> x) { return Vector{x[0] / 2, x[1] / 2}; };
    for (auto kind : {NormKind::l1, NormKind::l2, NormKind::linf}) {
        auto fam = SeminormFamily::single(kind);
        auto r = schauder_solve(Domain::ball({0.0, 0.0}, 0.004, kind), g, fam, 1e-2);
        ASSERT_TRUE(r.ok());
        EXPECT_LT(fam.aggregate(r.point), 1e-2 + 2 * r.epsilon_net);
        EXPECT_NEAR(r.ambient_residual, fam.aggregate(sub(g(r.point), r.point)), 1e-15);
    }
}

TEST(Schauder, RotationAndScalingMatchesIteration) {
    const Vector c{0.003, 0.003};
    auto g = maps::ambient_contraction(c, 0.5, M_PI / 2);
    auto limit = oracle::iterate([&](std::span<const double> x) { return g(x); }, {0.0, 0.0});
    ASSERT_LT(std::hypot(limit[0] - c[0], limit[1] - c[1]), 1e-12);
    auto fam = SeminormFamily::single(NormKind::l2);
    auto r = schauder_solve(Domain::box({0.0, 0.0}, {0.006, 0.006}), g, fam, 1e-2);
    ASSERT_TRUE(r.ok());
    EXPECT_LT(r.ambient_residual, 1e-2 + 2 * r.epsilon_net);
    // |x - x*| <= |g(x) - x| / (1 - 0.5).
    EXPECT_LE(std::hypot(r.point[0] - limit[0], r.point[1] - limit[1]), 2 * r.ambient_residual + 1e-15);
    EXPECT_LE(r.ambient_residual, r.h_lipschitz * r.simplex_residual + 2 * r.epsilon_net);
}

TEST(Schauder, FixedPointOnTheBoundary) {
    const Vector corner{0.0, 0.0};
    auto g = maps::ambient_contraction(corner, 0.5);
    auto fam = SeminormFamily::single(NormKind::linf);
    auto r = schauder_solve(Domain::box({0.0, 0.0}, {0.007, 0.005}), g, fam, 1e-2);
    ASSERT_TRUE(r.ok());
    EXPECT_LT(r.ambient_residual, 1e-2 + 2 * r.epsilon_net);
    EXPECT_LE(std::max(r.point[0], r.point[1]), 2 * r.ambient_residual + 1e-15);
}

TEST(Schauder, WiderHullThanTheTarget) {
    // Diameter above eps_target, so the answer is not implied by the domain size.
    std::vector<Vector> gens;
    for (int k = 0; k < 6; ++k)
        gens.push_back({0.006 * std::cos(k * M_PI / 3), 0.006 * std::sin(k * M_PI / 3)});
    const Domain d = Domain::hull(gens);
    auto g = maps::ambient_contraction({0.002, -0.001}, 0.3);
    auto fam = SeminormFamily::single(NormKind::l2);
    auto r = schauder_solve(d, g, fam, 1e-2);
    ASSERT_TRUE(r.ok());
    EXPECT_LT(r.ambient_residual, 1e-2 + 2 * r.epsilon_net);
    EXPECT_LE(std::hypot(r.point[0] - 0.002, r.point[1] + 0.001), r.ambient_residual / 0.7 + 1e-15);
}
