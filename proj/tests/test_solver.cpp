#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "sperner_fix/errors.hpp"
#include "sperner_fix/maps.hpp"
#include "sperner_fix/solver.hpp"
#include "sperner_fix/sperner.hpp"
#include "support/oracles.hpp"

using namespace sperner_fix;

namespace {

/// mesh(m) * m, measured as the largest in-cell l1 vertex distance.
double brute_mesh_constant(int n) {
    const std::int64_t m = 3;
    auto g = subdivide(n, m);
    double worst = 0.0;
    for (const auto& c : g.cells())
        for (auto a : c.vertex_ids)
            for (auto b : c.vertex_ids)
                worst = std::max(worst, oracle::l1(g.vertex_coords(a).coords(), g.vertex_coords(b).coords()));
    return worst * static_cast<double>(m);
}

std::int64_t invert_mesh(double constant, double bound) {
    std::int64_t m = 1;
    while (constant / static_cast<double>(m) >= bound) ++m;
    return m;
}

std::function<oracle::Vec(std::span<const double>)> as_fn(const SelfMap& f) {
    return [&f](std::span<const double> v) { return f.eval(v); };
}

}  // namespace

TEST(RequiredResolution, LipschitzOneInvertsTheMesh) {
    const double c = brute_mesh_constant(2);
    const std::int64_t expected = invert_mesh(c, 0.12 / 12.0);
    EXPECT_EQ(required_resolution(lipschitz_modulus(1.0), 2, 0.12), expected);
}

TEST(RequiredResolution, ScalesInverselyWithLipschitzConstant) {
    const double c = brute_mesh_constant(2);
    const auto m1 = required_resolution(lipschitz_modulus(1.0), 2, 0.12);
    const auto m10 = required_resolution(lipschitz_modulus(10.0), 2, 0.12);
    EXPECT_EQ(m10, invert_mesh(c, 0.12 / 120.0));
    EXPECT_NEAR(static_cast<double>(m10) / static_cast<double>(m1), 10.0, 0.1);
}

TEST(RequiredResolution, HugeEpsilonGivesCoarsestGrid) {
    EXPECT_EQ(required_resolution(lipschitz_modulus(1.0), 2, 30.0), 1);
    EXPECT_THROW(required_resolution(std::nullopt, 2, 0.1), ModulusRequired);
    EXPECT_THROW(required_resolution(lipschitz_modulus(1.0), 2, 0.0), InvalidArgument);
}

TEST(RequiredResolution, AllDimensionsSatisfyTheBound) {
    for (int n = 1; n <= 5; ++n)
        for (double eps : {0.5, 0.1, 0.01})
            for (double L : {0.5, 1.0, 3.0}) {
                const auto m = required_resolution(lipschitz_modulus(L), n, eps);
                const double eta = eps / (2.0 * n * (n + 1));
                const double bound = std::min(eta / L, eta);
                EXPECT_LT(grid_mesh(n, m), bound);
                if (m > 1) EXPECT_GE(grid_mesh(n, m - 1), bound);
            }
}

TEST(Extraction, ConstantMapBoundsHold) {
    auto f = maps::constant(BarycentricPoint::barycenter(2));
    const double eps = 0.05;
    // A constant map has modulus +inf; use the eta part of the bound.
    const auto m = required_resolution(lipschitz_modulus(1.0), 2, eps);
    auto g = subdivide(2, m);
    auto l = std::get<Labeling>(label_grid(g, f, 1e-12));
    for (auto cell : find_fully_labeled_exhaustive(g, l)) {
        auto v = extract_approximation(g, l, f, cell, eps);
        auto b = check_extraction_bounds(v, f(v), eps);
        EXPECT_TRUE(b.holds);
        EXPECT_LT(std::abs(v[0] - 1.0 / 3.0), eps / 3.0);
        EXPECT_LT(oracle::l1(v.coords(), f(v).coords()), eps);
    }
}

TEST(Extraction, BoundsComputedIndependently) {
    BarycentricPoint v({0.5, 0.3, 0.2});
    BarycentricPoint fv({0.49, 0.31, 0.2});
    auto b = check_extraction_bounds(v, fv, 0.1);
    EXPECT_NEAR(b.coordinate0_gap, 0.01, 1e-15);
    EXPECT_NEAR(b.coordinate0_bound, 0.1 / 3.0, 1e-15);
    EXPECT_NEAR(b.max_other_gap, 0.01, 1e-15);
    EXPECT_NEAR(b.other_bound, 0.1 / 6.0, 1e-15);
    EXPECT_NEAR(b.residual, 0.02, 1e-15);
    EXPECT_TRUE(b.holds);
    auto bad = check_extraction_bounds(v, BarycentricPoint({0.3, 0.5, 0.2}), 0.1);
    EXPECT_FALSE(bad.holds);
}

TEST(Extraction, NotFullyLabeledIsRejected) {
    auto g = subdivide(2, 2);
    auto f = maps::cyclic_shift(2);
    auto l = std::get<Labeling>(label_grid(g, f, 1e-3));
    auto full = find_fully_labeled_exhaustive(g, l);
    for (std::size_t c = 0; c < g.cells().size(); ++c)
        if (!std::binary_search(full.begin(), full.end(), c))
            EXPECT_THROW(extract_approximation(g, l, f, c, 1.0), InvalidArgument);
}

TEST(Extraction, CoarseGridForLipschitzMapIsInsufficient) {
    // A grid far coarser than required_resolution asks for: the bound check must fire.
    auto f = maps::cyclic_shift(2);
    auto g = subdivide(2, 2);
    auto l = std::get<Labeling>(label_grid(g, f, 1e-6));
    auto cell = find_fully_labeled_path(g, l);
    EXPECT_THROW(extract_approximation(g, l, f, cell, 1e-3), MeshInsufficiency);
}

TEST(Solve, ConstantMap) {
    BarycentricPoint c({0.2, 0.5, 0.3});
    auto r = solve(maps::constant(c), 1e-3);
    EXPECT_TRUE(r.ok());
    EXPECT_LT(oracle::l1(r.point.coords(), c.coords()), 1e-3);
}

TEST(Solve, CyclicShiftCoarse) {
    auto f = maps::cyclic_shift(2);
    auto [best, best_r] = oracle::grid_search_2d(as_fn(f), 1000);
    ASSERT_LT(oracle::l1(best, std::vector<double>{1.0 / 3, 1.0 / 3, 1.0 / 3}), 2e-3);
    auto r = solve(f, 0.1);
    EXPECT_TRUE(r.ok());
    EXPECT_LT(r.residual, 0.1);
    EXPECT_LT(oracle::l1(r.point.coords(), best), 0.1 + 2e-3);
}

TEST(Solve, CyclicShiftFine) {
    auto r = solve(maps::cyclic_shift(2), 1e-3);
    EXPECT_TRUE(r.ok());
    EXPECT_LT(oracle::l1(r.point.coords(), std::vector<double>{1.0 / 3, 1.0 / 3, 1.0 / 3}), 1e-3);
}

TEST(Solve, HalfwayContractionMatchesIteration) {
    auto f = maps::affine_contraction(BarycentricPoint::barycenter(2), 0.5);
    auto limit = oracle::iterate(as_fn(f), {1.0, 0.0, 0.0});
    // |v - limit| = 2 |f(v) - v| for this map.
    auto r = solve(f, 5e-4);
    EXPECT_TRUE(r.ok());
    EXPECT_LT(oracle::l1(r.point.coords(), limit), 1e-3);
}

TEST(Solve, SquareMapOnTheSegmentFindsACorner) {
    SelfMap f{"square", 1,
              [](std::span<const double> v) {
                  const double a = v[0] * v[0];
                  return std::vector<double>{a, 1.0 - a};
              },
              lipschitz_modulus(4.0)};
    for (double eps : {0.1, 0.01}) {
        auto r = solve(f, eps);
        ASSERT_TRUE(r.ok()) << r.message;
        EXPECT_LT(r.residual, eps);
        // v0^2 = v0 only at v0 in {0, 1}; the residual is 2 v0 (1 - v0).
        EXPECT_LT(std::min(r.point[0], 1.0 - r.point[0]), eps);
    }
}

TEST(Solve, ResidualSoundnessAndTraceShape) {
    std::mt19937_64 rng(21);
    for (int s = 0; s < 6; ++s) {
        const std::size_t n = 1 + s % 3;
        auto p = oracle::random_polynomial(n, rng);
        auto fn = [p](std::span<const double> v) { return p(v); };
        const double L = oracle::sampled_lipschitz(fn, n, rng) * 1.5;
        SelfMap f{"poly", n, fn, lipschitz_modulus(L)};
        auto r = solve(f, 1e-2);
        ASSERT_TRUE(r.ok());
        EXPECT_LT(oracle::l1(f.eval(r.point.coords()), r.point.coords()), 1e-2);
        EXPECT_DOUBLE_EQ(r.residual, oracle::l1(f.eval(r.point.coords()), r.point.coords()));
        for (std::size_t k = 0; k < r.trace.size(); ++k) {
            EXPECT_LT(r.trace[k].residual, r.trace[k].epsilon);
            if (k > 0) EXPECT_LT(r.trace[k].epsilon, r.trace[k - 1].epsilon);
            if (r.trace[k].early_hit) EXPECT_LE(r.trace[k].residual, r.trace[k].epsilon / 4.0);
        }
        if (r.status == SolveStatus::early_vertex_hit) EXPECT_LE(r.residual, 1e-2 / 4.0);
    }
}

TEST(Solve, PathAndExhaustiveAgreeOnResidualBound) {
    auto f = maps::random_contraction(2, 0.5, 3);
    SolverConfig ex;
    ex.search = SearchMode::exhaustive;
    auto a = solve(f, 5e-2);
    auto b = solve(f, 5e-2, ex);
    EXPECT_LT(a.residual, 5e-2);
    EXPECT_LT(b.residual, 5e-2);
    auto limit = oracle::iterate(as_fn(f), {1.0, 0.0, 0.0});
    // |v - limit| <= |f(v) - v| / (1 - 0.5).
    EXPECT_LT(oracle::l1(a.point.coords(), limit), 1e-1);
    EXPECT_LT(oracle::l1(b.point.coords(), limit), 1e-1);
}

TEST(Solve, WorkerCountIndependence) {
    auto f = maps::random_contraction(2, 0.5, 8);
    SolverConfig one, many;
    one.search = many.search = SearchMode::exhaustive;
    many.workers = 4;
    auto a = solve(f, 5e-2, one);
    auto b = solve(f, 5e-2, many);
    EXPECT_EQ(a.point, b.point);
    EXPECT_EQ(a.resolution, b.resolution);
    ASSERT_EQ(a.trace.size(), b.trace.size());
    for (std::size_t k = 0; k < a.trace.size(); ++k) EXPECT_EQ(a.trace[k].point, b.trace[k].point);
}

TEST(Solve, WarmStartKeepsTheGuarantee) {
    auto f = maps::random_contraction(3, 0.8, 11);
    SolverConfig warm;
    warm.warm_start = true;
    auto r = solve(f, 1e-3, warm);
    EXPECT_TRUE(r.ok());
    EXPECT_LT(r.residual, 1e-3);
}

TEST(Solve, ResolutionCapNamesTheNeededResolution) {
    SolverConfig capped;
    capped.max_resolution = 50;
    try {
        solve(maps::cyclic_shift(2), 1e-3, capped);
        FAIL() << "expected a resolution cap";
    } catch (const ResolutionCap& e) {
        EXPECT_GT(e.needed(), 50);
    }
}

TEST(Solve, IdentityAndEdgeFixingAreViolations) {
    for (auto f : {maps::identity(2), maps::edge_fixing(2), maps::identity(1)}) {
        auto r = solve(f, 1e-2);
        EXPECT_EQ(r.status, SolveStatus::non_constancy_violation) << f.name;
        EXPECT_FALSE(r.ok());
        EXPECT_FALSE(r.violating_vertex.empty());
    }
}

TEST(Solve, EstimatedModulusIsMarked) {
    auto f = maps::random_contraction(2, 0.5, 1);
    f.modulus.reset();
    auto r = solve(f, 1e-2);
    EXPECT_TRUE(r.modulus_estimated);
    ASSERT_TRUE(r.lipschitz_estimate.has_value());
    EXPECT_LE(*r.lipschitz_estimate, 0.5 + 1e-9);
    EXPECT_LT(r.residual, 1e-2);
}

TEST(Solve, RejectsBadArguments) {
    EXPECT_THROW(solve(maps::cyclic_shift(2), 0.0), InvalidArgument);
    SolverConfig bad;
    bad.perturbation_scale = 0.5;
    EXPECT_THROW(solve(maps::cyclic_shift(2), 0.1, bad), InvalidArgument);
}

TEST(EstimateModulus, LinearMapWithinFactorTwo) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto f = maps::random_stochastic(2, seed);
        // l1 operator norm on zero-sum vectors: half the largest column difference.
        std::vector<oracle::Vec> cols;
        for (int k = 0; k <= 2; ++k) cols.push_back(f.eval(BarycentricPoint::corner(2, static_cast<std::size_t>(k)).coords()));
        double L = 0.0;
        for (const auto& a : cols)
            for (const auto& b : cols) L = std::max(L, 0.5 * oracle::l1(a, b));
        auto est = estimate_modulus(f, 1000, seed);
        EXPECT_GE(est.lipschitz, 0.9 * L);
        EXPECT_LE(est.lipschitz, 2.0 * L);
    }
}

TEST(EstimateModulus, ConstantAndIdentity) {
    auto c = estimate_modulus(maps::constant(BarycentricPoint::barycenter(3)), 1000, 1);
    EXPECT_EQ(c.lipschitz, 0.0);
    EXPECT_EQ(c.modulus(0.1), 2.0);
    auto id = estimate_modulus(maps::identity(3), 1000, 1);
    EXPECT_NEAR(id.lipschitz, 1.0, 0.1);
    EXPECT_THROW(estimate_modulus(maps::identity(2), 1, 1), InvalidArgument);
}

TEST(Slnc, ContractionIsClean) {
    auto rep = slnc_diagnostic(maps::affine_contraction(BarycentricPoint::barycenter(2), 0.5), 0.5, 6, 30, 1);
    EXPECT_FALSE(rep.balls.empty());
    EXPECT_EQ(rep.flagged, 0u);
}

TEST(Slnc, IdentityFlagsEveryBall) {
    auto rep = slnc_diagnostic(maps::identity(2), 0.5, 6, 30, 1);
    EXPECT_EQ(rep.flagged, rep.balls.size());
}

TEST(Slnc, EdgeFixingFlagsExactlyTheBallsMeetingTheEdge) {
    auto rep = slnc_diagnostic(maps::edge_fixing(2), 0.5, 8, 40, 2);
    std::size_t meeting = 0;
    for (const auto& b : rep.balls) {
        // l1 distance from the center to the edge v_2 = 0 is 2 c_2.
        const bool meets = 2.0 * b.center[2] < rep.epsilon;
        meeting += meets;
        EXPECT_EQ(b.suspected_violation, meets) << "center " << b.center[0] << "," << b.center[1];
    }
    EXPECT_GT(meeting, 0u);
    EXPECT_LT(meeting, rep.balls.size());
    EXPECT_EQ(rep.flagged, meeting);
}
