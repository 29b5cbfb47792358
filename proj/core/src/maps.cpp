#include "sperner_fix/maps.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>

#include "sperner_fix/errors.hpp"

namespace sperner_fix::maps {

namespace {

void require_dimension(int n, int minimum, const char* name) {
    if (n < minimum)
        throw InvalidArgument(std::string(name) + " needs n >= " + std::to_string(minimum));
}

std::vector<double> dirichlet(std::size_t k, std::mt19937_64& rng) {
    std::exponential_distribution<double> expo(1.0);
    std::vector<double> w(k);
    double total = 0.0;
    for (double& x : w) total += (x = expo(rng));
    for (double& x : w) x /= total;
    return w;
}

}  // namespace

SelfMap constant(BarycentricPoint c) {
    SelfMap f;
    f.name = "constant";
    f.dimension = c.dimension();
    f.eval = [c = std::move(c)](std::span<const double>) {
        return std::vector<double>(c.coords().begin(), c.coords().end());
    };
    f.modulus = lipschitz_modulus(0.0);
    return f;
}

SelfMap cyclic_shift(int n) {
    require_dimension(n, 0, "cyclic-shift");
    SelfMap f;
    f.name = "cyclic-shift";
    f.dimension = static_cast<std::size_t>(n);
    f.eval = [](std::span<const double> v) {
        std::vector<double> out(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[(i + v.size() - 1) % v.size()];
        return out;
    };
    f.modulus = lipschitz_modulus(1.0);
    return f;
}

SelfMap affine_contraction(BarycentricPoint center, double factor,
                           std::vector<std::vector<double>> stochastic) {
    if (!(factor >= 0.0 && factor < 1.0)) throw InvalidArgument("contraction factor must lie in [0, 1)");
    const std::size_t size = center.size();
    if (!stochastic.empty()) {
        if (stochastic.size() != size) throw InvalidArgument("stochastic matrix has the wrong size");
        for (std::size_t j = 0; j < size; ++j) {
            double col = 0.0;
            for (std::size_t i = 0; i < size; ++i) {
                if (stochastic[i].size() != size || stochastic[i][j] < 0.0)
                    throw InvalidArgument("stochastic matrix must be square and non-negative");
                col += stochastic[i][j];
            }
            if (std::abs(col - 1.0) > 1e-12) throw InvalidArgument("stochastic matrix columns must sum to 1");
        }
    }
    SelfMap f;
    f.name = "affine-contraction";
    f.dimension = center.dimension();
    f.eval = [c = std::move(center), factor, p = std::move(stochastic)](std::span<const double> v) {
        std::vector<double> out(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            double pv = 0.0;
            if (p.empty()) {
                pv = v[i];
            } else {
                for (std::size_t j = 0; j < v.size(); ++j) pv += p[i][j] * v[j];
            }
            out[i] = (1.0 - factor) * c[i] + factor * pv;
        }
        return out;
    };
    f.modulus = lipschitz_modulus(factor);
    return f;
}

SelfMap quadratic(int n) {
    require_dimension(n, 0, "quadratic");
    SelfMap f;
    f.name = "quadratic";
    f.dimension = static_cast<std::size_t>(n);
    f.eval = [](std::span<const double> v) {
        const std::size_t k = v.size();
        double sq = 0.0;
        for (double x : v) sq += x * x;
        const double lift = 1.0 / static_cast<double>(k);
        std::vector<double> out(k);
        for (std::size_t i = 0; i < k; ++i) {
            const double prev = v[(i + k - 1) % k];
            out[i] = (prev * prev + lift) / (sq + 1.0);
        }
        return out;
    };
    f.modulus = lipschitz_modulus(4.0);
    return f;
}

SelfMap edge_fixing(int n) {
    require_dimension(n, 2, "edge-fixing");
    SelfMap f;
    f.name = "edge-fixing";
    f.dimension = static_cast<std::size_t>(n);
    f.eval = [](std::span<const double> v) {
        double rest = 0.0;
        for (std::size_t i = 2; i < v.size(); ++i) rest += v[i];
        std::vector<double> out(v.size(), 0.0);
        out[0] = v[0] + rest / 2.0;
        out[1] = v[1] + rest / 2.0;
        return out;
    };
    f.modulus = lipschitz_modulus(1.0);
    return f;
}

SelfMap identity(int n) {
    require_dimension(n, 0, "identity");
    SelfMap f;
    f.name = "identity";
    f.dimension = static_cast<std::size_t>(n);
    f.eval = [](std::span<const double> v) { return std::vector<double>(v.begin(), v.end()); };
    f.modulus = lipschitz_modulus(1.0);
    return f;
}

SelfMap random_stochastic(int n, std::uint64_t seed) {
    require_dimension(n, 1, "random-stochastic");
    std::mt19937_64 rng(seed);
    const auto k = static_cast<std::size_t>(n + 1);
    std::vector<std::vector<double>> p(k, std::vector<double>(k));
    for (std::size_t j = 0; j < k; ++j) {
        auto col = dirichlet(k, rng);
        for (std::size_t i = 0; i < k; ++i) p[i][j] = col[i];
    }
    SelfMap f;
    f.name = "random-stochastic";
    f.dimension = static_cast<std::size_t>(n);
    f.eval = [p = std::move(p)](std::span<const double> v) {
        std::vector<double> out(v.size(), 0.0);
        for (std::size_t i = 0; i < v.size(); ++i)
            for (std::size_t j = 0; j < v.size(); ++j) out[i] += p[i][j] * v[j];
        return out;
    };
    f.modulus = lipschitz_modulus(1.0);
    return f;
}

SelfMap random_contraction(int n, double factor, std::uint64_t seed) {
    require_dimension(n, 1, "random-contraction");
    std::mt19937_64 rng(seed);
    const auto k = static_cast<std::size_t>(n + 1);
    BarycentricPoint center(dirichlet(k, rng));
    std::vector<std::vector<double>> p(k, std::vector<double>(k));
    for (std::size_t j = 0; j < k; ++j) {
        auto col = dirichlet(k, rng);
        for (std::size_t i = 0; i < k; ++i) p[i][j] = col[i];
    }
    // Re-close the columns exactly after rounding.
    for (std::size_t j = 0; j < k; ++j) {
        double rest = 0.0;
        for (std::size_t i = 1; i < k; ++i) rest += p[i][j];
        p[0][j] = std::max(0.0, 1.0 - rest);
    }
    SelfMap f = affine_contraction(std::move(center), factor, std::move(p));
    f.name = "random-contraction";
    return f;
}

BarycentricPoint banach_iterate(const SelfMap& f, double tol, int max_iter) {
    BarycentricPoint x = BarycentricPoint::barycenter(f.dimension);
    for (int it = 0; it < max_iter; ++it) {
        BarycentricPoint next = f(x);
        const double step = l1_distance(next.coords(), x.coords());
        x = std::move(next);
        if (step <= tol) break;
    }
    return x;
}

const std::vector<std::string>& builtin_names() {
    static const std::vector<std::string> names{"constant", "cyclic-shift", "affine-contraction",
                                                "quadratic", "edge-fixing", "identity"};
    return names;
}

SelfMap builtin(const std::string& name, int n) {
    if (n < 0) throw InvalidArgument("dimension must be non-negative");
    const auto k = static_cast<std::size_t>(n);
    if (name == "constant") return constant(BarycentricPoint::barycenter(k));
    if (name == "cyclic-shift") return cyclic_shift(n);
    if (name == "affine-contraction") {
        // Pull toward corner 0 composed with a cyclic rotation of the coordinates.
        std::vector<std::vector<double>> p(k + 1, std::vector<double>(k + 1, 0.0));
        for (std::size_t i = 0; i <= k; ++i) p[i][(i + k) % (k + 1)] = 1.0;
        std::vector<double> c(k + 1, 0.5 / static_cast<double>(std::max<std::size_t>(k, 1)));
        c[0] = k == 0 ? 1.0 : 0.5;
        SelfMap f = affine_contraction(BarycentricPoint(std::move(c)), 0.5, std::move(p));
        return f;
    }
    if (name == "quadratic") return quadratic(n);
    if (name == "edge-fixing") return edge_fixing(n);
    if (name == "identity") return identity(n);
    throw InvalidArgument("unknown map '" + name + "'");
}

AmbientMap ambient_contraction(Vector center, double factor, double angle) {
    if (!(factor >= 0.0 && factor < 1.0)) throw InvalidArgument("contraction factor must lie in [0, 1)");
    if (angle != 0.0 && center.size() != 2)
        throw InvalidArgument("rotation angle needs a two-dimensional domain");
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return [center = std::move(center), factor, c, s](std::span<const double> x) {
        Vector d(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) d[i] = x[i] - center[i];
        Vector out(x.size());
        if (x.size() == 2) {
            out[0] = center[0] + factor * (c * d[0] - s * d[1]);
            out[1] = center[1] + factor * (s * d[0] + c * d[1]);
        } else {
            for (std::size_t i = 0; i < x.size(); ++i) out[i] = center[i] + factor * d[i];
        }
        return out;
    };
}

AmbientMap ambient_affine(std::vector<Vector> matrix, Vector offset) {
    for (const auto& row : matrix)
        if (row.size() != offset.size() || matrix.size() != offset.size())
            throw InvalidArgument("affine map needs a square matrix matching the offset");
    return [a = std::move(matrix), b = std::move(offset)](std::span<const double> x) {
        Vector out = b;
        for (std::size_t i = 0; i < b.size(); ++i)
            for (std::size_t j = 0; j < b.size(); ++j) out[i] += a[i][j] * x[j];
        return out;
    };
}

}  // namespace sperner_fix::maps
