#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sperner_fix/embedding.hpp"
#include "sperner_fix/self_map.hpp"
#include "sperner_fix/simplex.hpp"

namespace sperner_fix::maps {

/// f(v) = c.
SelfMap constant(BarycentricPoint c);

/// f(v)_i = v_{i-1 mod n+1}; the barycenter is its only fixed point.
SelfMap cyclic_shift(int n);

/// f(v) = (1 - k) c + k P v with P column-stochastic (P = I when empty).
/// An l1 contraction of factor k.
SelfMap affine_contraction(BarycentricPoint center, double factor,
                           std::vector<std::vector<double>> stochastic = {});

/// f(v)_i = (v_{i-1}^2 + 1/(n+1)) / (|v|_2^2 + 1). Fixes the barycenter.
SelfMap quadratic(int n);

/// Fixes the edge from corner 0 to corner 1 pointwise: the mass of the other
/// coordinates is split evenly between coordinates 0 and 1. Needs n >= 2.
SelfMap edge_fixing(int n);

SelfMap identity(int n);

/// f(v) = P v for a random column-stochastic P (Dirichlet columns).
SelfMap random_stochastic(int n, std::uint64_t seed);

/// Random affine contraction: random center, random P, the given factor.
SelfMap random_contraction(int n, double factor, std::uint64_t seed);

/// Iterates f from the barycenter until successive iterates are within tol.
BarycentricPoint banach_iterate(const SelfMap& f, double tol = 1e-15, int max_iter = 100000);

/// Names accepted by builtin(): constant, cyclic-shift, affine-contraction,
/// quadratic, edge-fixing, identity.
const std::vector<std::string>& builtin_names();
SelfMap builtin(const std::string& name, int n);

/// g(x) = c + k R(angle) (x - c); rotation only in two dimensions.
AmbientMap ambient_contraction(Vector center, double factor, double angle = 0.0);

/// g(x) = A x + b.
AmbientMap ambient_affine(std::vector<Vector> matrix, Vector offset);

}  // namespace sperner_fix::maps
