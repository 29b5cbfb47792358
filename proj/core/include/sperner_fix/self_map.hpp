#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sperner_fix/simplex.hpp"

namespace sperner_fix {

/// delta(eps): pairs closer than delta (l1) have images closer than eps.
using Modulus = std::function<double(double)>;

/// Evaluatable self-map of the n-simplex. `eval` must be pure: it may be
/// called from several threads at once.
struct SelfMap {
    std::string name;
    std::size_t dimension = 0;
    std::function<std::vector<double>(std::span<const double>)> eval;
    std::optional<Modulus> modulus;
    bool modulus_estimated = false;

    /// Evaluates and checks that the image lies in the simplex; throws RangeViolation.
    BarycentricPoint operator()(const BarycentricPoint& v) const;
};

/// |f(v) - v|_1.
double residual(const SelfMap& f, const BarycentricPoint& v);

inline Modulus lipschitz_modulus(double constant) {
    return [constant](double eps) { return constant > 0.0 ? eps / constant : 2.0; };
}

}  // namespace sperner_fix
