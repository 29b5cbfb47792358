#include "sperner_fix/self_map.hpp"

#include <sstream>

#include "sperner_fix/errors.hpp"

namespace sperner_fix {

BarycentricPoint SelfMap::operator()(const BarycentricPoint& v) const {
    std::vector<double> image = eval(v.coords());
    if (image.size() != v.size() || !is_in_simplex(image)) {
        std::ostringstream msg;
        msg << "range violation: map '" << name << "' leaves the simplex at (";
        for (std::size_t i = 0; i < v.size(); ++i) msg << (i ? ", " : "") << v[i];
        msg << ')';
        throw RangeViolation(std::vector<double>(v.coords().begin(), v.coords().end()), msg.str());
    }
    return BarycentricPoint(std::move(image));
}

double residual(const SelfMap& f, const BarycentricPoint& v) {
    BarycentricPoint image = f(v);
    return l1_distance(image.coords(), v.coords());
}

}  // namespace sperner_fix
