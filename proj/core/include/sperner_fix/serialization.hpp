#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "sperner_fix/embedding.hpp"
#include "sperner_fix/labeling.hpp"
#include "sperner_fix/simplex.hpp"
#include "sperner_fix/solver.hpp"

namespace sperner_fix {

using Json = nlohmann::ordered_json;

std::string to_string(Provenance p);
Provenance parse_provenance(const std::string& name);

/// {n, m, vertices: [[numerators]], cells: [[vertex ids]]}
Json grid_to_json(const SimplexGrid& grid);
SimplexGrid grid_from_json(const Json& doc);

/// {provenance, labels: {"id": label}}
Json labeling_to_json(const Labeling& labeling);
Labeling labeling_from_json(const Json& doc);

Json config_to_json(const SolverConfig& config);

/// {point, residual, m, trace, status, ..., config}
Json result_to_json(const FixedPointResult& result, const Json& config);

/// Point, residual, resolution, status and trace of a stored result.
FixedPointResult result_from_json(const Json& doc);

/// Columns: level, eps, residual, m, early, p0..pn.
std::string trace_to_csv(const FixedPointResult& result);

Json domain_to_json(const Domain& domain);
Domain domain_from_json(const Json& doc);

/// Accepts a single object {type: "norm", kind} or a list of member objects.
SeminormFamily family_from_json(const Json& doc);
Json family_to_json(const SeminormFamily& family);

/// {type: "contraction", center, factor, angle} | {type: "affine", matrix, offset}
AmbientMap ambient_map_from_json(const Json& doc);

Json schauder_result_to_json(const SchauderResult& result, const Json& config);

}  // namespace sperner_fix
