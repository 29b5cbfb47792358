#include "sperner_fix/serialization.hpp"

#include <sstream>

#include "sperner_fix/errors.hpp"
#include "sperner_fix/maps.hpp"

namespace sperner_fix {

namespace {

const Json& field(const Json& doc, const char* key) {
    if (!doc.is_object()) throw InvalidArgument("expected a JSON object around field '" + std::string(key) + "'");
    auto it = doc.find(key);
    if (it == doc.end()) throw InvalidArgument("missing field '" + std::string(key) + "'");
    return *it;
}

template <typename T>
T get_as(const Json& doc, const char* key) {
    try {
        return field(doc, key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument("field '" + std::string(key) + "': " + e.what());
    }
}

Json point_json(const BarycentricPoint& p) {
    return Json(std::vector<double>(p.coords().begin(), p.coords().end()));
}

}  // namespace

std::string to_string(Provenance p) {
    return p == Provenance::rule_based ? "rule_based" : "function_induced";
}

Provenance parse_provenance(const std::string& name) {
    if (name == "rule_based") return Provenance::rule_based;
    if (name == "function_induced") return Provenance::function_induced;
    throw InvalidArgument("unknown provenance '" + name + "'");
}

Json grid_to_json(const SimplexGrid& grid) {
    Json doc;
    doc["n"] = grid.dimension();
    doc["m"] = grid.resolution();
    doc["vertices"] = grid.vertices();
    Json cells = Json::array();
    for (const auto& c : grid.cells()) cells.push_back(c.vertex_ids);
    doc["cells"] = std::move(cells);
    return doc;
}

SimplexGrid grid_from_json(const Json& doc) {
    const int n = get_as<int>(doc, "n");
    const auto m = get_as<std::int64_t>(doc, "m");
    SimplexGrid grid = subdivide(n, m);
    const auto vertices = get_as<std::vector<LatticePoint>>(doc, "vertices");
    const auto cells = get_as<std::vector<std::vector<std::size_t>>>(doc, "cells");
    if (vertices != grid.vertices()) throw InvalidArgument("field 'vertices' does not match the subdivision");
    if (cells.size() != grid.cells().size())
        throw InvalidArgument("field 'cells' does not match the subdivision");
    for (std::size_t c = 0; c < cells.size(); ++c)
        if (cells[c] != grid.cells()[c].vertex_ids)
            throw InvalidArgument("field 'cells' differs at cell " + std::to_string(c));
    return grid;
}

Json labeling_to_json(const Labeling& labeling) {
    Json doc;
    doc["provenance"] = to_string(labeling.provenance);
    Json labels = Json::object();
    for (std::size_t id = 0; id < labeling.labels.size(); ++id)
        labels[std::to_string(id)] = labeling.labels[id];
    doc["labels"] = std::move(labels);
    return doc;
}

Labeling labeling_from_json(const Json& doc) {
    Labeling labeling;
    labeling.provenance = parse_provenance(get_as<std::string>(doc, "provenance"));
    const Json& labels = field(doc, "labels");
    if (!labels.is_object()) throw InvalidArgument("field 'labels' must map vertex ids to labels");
    labeling.labels.assign(labels.size(), -1);
    for (const auto& [key, value] : labels.items()) {
        std::size_t id = 0;
        try {
            std::size_t used = 0;
            id = std::stoul(key, &used);
            if (used != key.size()) throw std::invalid_argument(key);
        } catch (const std::exception&) {
            throw InvalidArgument("field 'labels': bad vertex id '" + key + "'");
        }
        if (id >= labeling.labels.size())
            throw IncompleteLabeling("field 'labels': vertex ids are not contiguous");
        labeling.labels[id] = value.get<int>();
    }
    return labeling;
}

Json config_to_json(const SolverConfig& config) {
    Json doc;
    doc["epsilon0"] = config.epsilon0;
    if (config.tau_fix) doc["tau_fix"] = *config.tau_fix;
    else doc["tau_fix"] = "eps/4";
    doc["tau_cmp"] = kCompareTolerance;
    doc["tau_nonconstant"] = config.tau_nonconstant;
    doc["perturbation_scale"] = config.perturbation_scale;
    doc["max_attempts"] = config.max_attempts;
    doc["seed"] = config.seed;
    doc["max_resolution"] = config.max_resolution;
    doc["max_pivots"] = config.max_pivots;
    doc["search"] = to_string(config.search);
    doc["warm_start"] = config.warm_start;
    doc["modulus_samples"] = config.modulus_samples;
    return doc;
}

Json result_to_json(const FixedPointResult& result, const Json& config) {
    Json doc;
    doc["status"] = to_string(result.status);
    doc["point"] = result.point.size() ? point_json(result.point) : Json::array();
    doc["residual"] = result.residual;
    doc["m"] = result.resolution;
    doc["modulus_estimated"] = result.modulus_estimated;
    if (result.lipschitz_estimate) doc["lipschitz_estimate"] = *result.lipschitz_estimate;
    if (!result.message.empty()) doc["message"] = result.message;
    if (!result.violating_vertex.empty()) doc["violating_vertex"] = result.violating_vertex;
    Json trace = Json::array();
    for (const auto& step : result.trace) {
        Json s;
        s["eps"] = step.epsilon;
        s["point"] = point_json(step.point);
        s["residual"] = step.residual;
        s["m"] = step.resolution;
        s["early"] = step.early_hit;
        s["pivots"] = step.pivots;
        trace.push_back(std::move(s));
    }
    doc["trace"] = std::move(trace);
    doc["config"] = config;
    return doc;
}

FixedPointResult result_from_json(const Json& doc) {
    FixedPointResult r;
    const auto status = get_as<std::string>(doc, "status");
    if (status == "converged") r.status = SolveStatus::converged;
    else if (status == "early_vertex_hit") r.status = SolveStatus::early_vertex_hit;
    else if (status == "non_constancy_violation") r.status = SolveStatus::non_constancy_violation;
    else throw InvalidArgument("field 'status': unknown value '" + status + "'");
    r.point = BarycentricPoint(get_as<std::vector<double>>(doc, "point"));
    r.residual = get_as<double>(doc, "residual");
    r.resolution = get_as<std::int64_t>(doc, "m");
    r.modulus_estimated = get_as<bool>(doc, "modulus_estimated");
    for (const auto& s : field(doc, "trace")) {
        RefinementStep step;
        step.epsilon = get_as<double>(s, "eps");
        step.point = BarycentricPoint(get_as<std::vector<double>>(s, "point"));
        step.residual = get_as<double>(s, "residual");
        step.resolution = get_as<std::int64_t>(s, "m");
        step.early_hit = get_as<bool>(s, "early");
        step.pivots = get_as<std::size_t>(s, "pivots");
        r.trace.push_back(std::move(step));
    }
    return r;
}

std::string trace_to_csv(const FixedPointResult& result) {
    std::ostringstream out;
    out.precision(17);
    const std::size_t width = result.trace.empty() ? 0 : result.trace.front().point.size();
    out << "level,eps,residual,m,early";
    for (std::size_t i = 0; i < width; ++i) out << ",p" << i;
    out << '\n';
    for (std::size_t k = 0; k < result.trace.size(); ++k) {
        const auto& s = result.trace[k];
        out << k << ',' << s.epsilon << ',' << s.residual << ',' << s.resolution << ','
            << (s.early_hit ? 1 : 0);
        for (double p : s.point.coords()) out << ',' << p;
        out << '\n';
    }
    return out.str();
}

Json domain_to_json(const Domain& domain) {
    Json doc;
    doc["ambient_dim"] = domain.ambient_dim;
    switch (domain.kind) {
        case Domain::Kind::box:
            doc["type"] = "box";
            doc["lower"] = domain.lower;
            doc["upper"] = domain.upper;
            break;
        case Domain::Kind::ball:
            doc["type"] = "ball";
            doc["center"] = domain.center;
            doc["radius"] = domain.radius;
            doc["norm"] = to_string(domain.ball_norm);
            break;
        case Domain::Kind::hull:
            doc["type"] = "hull";
            doc["generators"] = domain.generators;
            break;
    }
    return doc;
}

Domain domain_from_json(const Json& doc) {
    const auto type = get_as<std::string>(doc, "type");
    Domain d;
    if (type == "box") {
        d = Domain::box(get_as<Vector>(doc, "lower"), get_as<Vector>(doc, "upper"));
    } else if (type == "ball") {
        NormKind norm = NormKind::l2;
        if (doc.contains("norm")) norm = parse_norm_kind(get_as<std::string>(doc, "norm"));
        d = Domain::ball(get_as<Vector>(doc, "center"), get_as<double>(doc, "radius"), norm);
    } else if (type == "hull") {
        d = Domain::hull(get_as<std::vector<Vector>>(doc, "generators"));
    } else {
        throw InvalidArgument("field 'type': unknown domain type '" + type + "'");
    }
    if (doc.contains("ambient_dim") && get_as<std::size_t>(doc, "ambient_dim") != d.ambient_dim)
        throw InvalidArgument("field 'ambient_dim' disagrees with the domain data");
    return d;
}

namespace {

Seminorm seminorm_from_json(const Json& doc) {
    const auto type = get_as<std::string>(doc, "type");
    if (type == "coordinate") return Seminorm::coordinate(get_as<std::size_t>(doc, "index"));
    if (type == "functional") return Seminorm::functional(get_as<Vector>(doc, "vector"));
    if (type == "norm") return Seminorm::make_norm(parse_norm_kind(get_as<std::string>(doc, "kind")));
    throw InvalidArgument("field 'type': unknown seminorm type '" + type + "'");
}

Json seminorm_to_json(const Seminorm& p) {
    Json doc;
    switch (p.kind) {
        case Seminorm::Kind::coordinate:
            doc["type"] = "coordinate";
            doc["index"] = p.index;
            break;
        case Seminorm::Kind::functional:
            doc["type"] = "functional";
            doc["vector"] = p.weights;
            break;
        case Seminorm::Kind::norm:
            doc["type"] = "norm";
            doc["kind"] = to_string(p.norm);
            break;
    }
    return doc;
}

}  // namespace

SeminormFamily family_from_json(const Json& doc) {
    if (doc.is_object()) {
        if (doc.contains("members")) {
            std::vector<Seminorm> members;
            for (const auto& m : field(doc, "members")) members.push_back(seminorm_from_json(m));
            if (doc.contains("active"))
                return SeminormFamily(std::move(members),
                                      get_as<std::vector<std::size_t>>(doc, "active"));
            return SeminormFamily(std::move(members));
        }
        return SeminormFamily({seminorm_from_json(doc)});
    }
    if (!doc.is_array() || doc.empty()) throw InvalidArgument("seminorm family must be an object or a non-empty list");
    std::vector<Seminorm> members;
    for (const auto& m : doc) members.push_back(seminorm_from_json(m));
    return SeminormFamily(std::move(members));
}

Json family_to_json(const SeminormFamily& family) {
    Json doc;
    Json members = Json::array();
    for (const auto& p : family.members()) members.push_back(seminorm_to_json(p));
    doc["members"] = std::move(members);
    doc["active"] = family.active();
    return doc;
}

AmbientMap ambient_map_from_json(const Json& doc) {
    const auto type = get_as<std::string>(doc, "type");
    if (type == "contraction") {
        const double angle = doc.contains("angle") ? get_as<double>(doc, "angle") : 0.0;
        return maps::ambient_contraction(get_as<Vector>(doc, "center"), get_as<double>(doc, "factor"),
                                         angle);
    }
    if (type == "affine")
        return maps::ambient_affine(get_as<std::vector<Vector>>(doc, "matrix"),
                                    get_as<Vector>(doc, "offset"));
    throw InvalidArgument("field 'type': unknown map type '" + type + "'");
}

Json schauder_result_to_json(const SchauderResult& result, const Json& config) {
    Json doc;
    doc["status"] = to_string(result.simplex.status);
    doc["point"] = result.point;
    doc["ambient_residual"] = result.ambient_residual;
    doc["simplex_residual"] = result.simplex_residual;
    doc["simplex_target"] = result.simplex_target;
    doc["epsilon_net"] = result.epsilon_net;
    doc["h_lipschitz"] = result.h_lipschitz;
    doc["net_size"] = result.net_size;
    doc["simplex"] = result_to_json(result.simplex, Json::object());
    doc["simplex"].erase("config");
    doc["config"] = config;
    return doc;
}

}  // namespace sperner_fix
