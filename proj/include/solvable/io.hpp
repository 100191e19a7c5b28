#pragma once

// Recipes, reports and plot tables.
//
// A recipe names an engine and fills its slots from the catalog:
//
//   {"schema": "solvable-recipe/1", "engine": "grosse",
//    "potentials": {"V0": {"name": "exponential"},
//                   "V1": {"name": "inverse_square_shape", "params": {"lambda": -35}}},
//    "depth": 1, "outputs": ["report", "plot"]}

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "solvable/catalog.hpp"
#include "solvable/transform.hpp"
#include "solvable/verify.hpp"

namespace solvable {

using json = nlohmann::ordered_json;

inline constexpr const char* kRecipeSchema = "solvable-recipe/1";
inline constexpr const char* kReportSchema = "solvable-report/1";

/// Recipe validation failure; `field()` is the JSON path of the offending entry.
class RecipeError : public InvalidParameter {
public:
    RecipeError(const std::string& field, const std::string& what)
        : InvalidParameter(field + ": " + what), field_(field) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

struct PotentialSlot {
    std::string name;
    std::map<std::string, double> params;
};

struct Recipe {
    Engine engine = Engine::theorem1;
    std::map<std::string, PotentialSlot> potentials;
    int ell = 0;
    double scale = 1.0;
    std::optional<GridSpec> grid;
    std::optional<double> verify_lo;
    std::optional<double> verify_hi;
    Tolerances tolerances;
    int depth = 1;
    std::vector<std::string> outputs{"report"};

    bool wants(const std::string& output) const {
        return std::find(outputs.begin(), outputs.end(), output) != outputs.end();
    }
    const PotentialSlot& slot(const std::string& key) const { return potentials.at(key); }
};

/// Slots each engine needs, in order: V0 is always the auxiliary potential.
inline std::vector<std::string> engine_slots(Engine e) {
    switch (e) {
        case Engine::theorem1: return {"V0", "V"};
        case Engine::grosse: return {"V0", "V1"};
        case Engine::theorem2: return {"V0", "V1", "V"};
        case Engine::higher_ell: return {"V0", "V1"};
    }
    return {};
}

namespace detail {

inline void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (const char* a : allowed) known = known || key == a;
        if (!known) throw RecipeError(path + key, "unknown field");
    }
}

inline double number_at(const json& obj, const std::string& key, const std::string& path) {
    const json& v = obj.at(key);
    if (!v.is_number()) throw RecipeError(path + key, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw RecipeError(path + key, "must be finite");
    return x;
}

inline int integer_at(const json& obj, const std::string& key, const std::string& path) {
    const json& v = obj.at(key);
    if (!v.is_number_integer()) throw RecipeError(path + key, "expected an integer");
    return v.get<int>();
}

/// "V₀" and "V₁" are accepted for "V0" and "V1".
inline std::string slot_key(std::string key) {
    for (const auto& [from, to] : {std::pair<std::string, std::string>{"\u2080", "0"}, {"\u2081", "1"}}) {
        if (const auto at = key.find(from); at != std::string::npos) key.replace(at, from.size(), to);
    }
    return key;
}

inline PotentialSlot parse_slot(const json& j, const std::string& path) {
    if (!j.is_object()) throw RecipeError(path, "expected an object with \"name\" and optional \"params\"");
    reject_unknown(j, path + ".", {"name", "params"});
    if (!j.contains("name") || !j["name"].is_string()) throw RecipeError(path + ".name", "missing catalog name");
    PotentialSlot slot;
    slot.name = j["name"].get<std::string>();
    const CatalogInfo* info = nullptr;
    try {
        info = &catalog_info(slot.name);
    } catch (const InvalidParameter&) {
        throw RecipeError(path + ".name", "unknown catalog entry '" + slot.name + "'");
    }
    if (j.contains("params")) {
        const json& p = j["params"];
        if (!p.is_object()) throw RecipeError(path + ".params", "expected an object");
        for (const auto& [key, value] : p.items()) {
            if (!info->defaults.contains(key)) {
                throw RecipeError(path + ".params." + key, "entry '" + info->key + "' has no such parameter");
            }
            slot.params[key] = number_at(p, key, path + ".params.");
        }
    }
    try {
        (void)make_entry(slot.name, slot.params);
    } catch (const InvalidParameter& e) {
        throw RecipeError(path + ".params", e.what());
    }
    return slot;
}

}  // namespace detail

inline Recipe parse_recipe(const json& j) {
    if (!j.is_object()) throw RecipeError("recipe", "expected a JSON object");
    detail::reject_unknown(j, "",
                           {"schema", "engine", "potentials", "ell", "scale", "grid", "tolerances", "depth", "outputs"});
    if (j.contains("schema") && j["schema"] != kRecipeSchema) {
        throw RecipeError("schema", std::string("expected \"") + kRecipeSchema + "\"");
    }
    Recipe r;
    if (!j.contains("engine") || !j["engine"].is_string()) throw RecipeError("engine", "missing engine name");
    try {
        r.engine = parse_engine(j["engine"].get<std::string>());
    } catch (const InvalidParameter&) {
        throw RecipeError("engine", "unknown engine '" + j["engine"].get<std::string>() +
                                        "' (theorem1, grosse, theorem2, higher_ell)");
    }
    if (!j.contains("potentials") || !j["potentials"].is_object()) {
        throw RecipeError("potentials", "missing potentials object");
    }
    const json& pots = j["potentials"];
    const auto slots = engine_slots(r.engine);
    for (const auto& [raw, value] : pots.items()) {
        const std::string key = detail::slot_key(raw);
        if (r.potentials.contains(key)) throw RecipeError("potentials." + raw, "slot given twice");
        if (std::find(slots.begin(), slots.end(), key) == slots.end()) {
            throw RecipeError("potentials." + key, "slot not used by engine " + engine_name(r.engine));
        }
        r.potentials[key] = detail::parse_slot(value, "potentials." + key);
    }
    for (const auto& key : slots) {
        if (!r.potentials.contains(key)) {
            throw RecipeError("potentials." + key, "engine " + engine_name(r.engine) + " requires slot " + key);
        }
    }
    if (j.contains("ell")) {
        r.ell = detail::integer_at(j, "ell", "");
        if (r.ell < 0) throw RecipeError("ell", "must be nonnegative");
    }
    if (r.engine == Engine::higher_ell && !j.contains("ell")) {
        throw RecipeError("ell", "engine higher_ell requires ell");
    }
    if (r.engine != Engine::higher_ell && r.ell != 0) throw RecipeError("ell", "only used by higher_ell");
    if (j.contains("scale")) r.scale = detail::number_at(j, "scale", "");
    if (j.contains("depth")) {
        r.depth = detail::integer_at(j, "depth", "");
        if (r.depth < 1) throw RecipeError("depth", "must be at least 1");
    }
    if (j.contains("grid")) {
        const json& g = j["grid"];
        if (!g.is_object()) throw RecipeError("grid", "expected an object");
        detail::reject_unknown(g, "grid.",
                               {"r_min", "per_decade", "linear_start", "r_max", "linear_step", "r_far", "verify_lo",
                                "verify_hi"});
        GridSpec spec;
        bool mesh_override = false;
        auto num = [&](const char* key, double& out) {
            if (g.contains(key)) {
                out = detail::number_at(g, key, "grid.");
                if (!(out > 0.0)) throw RecipeError(std::string("grid.") + key, "must be positive");
                mesh_override = true;
            }
        };
        num("r_min", spec.r_min);
        num("linear_start", spec.linear_start);
        num("r_max", spec.r_max);
        num("linear_step", spec.linear_step);
        num("r_far", spec.r_far);
        if (g.contains("per_decade")) {
            spec.per_decade = detail::integer_at(g, "per_decade", "grid.");
            if (spec.per_decade < 4) throw RecipeError("grid.per_decade", "must be at least 4");
            mesh_override = true;
        }
        if (mesh_override) {
            if (!(spec.r_max > spec.linear_start)) throw RecipeError("grid.r_max", "must exceed linear_start");
            if (spec.r_far < spec.r_max) spec.r_far = spec.r_max;
            r.grid = spec;
        }
        if (g.contains("verify_lo")) r.verify_lo = detail::number_at(g, "verify_lo", "grid.");
        if (g.contains("verify_hi")) r.verify_hi = detail::number_at(g, "verify_hi", "grid.");
        if (r.verify_lo && r.verify_hi && !(*r.verify_lo < *r.verify_hi)) {
            throw RecipeError("grid.verify_hi", "must exceed verify_lo");
        }
    }
    if (j.contains("tolerances")) {
        const json& t = j["tolerances"];
        if (!t.is_object()) throw RecipeError("tolerances", "expected an object");
        detail::reject_unknown(t, "tolerances.",
                               {"residual", "wronskian", "roundtrip", "slope", "formula", "level_relaxation"});
        auto num = [&](const char* key, double& out) {
            if (t.contains(key)) {
                out = detail::number_at(t, key, "tolerances.");
                if (!(out > 0.0)) throw RecipeError(std::string("tolerances.") + key, "must be positive");
            }
        };
        num("residual", r.tolerances.residual);
        num("wronskian", r.tolerances.wronskian);
        num("roundtrip", r.tolerances.roundtrip);
        num("slope", r.tolerances.slope);
        num("formula", r.tolerances.formula);
        num("level_relaxation", r.tolerances.level_relaxation);
    }
    if (j.contains("outputs")) {
        const json& o = j["outputs"];
        if (!o.is_array()) throw RecipeError("outputs", "expected an array");
        r.outputs.clear();
        for (std::size_t i = 0; i < o.size(); ++i) {
            const std::string path = "outputs[" + std::to_string(i) + "]";
            if (!o[i].is_string()) throw RecipeError(path, "expected a string");
            const auto name = o[i].get<std::string>();
            if (name != "report" && name != "plot") throw RecipeError(path, "unknown output '" + name + "'");
            r.outputs.push_back(name);
        }
    }
    return r;
}

inline Recipe parse_recipe_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw RecipeError("recipe", std::string("invalid JSON: ") + e.what());
    }
    return parse_recipe(j);
}

inline Recipe load_recipe(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw RecipeError("recipe", "cannot read " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_recipe_text(buf.str());
}

inline json recipe_json(const Recipe& r) {
    json j;
    j["schema"] = kRecipeSchema;
    j["engine"] = engine_name(r.engine);
    json pots = json::object();
    for (const auto& key : engine_slots(r.engine)) {
        const auto& slot = r.slot(key);
        pots[key] = {{"name", slot.name}, {"params", slot.params}};
    }
    j["potentials"] = pots;
    if (r.engine == Engine::higher_ell) j["ell"] = r.ell;
    j["scale"] = r.scale;
    j["depth"] = r.depth;
    const Tolerances& t = r.tolerances;
    j["tolerances"] = {{"residual", t.residual}, {"wronskian", t.wronskian},       {"roundtrip", t.roundtrip},
                       {"slope", t.slope},       {"formula", t.formula},           {"level_relaxation", t.level_relaxation}};
    j["outputs"] = r.outputs;
    return j;
}

/// Builds the depth-1 record of a recipe.
inline CompositionRecord compose(const Recipe& r) {
    auto entry = [&](const std::string& key) {
        const auto& slot = r.slot(key);
        return make_entry(slot.name, slot.params);
    };
    const CatalogEntry v0 = entry("V0");
    auto pair = [&] { return r.grid ? v0.pair(r.grid) : v0.pair(); };
    CompositionRecord rec;
    switch (r.engine) {
        case Engine::theorem1: rec = theorem1_compose(v0.potential, pair(), scaled(entry("V"), r.scale).solution()); break;
        case Engine::grosse: {
            std::optional<TransformKernels> kernels;
            if (r.grid && !v0.potential.origin.singular()) kernels = grosse_kernels(v0.potential, make_mesh(*r.grid));
            rec = grosse_compose(v0.potential, scaled(entry("V1"), r.scale).solution(), kernels);
            break;
        }
        case Engine::theorem2:
            rec = theorem2_compose(v0.potential, pair(), entry("V1").potential,
                                   scaled(entry("V"), r.scale).solution());
            break;
        case Engine::higher_ell:
            rec = higher_ell_compose(v0.potential, scaled(entry("V1"), r.scale).solution(), r.ell);
            break;
    }
    rec.scale = r.scale;
    if (r.verify_lo) rec.verify_lo = std::max(*r.verify_lo, rec.verify_lo);
    if (r.verify_hi) rec.verify_hi = *r.verify_hi;
    return rec;
}

/// Outcome of a recipe: the deepest record reached and one report per level.
struct RunResult {
    std::optional<CompositionRecord> record;
    std::vector<VerificationReport> reports;
    std::optional<std::string> error;
    std::optional<int> failed_level;

    bool passed() const {
        if (error || reports.empty()) return false;
        for (const auto& rep : reports) {
            if (!rep.passed()) return false;
        }
        return true;
    }
};

/// Composes, iterates and verifies. Numerical failures are captured in the result;
/// InvalidParameter propagates.
inline RunResult run_recipe(const Recipe& r) {
    RunResult out;
    try {
        const CompositionRecord base = compose(r);
        out.record = iterate_verified(base, r.depth, r.tolerances, &out.reports);
    } catch (const IterationError& e) {
        out.error = e.what();
        out.failed_level = e.level();
    } catch (const InvalidParameter&) {
        throw;
    } catch (const Error& e) {
        out.error = e.what();
    }
    return out;
}

namespace detail {

inline json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace detail

inline json integrability_json(const IntegrabilityReport& r) {
    return {{"near_origin", detail::finite_or_null(r.near_origin)},
            {"near_origin_finite", r.near_origin_finite},
            {"tail", detail::finite_or_null(r.tail)},
            {"tail_finite", r.tail_finite},
            {"full", detail::finite_or_null(r.full)},
            {"full_finite", r.full_finite}};
}

inline json report_json(const VerificationReport& rep, bool include_grid = true) {
    json j;
    j["engine"] = rep.engine;
    j["depth"] = rep.depth;
    j["passed"] = rep.passed();
    j["window"] = {rep.window_lo, rep.window_hi};
    j["residual_max"] = detail::finite_or_null(rep.residual_max);
    j["residual_worst_at"] = rep.residual_worst_at;
    j["wronskian_drift"] = detail::optional_number(rep.wronskian_drift);
    j["node_count_inner"] = rep.node_count_inner;
    j["node_count_composed"] = rep.node_count_composed;
    j["bargmann_inner"] = detail::optional_number(rep.bargmann_inner);
    j["bargmann_composed"] = detail::optional_number(rep.bargmann_composed);
    j["map_roundtrip_max"] = rep.map_roundtrip_max;
    j["map_slope_vs_A2"] = detail::optional_number(rep.map_slope_vs_A2);
    j["map_offset_drift"] = detail::optional_number(rep.map_offset_drift);
    j["formula_deviation"] = rep.formula_deviation;
    j["kernel_bound"] = detail::optional_number(rep.kernel_bound);
    j["auxiliary_nodes"] = rep.auxiliary_nodes ? json(*rep.auxiliary_nodes) : json(nullptr);
    json integ = json::object();
    for (const auto& [slot, r] : rep.integrability) integ[slot] = integrability_json(r);
    j["integrability"] = integ;
    json checks = json::array();
    for (const auto& c : rep.checks) {
        checks.push_back({{"name", c.name},
                          {"passed", c.passed},
                          {"value", detail::finite_or_null(c.value)},
                          {"threshold", c.threshold},
                          {"detail", c.detail}});
    }
    j["checks"] = checks;
    j["notes"] = rep.notes;
    if (include_grid) {
        json values = json::array();
        for (double v : rep.residual_values) values.push_back(detail::finite_or_null(v));
        j["residual_grid"] = {{"r", rep.residual_r}, {"value", values}, {"skipped", rep.residual_skipped}};
    }
    return j;
}

inline json run_json(const Recipe& r, const RunResult& result, bool include_grid = true) {
    json j;
    j["schema"] = kReportSchema;
    j["recipe"] = recipe_json(r);
    j["passed"] = result.passed();
    if (result.record) {
        const auto& rec = *result.record;
        j["composed"] = {{"name", rec.composed.name},
                         {"normalization", rec.normalization},
                         {"chi_normalization", rec.chi_normalization},
                         {"selected_variant",
                          rec.selected_variant ? json(variant_name(*rec.selected_variant)) : json(nullptr)}};
    }
    json levels = json::array();
    for (const auto& rep : result.reports) levels.push_back(report_json(rep, include_grid));
    j["levels"] = levels;
    j["error"] = result.error ? json(*result.error) : json(nullptr);
    j["failed_level"] = result.failed_level ? json(*result.failed_level) : json(nullptr);
    return j;
}

inline json catalog_json(const std::vector<CatalogInfo>& rows) {
    json list = json::array();
    for (const auto& info : rows) {
        list.push_back({{"key", info.key},
                        {"code", info.code},
                        {"potential", info.form},
                        {"solution", info.solution},
                        {"tags", info.tags},
                        {"defaults", info.defaults},
                        {"validity", info.validity},
                        {"coupling", info.coupling}});
    }
    return {{"schema", kReportSchema}, {"catalog", list}};
}

/// Plot table with columns r, V(r), phi(r), x(r) on the verification window.
inline void write_plot_csv(std::ostream& out, const CompositionRecord& rec, int points = 400) {
    out << "r,V,phi,x\n";
    out.precision(12);
    const double lo = rec.verify_lo, hi = rec.verify_hi;
    for (int i = 0; i < points; ++i) {
        const double s = static_cast<double>(i) / (points - 1);
        const double r = lo < 1.0 && hi > 1.0 ? lo * std::pow(hi / lo, s) : lo + (hi - lo) * s;
        out << r << ',' << rec.composed(r) << ',' << rec(r) << ',' << rec.map(r) << '\n';
    }
}

}  // namespace solvable
