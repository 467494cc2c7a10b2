#pragma once

#include <json.hpp>

#include "cylkam/dsl.hpp"
#include "cylkam/funcspace.hpp"
#include "cylkam/maps.hpp"

namespace cylkam {

/// {nx, ny, lo, hi, coeffs: [[re, im], ...]} row-major in (m, j), m ascending from -nx/2.
inline nlohmann::json serialize(const CylinderFunction& f) {
    nlohmann::json j;
    j["nx"] = f.grid().nx;
    j["ny"] = f.grid().ny;
    j["lo"] = f.grid().interval.lo;
    j["hi"] = f.grid().interval.hi;
    nlohmann::json coeffs = nlohmann::json::array();
    for (const auto& c : f.coeffs()) coeffs.push_back({c.real(), c.imag()});
    j["coeffs"] = std::move(coeffs);
    return j;
}

inline CylinderFunction deserialize_function(const nlohmann::json& j) {
    const GridSpec grid(j.at("nx").get<int>(), j.at("ny").get<int>(),
                        Interval(j.at("lo").get<double>(), j.at("hi").get<double>()));
    const auto& arr = j.at("coeffs");
    if (arr.size() != static_cast<std::size_t>(grid.nx) * grid.ny)
        throw ContractError("serialized coefficient count does not match grid");
    std::vector<std::complex<double>> coeffs(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i)
        coeffs[i] = {arr[i][0].get<double>(), arr[i][1].get<double>()};
    return CylinderFunction::from_coeffs(grid, std::move(coeffs));
}

/// {base: {tag, ...params}, pert: {c1, c2} | null, interval: {lo, hi} | null}.
/// FrequencyTwist bases serialize through their expression sources.
inline nlohmann::json serialize(const CylinderMap& m) {
    nlohmann::json base;
    base["tag"] = base_tag(m.base);
    if (const auto* t = std::get_if<TranslationBase>(&m.base)) base["alpha"] = t->alpha;
    if (const auto* ft = std::get_if<FrequencyTwistBase>(&m.base)) {
        if (ft->omega_src.empty() || ft->omega_inv_src.empty())
            throw ContractError("frequency twist without expression sources is not serializable");
        base["omega"] = ft->omega_src;
        base["omega_inv"] = ft->omega_inv_src;
    }
    nlohmann::json j;
    j["base"] = std::move(base);
    if (m.pert) {
        j["pert"] = {{"c1", serialize(m.pert->c1)}, {"c2", serialize(m.pert->c2)}};
        j["interval"] = {{"lo", m.pert->grid().interval.lo}, {"hi", m.pert->grid().interval.hi}};
    } else {
        j["pert"] = nullptr;
        j["interval"] = nullptr;
    }
    return j;
}

inline CylinderMap deserialize_map(const nlohmann::json& j) {
    const auto& b = j.at("base");
    const std::string tag = b.at("tag").get<std::string>();
    MapBase base = IdentityBase{};
    if (tag == "identity") {
        base = IdentityBase{};
    } else if (tag == "translation") {
        base = TranslationBase{b.at("alpha").get<double>()};
    } else if (tag == "twist") {
        base = TwistBase{};
    } else if (tag == "frequency_twist") {
        const std::string fwd = b.at("omega").get<std::string>();
        const std::string inv = b.at("omega_inv").get<std::string>();
        const auto fe = dsl::parse(fwd);
        const auto ie = dsl::parse(inv);
        base = FrequencyTwistBase{[fe](double y) { return dsl::evaluate(*fe, 0.0, y); },
                                  [ie](double y) { return dsl::evaluate(*ie, 0.0, y); }, fwd, inv};
    } else {
        throw ContractError("unknown map base tag '" + tag + "'");
    }
    std::optional<VectorFunction> pert;
    if (!j.at("pert").is_null())
        pert = VectorFunction(deserialize_function(j["pert"].at("c1")),
                              deserialize_function(j["pert"].at("c2")));
    return CylinderMap{std::move(base), std::move(pert)};
}

} // namespace cylkam
