#include "cfgen/xc.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

namespace cfgen {

bool is_nun(const Instance& x, const Instance& xprime) {
    return x.label != xprime.label;
}

namespace {

std::vector<int> collect_member_ids(const std::vector<ExplanationCase>& cases) {
    std::set<int> ids;
    for (const auto& xc : cases) {
        ids.insert(xc.x_id);
        ids.insert(xc.xprime_id);
    }
    return {ids.begin(), ids.end()};
}

// Cases for one fixed problem-side instance, inner ids ascending.
std::vector<ExplanationCase> mine_row(const Dataset& population, std::size_t i, int d,
                                      const ScalingStats& stats) {
    std::vector<ExplanationCase> out;
    const auto& instances = population.instances;
    const auto& x = instances[i];
    const auto limit = static_cast<std::size_t>(d);
    for (std::size_t j = 0; j < instances.size(); ++j) {
        const auto& xp = instances[j];
        if (!is_nun(x, xp)) continue;
        const std::size_t diffs = count_diffs_capped(x.values, xp.values, stats, population.schema, limit);
        if (diffs == 0 || diffs > limit) continue;
        ExplanationCase xc;
        xc.x_id = x.id;
        xc.xprime_id = xp.id;
        xc.partition = partition_features(x, xp, stats, population.schema);
        xc.d = d;
        out.push_back(std::move(xc));
    }
    return out;
}

}  // namespace

std::vector<ExplanationCase> mine_xcs(const Dataset& population, int d, const ScalingStats& stats) {
    if (d < 1) throw RuntimeError("sparsity bound d must be >= 1");
    const auto n = static_cast<std::ptrdiff_t>(population.size());
    std::vector<std::vector<ExplanationCase>> rows(population.size());

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i)
        rows[static_cast<std::size_t>(i)] = mine_row(population, static_cast<std::size_t>(i), d, stats);

    std::vector<ExplanationCase> out;
    for (auto& row : rows)
        out.insert(out.end(), std::make_move_iterator(row.begin()), std::make_move_iterator(row.end()));
    return out;
}

std::vector<ExplanationCase> mine_xcs_serial(const Dataset& population, int d, const ScalingStats& stats) {
    if (d < 1) throw RuntimeError("sparsity bound d must be >= 1");
    std::vector<ExplanationCase> out;
    const auto& instances = population.instances;
    for (std::size_t i = 0; i < instances.size(); ++i) {
        for (std::size_t j = 0; j < instances.size(); ++j) {
            const auto& x = instances[i];
            const auto& xp = instances[j];
            if (!is_nun(x, xp)) continue;
            const auto partition = partition_features(x, xp, stats, population.schema);
            const std::size_t diffs = partition.diff_count();
            if (diffs == 0 || diffs > static_cast<std::size_t>(d)) continue;
            ExplanationCase xc;
            xc.x_id = x.id;
            xc.xprime_id = xp.id;
            xc.partition = partition;
            xc.d = d;
            out.push_back(std::move(xc));
        }
    }
    return out;
}

XCBase build_xc_base(const std::vector<ExplanationCase>& xcs, std::size_t cap, Rng& rng) {
    XCBase base;
    if (xcs.size() <= cap) {
        base.cases = xcs;
    } else {
        const auto picks = rng.sample_without_replacement(xcs.size(), cap);
        base.cases.reserve(cap);
        for (std::size_t idx : picks) base.cases.push_back(xcs[idx]);
    }
    base.member_ids = collect_member_ids(base.cases);
    return base;
}

std::string xc_base_to_json(const XCBase& base, const Dataset& dataset, int d) {
    nlohmann::json doc;
    doc["format"] = "cfgen-xcbase";
    doc["version"] = 1;
    doc["d"] = d;
    doc["tau"] = dataset.schema.numeric_match_tolerance;
    nlohmann::json features = nlohmann::json::array();
    for (const auto& f : dataset.schema.features) features.push_back(f.name);
    doc["features"] = features;
    nlohmann::json cases = nlohmann::json::array();
    for (const auto& xc : base.cases) {
        nlohmann::json c;
        c["x"] = xc.x_id;
        c["xprime"] = xc.xprime_id;
        c["matches"] = xc.partition.matches;
        c["diffs"] = xc.partition.diffs;
        c["d"] = xc.d;
        cases.push_back(std::move(c));
    }
    doc["cases"] = std::move(cases);
    return doc.dump(2) + "\n";
}

XCBase xc_base_from_json(const std::string& text, const Dataset& dataset) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad case-base document: ") + e.what());
    }
    if (doc.value("format", "") != "cfgen-xcbase" || doc.value("version", 0) != 1)
        throw ConfigError("bad case-base document: unknown format/version");
    const auto features = doc.at("features").get<std::vector<std::string>>();
    std::vector<std::string> expected;
    for (const auto& f : dataset.schema.features) expected.push_back(f.name);
    if (features != expected)
        throw ConfigError("case-base document does not match the dataset schema");
    XCBase base;
    for (const auto& c : doc.at("cases")) {
        ExplanationCase xc;
        xc.x_id = c.at("x").get<int>();
        xc.xprime_id = c.at("xprime").get<int>();
        xc.partition.matches = c.at("matches").get<std::vector<int>>();
        xc.partition.diffs = c.at("diffs").get<std::vector<int>>();
        xc.d = c.at("d").get<int>();
        if (!dataset.has_id(xc.x_id) || !dataset.has_id(xc.xprime_id))
            throw ConfigError("case-base document references unknown instance ids");
        base.cases.push_back(std::move(xc));
    }
    base.member_ids = collect_member_ids(base.cases);
    return base;
}

}  // namespace cfgen
