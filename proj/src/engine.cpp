#include "cfgen/engine.hpp"

#include <algorithm>
#include <map>

namespace cfgen {

const char* to_string(ValidationMode mode) {
    return mode == ValidationMode::same_class ? "same_class" : "class_change";
}

const char* to_string(Method method) {
    switch (method) {
        case Method::knn: return "knn";
        case Method::one_nn: return "one_nn";
        default: return "one_nn_star";
    }
}

ValidationMode validation_mode_from_string(const std::string& s) {
    if (s == "same_class") return ValidationMode::same_class;
    if (s == "class_change") return ValidationMode::class_change;
    throw ConfigError("unknown validation mode '" + s + "' (same_class|class_change)");
}

Method method_from_string(const std::string& s) {
    if (s == "knn") return Method::knn;
    if (s == "one_nn") return Method::one_nn;
    if (s == "one_nn_star") return Method::one_nn_star;
    throw ConfigError("unknown method '" + s + "' (knn|one_nn|one_nn_star)");
}

std::vector<ExplanationCase> get_xcs(const Instance& p, const XCBase& base, const Dataset& data,
                                     const ScalingStats& stats, int k) {
    struct Keyed {
        double dist;
        const ExplanationCase* xc;
    };
    std::vector<Keyed> eligible;
    for (const auto& xc : base.cases) {
        const auto& x = data.by_id(xc.x_id);
        if (x.label != p.label) continue;
        eligible.push_back({distance(x, p, stats, data.schema), &xc});
    }
    std::sort(eligible.begin(), eligible.end(), [](const Keyed& a, const Keyed& b) {
        if (a.dist != b.dist) return a.dist < b.dist;
        if (a.xc->x_id != b.xc->x_id) return a.xc->x_id < b.xc->x_id;
        return a.xc->xprime_id < b.xc->xprime_id;
    });
    if (k < 0) k = 0;
    const std::size_t take = std::min(eligible.size(), static_cast<std::size_t>(k));
    std::vector<ExplanationCase> out;
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i) out.push_back(*eligible[i].xc);
    return out;
}

std::optional<Candidate> gen_cf(const Instance& p, const Instance& nun,
                                const ScalingStats& stats, const FeatureSchema& schema) {
    FeaturePartition partition = partition_features(p, nun, stats, schema);
    if (partition.diffs.empty()) return std::nullopt;  // cf would equal p
    Candidate cf;
    cf.values = p.values;
    for (int f : partition.diffs) cf.values[static_cast<std::size_t>(f)] = nun.values[static_cast<std::size_t>(f)];
    cf.source_nun_id = nun.id;
    cf.partition_vs_p = std::move(partition);
    cf.distance_to_p = distance(cf.values, p.values, stats, schema);
    cf.source_nun_distance_to_p = distance(nun, p, stats, schema);
    return cf;
}

bool validate_cf(const Candidate& cf, const ExplanationCase& xc, const Model& model,
                 ValidationMode mode, ClassLabel p_class) {
    (void)xc;
    const ClassLabel predicted = model.predict(cf.values);
    if (mode == ValidationMode::same_class) return predicted == cf.target_class;
    return predicted != p_class;
}

std::vector<Candidate> gen_cfs(const Instance& p, const ExplanationCase& xc, const Dataset& data,
                               std::span<const int> population_ids, const Model& model,
                               const GenerationConfig& config, const ScalingStats& stats) {
    const ClassLabel nun_class = data.by_id(xc.xprime_id).label;

    // Neighbour pool: xc.x' plus all like-class population instances,
    // ascending id order.
    std::vector<int> pool;
    bool xprime_in_population = false;
    for (int id : population_ids) {
        if (data.by_id(id).label == nun_class) pool.push_back(id);
        if (id == xc.xprime_id) xprime_in_population = true;
    }
    if (!xprime_in_population) pool.push_back(xc.xprime_id);
    std::sort(pool.begin(), pool.end());

    const auto limit = static_cast<std::size_t>(config.d);
    std::vector<Candidate> kept;
    for (int nun_id : pool) {
        const auto& nun = data.by_id(nun_id);
        const std::size_t diffs = count_diffs_capped(p.values, nun.values, stats, data.schema, limit);
        if (diffs == 0 || diffs > limit) continue;
        auto cf = gen_cf(p, nun, stats, data.schema);
        if (!cf) continue;
        cf->source_x_id = xc.x_id;
        cf->source_xprime_id = xc.xprime_id;
        cf->target_class = nun_class;
        if (!validate_cf(*cf, xc, model, config.validation_mode, p.label)) continue;
        cf->valid = true;
        kept.push_back(std::move(*cf));
    }

    // Identical value vectors collapse to the one with the nearest source
    // neighbour (ties on the lower neighbour id; pool order supplies both).
    std::vector<Candidate> unique;
    for (auto& cand : kept) {
        auto same = std::find_if(unique.begin(), unique.end(),
                                 [&](const Candidate& u) { return u.values == cand.values; });
        if (same == unique.end()) {
            unique.push_back(std::move(cand));
        } else if (cand.source_nun_distance_to_p < same->source_nun_distance_to_p) {
            *same = std::move(cand);
        }
    }

    std::stable_sort(unique.begin(), unique.end(), [](const Candidate& a, const Candidate& b) {
        if (a.distance_to_p != b.distance_to_p) return a.distance_to_p < b.distance_to_p;
        return a.source_nun_id < b.source_nun_id;
    });
    return unique;
}

namespace {

XcCandidates make_group(const Instance& p, const ExplanationCase& xc, const Dataset& data,
                        const ScalingStats& stats) {
    XcCandidates group;
    group.xc = xc;
    group.xc_distance_to_p = distance(data.by_id(xc.x_id), p, stats, data.schema);
    group.xc_pair_distance = distance(data.by_id(xc.x_id), data.by_id(xc.xprime_id), stats, data.schema);
    return group;
}

}  // namespace

std::vector<XcCandidates> gen_knn_cfs(const Instance& p, const Dataset& data,
                                      std::span<const int> population_ids, const XCBase& base,
                                      const Model& model, const GenerationConfig& config,
                                      const ScalingStats& stats) {
    const auto xcs = get_xcs(p, base, data, stats, config.k);
    std::vector<XcCandidates> out;
    out.reserve(xcs.size());
    for (const auto& xc : xcs) {
        XcCandidates group = make_group(p, xc, data, stats);
        group.candidates = gen_cfs(p, xc, data, population_ids, model, config, stats);
        out.push_back(std::move(group));
    }
    return out;
}

std::vector<Candidate> gen_baseline_1nn(const Instance& p, const XCBase& base, const Dataset& data,
                                        std::span<const int> population_ids, const Model& model,
                                        const GenerationConfig& config, const ScalingStats& stats) {
    (void)population_ids;
    const auto xcs = get_xcs(p, base, data, stats, 1);
    if (xcs.empty()) return {};
    const auto& xc = xcs.front();
    const int only_pool[] = {xc.xprime_id};
    GenerationConfig cfg = config;
    cfg.method = Method::one_nn;
    // Pool is the case's own neighbour; gen_cfs keeps only like-class pool
    // entries, which x' trivially is.
    return gen_cfs(p, xc, data, std::span<const int>(only_pool), model, cfg, stats);
}

std::vector<XcCandidates> generate(const Instance& p, const Dataset& data,
                                   std::span<const int> population_ids, const XCBase& base,
                                   const Model& model, const GenerationConfig& config,
                                   const ScalingStats& stats) {
    switch (config.method) {
        case Method::knn:
            return gen_knn_cfs(p, data, population_ids, base, model, config, stats);
        case Method::one_nn_star: {
            GenerationConfig cfg = config;
            cfg.k = 1;  // single-case retrieval with the full neighbour pool
            return gen_knn_cfs(p, data, population_ids, base, model, cfg, stats);
        }
        case Method::one_nn: {
            const auto xcs = get_xcs(p, base, data, stats, 1);
            if (xcs.empty()) return {};
            XcCandidates group = make_group(p, xcs.front(), data, stats);
            group.candidates = gen_baseline_1nn(p, base, data, population_ids, model, config, stats);
            return {std::move(group)};
        }
    }
    return {};
}

}  // namespace cfgen
