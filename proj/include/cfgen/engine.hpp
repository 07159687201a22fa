#pragma once

#include <optional>
#include <span>
#include <vector>

#include "cfgen/classifier.hpp"
#include "cfgen/dataset.hpp"
#include "cfgen/xc.hpp"

namespace cfgen {

enum class ValidationMode { same_class, class_change };
enum class Method { knn, one_nn, one_nn_star };

const char* to_string(ValidationMode mode);
const char* to_string(Method method);
ValidationMode validation_mode_from_string(const std::string& s);
Method method_from_string(const std::string& s);

struct GenerationConfig {
    int k = 5;
    int d = 2;
    ValidationMode validation_mode = ValidationMode::same_class;
    Method method = Method::knn;
};

// A generated counterfactual. Every value is copied verbatim from the
// target problem (match features) or from the source neighbour (difference
// features), so all feature values occur in the data.
struct Candidate {
    std::vector<double> values;
    int source_x_id = -1;       // problem side of the originating case
    int source_xprime_id = -1;  // NUN side of the originating case
    int source_nun_id = -1;     // instance the difference values came from
    FeaturePartition partition_vs_p;
    double distance_to_p = 0.0;
    double source_nun_distance_to_p = 0.0;
    bool valid = false;
    ClassLabel target_class = -1;
};

// Candidates grouped under the explanation case that produced them;
// group order is retrieval order (nearest case first).
struct XcCandidates {
    ExplanationCase xc;
    double xc_distance_to_p = 0.0;    // distance(xc.x, p)
    double xc_pair_distance = 0.0;    // distance(xc.x, xc.x')
    std::vector<Candidate> candidates;
};

// Cases whose problem side shares p's class, ascending by distance(xc.x, p)
// with ties on (x_id, xprime_id), truncated to k.
std::vector<ExplanationCase> get_xcs(const Instance& p, const XCBase& base, const Dataset& data,
                                     const ScalingStats& stats, int k);

// Substitution step: p's values on match features, nun's on difference
// features. Empty when the pair has no difference features (cf == p).
// Case provenance, validity and target class are filled by the caller.
std::optional<Candidate> gen_cf(const Instance& p, const Instance& nun,
                                const ScalingStats& stats, const FeatureSchema& schema);

bool validate_cf(const Candidate& cf, const ExplanationCase& xc, const Model& model,
                 ValidationMode mode, ClassLabel p_class);

// Candidates for one explanation case. The neighbour pool is xc.x' plus
// every population instance sharing its class, kept when it has 1..d
// difference features against p. Survivors are validated, deduplicated by
// value vector (keeping the source neighbour nearest to p) and sorted
// ascending by (distance to p, source neighbour id).
std::vector<Candidate> gen_cfs(const Instance& p, const ExplanationCase& xc, const Dataset& data,
                               std::span<const int> population_ids, const Model& model,
                               const GenerationConfig& config, const ScalingStats& stats);

// Algorithm: retrieve the k nearest cases, then generate per case.
// Groups for retrieved cases are kept even when empty.
std::vector<XcCandidates> gen_knn_cfs(const Instance& p, const Dataset& data,
                                      std::span<const int> population_ids, const XCBase& base,
                                      const Model& model, const GenerationConfig& config,
                                      const ScalingStats& stats);

// Retrieval-only baseline: single nearest case, neighbour pool restricted
// to that case's own x'.
std::vector<Candidate> gen_baseline_1nn(const Instance& p, const XCBase& base, const Dataset& data,
                                        std::span<const int> population_ids, const Model& model,
                                        const GenerationConfig& config, const ScalingStats& stats);

// Dispatch on config.method, normalized to the grouped shape
// (one_nn / one_nn_star produce at most one group).
std::vector<XcCandidates> generate(const Instance& p, const Dataset& data,
                                   std::span<const int> population_ids, const XCBase& base,
                                   const Model& model, const GenerationConfig& config,
                                   const ScalingStats& stats);

}  // namespace cfgen
