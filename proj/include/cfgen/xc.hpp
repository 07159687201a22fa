#pragma once

#include <string>
#include <vector>

#include "cfgen/dataset.hpp"
#include "cfgen/rng.hpp"

namespace cfgen {

// A native counterfactual pair: a problem-side instance x and a nearby
// unlike-class neighbour x', together with the match/diff feature split
// observed when the pair was mined. Ordered: (x, x') and (x', x) are
// distinct cases because retrieval filters on the class of the x side.
struct ExplanationCase {
    int x_id = -1;
    int xprime_id = -1;
    FeaturePartition partition;
    int d = 0;  // sparsity bound in force when the case was mined

    bool operator==(const ExplanationCase&) const = default;
};

struct XCBase {
    std::vector<ExplanationCase> cases;  // ascending (x_id, xprime_id)
    std::vector<int> member_ids;         // ascending, every id in any case
};

bool is_nun(const Instance& x, const Instance& xprime);

// All ordered pairs (x, x') with different classes and 1..d difference
// features. Output sorted by (x_id, xprime_id). OpenMP pair scan.
std::vector<ExplanationCase> mine_xcs(const Dataset& population, int d, const ScalingStats& stats);

// Plain double loop kept as the reference implementation for the
// parallel miner; produces identical output.
std::vector<ExplanationCase> mine_xcs_serial(const Dataset& population, int d, const ScalingStats& stats);

// Keeps all cases when |xcs| <= cap, otherwise a uniform sample of size
// cap drawn with the given stream. Case order stays ascending.
XCBase build_xc_base(const std::vector<ExplanationCase>& xcs, std::size_t cap, Rng& rng);

// Versioned cache document.
std::string xc_base_to_json(const XCBase& base, const Dataset& dataset, int d);
XCBase xc_base_from_json(const std::string& text, const Dataset& dataset);

}  // namespace cfgen
