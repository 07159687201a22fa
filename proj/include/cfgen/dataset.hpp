#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cfgen {

// Error that maps to CLI exit code 2 (bad flags, unreadable files,
// malformed schema/config documents).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Error that maps to CLI exit code 1 (valid inputs, failed computation).
struct RuntimeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class FeatureKind { numeric, categorical };

using ClassLabel = int;

// Declares the feature columns, the class column and the approximate-match
// tolerance tau (in standardized units). Two standardized numeric values
// within tau of each other count as a match; categorical values match only
// on exact equality.
struct FeatureSchema {
    struct Feature {
        std::string name;
        FeatureKind kind;
    };

    std::vector<Feature> features;
    std::string class_column;
    double numeric_match_tolerance = 0.1;  // tau

    std::size_t feature_count() const { return features.size(); }
    int index_of(const std::string& name) const;  // -1 when absent

    // Throws ConfigError on duplicate names, class column among features,
    // or negative tau.
    void validate() const;
};

// One row. Numeric values are stored as-is; categorical values are stored
// as the double representation of their interned code (codes are small
// non-negative integers, so the representation is exact).
struct Instance {
    int id = -1;
    std::vector<double> values;  // aligned with schema feature order
    ClassLabel label = -1;
};

struct Dataset {
    FeatureSchema schema;
    std::vector<Instance> instances;         // ascending id order
    std::vector<ClassLabel> class_set;       // ascending, labels present
    std::vector<std::string> label_names;    // label code -> original string
    std::vector<std::vector<std::string>> category_names;  // per feature, code -> string
    int dropped_rows = 0;                    // rows removed at ingestion

    std::size_t size() const { return instances.size(); }
    const Instance& by_id(int id) const;
    bool has_id(int id) const;

    // Instances whose ids are in `ids` (same schema and dictionaries).
    Dataset subset(std::span<const int> ids) const;

    std::vector<int> all_ids() const;
    std::string label_name(ClassLabel label) const;
    std::string value_repr(std::size_t feature, double value) const;
};

// Per-feature standardization statistics fit on some population.
// Population formula (divisor n); constant features keep std = 1 and are
// listed in `constant_features`.
struct ScalingStats {
    std::vector<double> mean;  // per feature; 0 for categorical
    std::vector<double> std;   // per feature; 1 for categorical and constants
    std::vector<std::string> constant_features;
};

// Split of the feature set into (approximate) matches and differences
// between a pair of instances.
struct FeaturePartition {
    std::vector<int> matches;  // feature indices, ascending
    std::vector<int> diffs;    // feature indices, ascending

    std::size_t diff_count() const { return diffs.size(); }
    bool operator==(const FeaturePartition&) const = default;
};

// Schema sidecar parsing. The document is a flat key = value text file:
//
//   class_column = outcome
//   tau = 0.1
//   feature.age = numeric
//   feature.job = categorical
//
// Feature order is the order of appearance. Lines starting with '#' and
// blank lines are ignored.
FeatureSchema parse_schema(std::istream& in);
FeatureSchema load_schema(const std::string& path);

// CSV ingestion. Header must contain exactly the schema features plus the
// class column (any column order). Rows with empty cells are dropped and
// counted; a non-empty cell that fails numeric parsing is an error.
Dataset load_dataset(std::istream& data, const FeatureSchema& schema);
Dataset load_dataset_file(const std::string& path, const FeatureSchema& schema);

ScalingStats compute_scaling(const Dataset& dataset);
// Stats fit on the listed instances only (fold-local fitting).
ScalingStats compute_scaling(const Dataset& dataset, std::span<const int> ids);

// Euclidean distance over standardized numeric contributions
// (a - b) / std and 0/1 categorical mismatch contributions.
double distance(std::span<const double> a, std::span<const double> b,
                const ScalingStats& stats, const FeatureSchema& schema);
double distance(const Instance& a, const Instance& b,
                const ScalingStats& stats, const FeatureSchema& schema);

FeaturePartition partition_features(std::span<const double> a, std::span<const double> b,
                                    const ScalingStats& stats, const FeatureSchema& schema);
FeaturePartition partition_features(const Instance& a, const Instance& b,
                                    const ScalingStats& stats, const FeatureSchema& schema);

// Difference count with an early exit once `limit` is exceeded; agrees with
// partition_features(...).diff_count() whenever that count is <= limit.
std::size_t count_diffs_capped(std::span<const double> a, std::span<const double> b,
                               const ScalingStats& stats, const FeatureSchema& schema,
                               std::size_t limit);

}  // namespace cfgen
