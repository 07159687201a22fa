#include "cfgen/dataset.hpp"

#include <algorithm>
#include <cassert>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <unordered_map>

namespace cfgen {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

std::optional<double> parse_double(const std::string& s) {
    double value = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) return std::nullopt;
    return value;
}

}  // namespace

int FeatureSchema::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < features.size(); ++i)
        if (features[i].name == name) return static_cast<int>(i);
    return -1;
}

void FeatureSchema::validate() const {
    if (features.empty()) throw ConfigError("schema declares no features");
    for (std::size_t i = 0; i < features.size(); ++i)
        for (std::size_t j = i + 1; j < features.size(); ++j)
            if (features[i].name == features[j].name)
                throw ConfigError("schema mismatch: duplicate feature name '" + features[i].name + "'");
    if (index_of(class_column) >= 0)
        throw ConfigError("schema mismatch: class column '" + class_column + "' is also a feature");
    if (class_column.empty()) throw ConfigError("schema declares no class column");
    if (numeric_match_tolerance < 0.0) throw ConfigError("tau must be non-negative");
}

const Instance& Dataset::by_id(int id) const {
    const auto it = std::lower_bound(instances.begin(), instances.end(), id,
                                     [](const Instance& a, int b) { return a.id < b; });
    if (it == instances.end() || it->id != id)
        throw RuntimeError("no instance with id " + std::to_string(id));
    return *it;
}

bool Dataset::has_id(int id) const {
    const auto it = std::lower_bound(instances.begin(), instances.end(), id,
                                     [](const Instance& a, int b) { return a.id < b; });
    return it != instances.end() && it->id == id;
}

Dataset Dataset::subset(std::span<const int> ids) const {
    Dataset out;
    out.schema = schema;
    out.label_names = label_names;
    out.category_names = category_names;
    out.instances.reserve(ids.size());
    std::vector<int> sorted(ids.begin(), ids.end());
    std::sort(sorted.begin(), sorted.end());
    for (int id : sorted) out.instances.push_back(by_id(id));
    std::vector<bool> present(label_names.size(), false);
    for (const auto& inst : out.instances) present[static_cast<std::size_t>(inst.label)] = true;
    for (std::size_t l = 0; l < present.size(); ++l)
        if (present[l]) out.class_set.push_back(static_cast<ClassLabel>(l));
    return out;
}

std::vector<int> Dataset::all_ids() const {
    std::vector<int> ids;
    ids.reserve(instances.size());
    for (const auto& inst : instances) ids.push_back(inst.id);
    return ids;
}

std::string Dataset::label_name(ClassLabel label) const {
    if (label < 0 || static_cast<std::size_t>(label) >= label_names.size()) return "?";
    return label_names[static_cast<std::size_t>(label)];
}

std::string Dataset::value_repr(std::size_t feature, double value) const {
    if (schema.features[feature].kind == FeatureKind::categorical) {
        const auto code = static_cast<std::size_t>(value);
        if (code < category_names[feature].size()) return category_names[feature][code];
        return "?";
    }
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    (void)ec;
    return std::string(buf, ptr);
}

FeatureSchema parse_schema(std::istream& in) {
    FeatureSchema schema;
    bool saw_tau = false;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string text = trim(line);
        if (text.empty() || text[0] == '#') continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos)
            throw ConfigError("schema line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(text.substr(0, eq));
        const std::string value = trim(text.substr(eq + 1));
        if (key == "class_column") {
            schema.class_column = value;
        } else if (key == "tau") {
            const auto tau = parse_double(value);
            if (!tau) throw ConfigError("schema line " + std::to_string(lineno) + ": bad tau '" + value + "'");
            schema.numeric_match_tolerance = *tau;
            saw_tau = true;
        } else if (key.starts_with("feature.")) {
            const std::string name = key.substr(8);
            FeatureKind kind;
            if (value == "numeric") kind = FeatureKind::numeric;
            else if (value == "categorical") kind = FeatureKind::categorical;
            else throw ConfigError("schema line " + std::to_string(lineno) +
                                   ": feature kind must be numeric or categorical, got '" + value + "'");
            schema.features.push_back({name, kind});
        } else {
            throw ConfigError("schema line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
    }
    (void)saw_tau;
    schema.validate();
    return schema;
}

FeatureSchema load_schema(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open schema file: " + path);
    return parse_schema(in);
}

Dataset load_dataset(std::istream& data, const FeatureSchema& schema) {
    schema.validate();
    std::string line;
    if (!std::getline(data, line)) throw ConfigError("schema mismatch: dataset has no header row");
    const auto header = split_csv_line(line);

    // Map schema columns onto header positions by name.
    const std::size_t n_features = schema.feature_count();
    std::vector<int> column_of_feature(n_features, -1);
    int class_col = -1;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == schema.class_column) {
            if (class_col >= 0) throw ConfigError("schema mismatch: duplicate column '" + header[c] + "'");
            class_col = static_cast<int>(c);
            continue;
        }
        const int f = schema.index_of(header[c]);
        if (f < 0) throw ConfigError("schema mismatch: unexpected column '" + header[c] + "'");
        if (column_of_feature[static_cast<std::size_t>(f)] >= 0)
            throw ConfigError("schema mismatch: duplicate column '" + header[c] + "'");
        column_of_feature[static_cast<std::size_t>(f)] = static_cast<int>(c);
    }
    if (class_col < 0)
        throw ConfigError("schema mismatch: class column '" + schema.class_column + "' missing from header");
    for (std::size_t f = 0; f < n_features; ++f)
        if (column_of_feature[f] < 0)
            throw ConfigError("schema mismatch: feature column '" + schema.features[f].name + "' missing from header");

    Dataset out;
    out.schema = schema;
    out.category_names.resize(n_features);
    std::vector<std::unordered_map<std::string, int>> category_codes(n_features);
    std::unordered_map<std::string, int> label_codes;

    int next_id = 0;
    int lineno = 1;
    while (std::getline(data, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw ConfigError("row " + std::to_string(lineno) + ": expected " +
                              std::to_string(header.size()) + " cells, got " + std::to_string(cells.size()));
        bool missing = false;
        for (const auto& cell : cells)
            if (cell.empty()) { missing = true; break; }
        if (missing) {
            ++out.dropped_rows;
            continue;
        }

        Instance inst;
        inst.id = next_id++;
        inst.values.resize(n_features);
        for (std::size_t f = 0; f < n_features; ++f) {
            const std::string& cell = cells[static_cast<std::size_t>(column_of_feature[f])];
            if (schema.features[f].kind == FeatureKind::numeric) {
                const auto v = parse_double(cell);
                if (!v)
                    throw ConfigError("row " + std::to_string(lineno) + ": cannot parse numeric value '" +
                                      cell + "' in column '" + schema.features[f].name + "'");
                inst.values[f] = *v;
            } else {
                auto [it, inserted] = category_codes[f].try_emplace(cell, static_cast<int>(out.category_names[f].size()));
                if (inserted) out.category_names[f].push_back(cell);
                inst.values[f] = static_cast<double>(it->second);
            }
        }
        const std::string& label_cell = cells[static_cast<std::size_t>(class_col)];
        auto [it, inserted] = label_codes.try_emplace(label_cell, static_cast<int>(out.label_names.size()));
        if (inserted) out.label_names.push_back(label_cell);
        inst.label = it->second;
        out.instances.push_back(std::move(inst));
    }

    if (out.instances.empty()) throw ConfigError("dataset is empty after dropping incomplete rows");
    std::vector<bool> present(out.label_names.size(), false);
    for (const auto& inst : out.instances) present[static_cast<std::size_t>(inst.label)] = true;
    for (std::size_t l = 0; l < present.size(); ++l)
        if (present[l]) out.class_set.push_back(static_cast<ClassLabel>(l));
    return out;
}

Dataset load_dataset_file(const std::string& path, const FeatureSchema& schema) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open dataset file: " + path);
    return load_dataset(in, schema);
}

ScalingStats compute_scaling(const Dataset& dataset) {
    const auto ids = dataset.all_ids();
    return compute_scaling(dataset, ids);
}

ScalingStats compute_scaling(const Dataset& dataset, std::span<const int> ids) {
    if (ids.empty()) throw RuntimeError("cannot fit scaling on an empty population");
    const std::size_t n_features = dataset.schema.feature_count();
    ScalingStats stats;
    stats.mean.assign(n_features, 0.0);
    stats.std.assign(n_features, 1.0);
    const double n = static_cast<double>(ids.size());
    for (std::size_t f = 0; f < n_features; ++f) {
        if (dataset.schema.features[f].kind != FeatureKind::numeric) continue;
        double sum = 0.0;
        for (int id : ids) sum += dataset.by_id(id).values[f];
        const double mean = sum / n;
        double ss = 0.0;
        for (int id : ids) {
            const double dv = dataset.by_id(id).values[f] - mean;
            ss += dv * dv;
        }
        const double var = ss / n;  // population formula
        stats.mean[f] = mean;
        if (var > 0.0) {
            stats.std[f] = std::sqrt(var);
        } else {
            stats.std[f] = 1.0;  // constant feature sentinel
            stats.constant_features.push_back(dataset.schema.features[f].name);
        }
    }
    return stats;
}

double distance(std::span<const double> a, std::span<const double> b,
                const ScalingStats& stats, const FeatureSchema& schema) {
    assert(a.size() == schema.feature_count() && b.size() == schema.feature_count());
    double sum = 0.0;
    for (std::size_t f = 0; f < a.size(); ++f) {
        if (schema.features[f].kind == FeatureKind::numeric) {
            const double d = (a[f] - b[f]) / stats.std[f];
            sum += d * d;
        } else if (a[f] != b[f]) {
            sum += 1.0;
        }
    }
    return std::sqrt(sum);
}

double distance(const Instance& a, const Instance& b,
                const ScalingStats& stats, const FeatureSchema& schema) {
    return distance(std::span<const double>(a.values), std::span<const double>(b.values), stats, schema);
}

FeaturePartition partition_features(std::span<const double> a, std::span<const double> b,
                                    const ScalingStats& stats, const FeatureSchema& schema) {
    assert(a.size() == schema.feature_count() && b.size() == schema.feature_count());
    FeaturePartition out;
    const double tau = schema.numeric_match_tolerance;
    for (std::size_t f = 0; f < a.size(); ++f) {
        bool match;
        if (schema.features[f].kind == FeatureKind::numeric) {
            match = std::abs(a[f] - b[f]) / stats.std[f] <= tau;
        } else {
            match = a[f] == b[f];
        }
        (match ? out.matches : out.diffs).push_back(static_cast<int>(f));
    }
    return out;
}

FeaturePartition partition_features(const Instance& a, const Instance& b,
                                    const ScalingStats& stats, const FeatureSchema& schema) {
    return partition_features(std::span<const double>(a.values), std::span<const double>(b.values), stats, schema);
}

std::size_t count_diffs_capped(std::span<const double> a, std::span<const double> b,
                               const ScalingStats& stats, const FeatureSchema& schema,
                               std::size_t limit) {
    const double tau = schema.numeric_match_tolerance;
    std::size_t diffs = 0;
    for (std::size_t f = 0; f < a.size(); ++f) {
        bool match;
        if (schema.features[f].kind == FeatureKind::numeric) {
            match = std::abs(a[f] - b[f]) / stats.std[f] <= tau;
        } else {
            match = a[f] == b[f];
        }
        if (!match && ++diffs > limit) return diffs;
    }
    return diffs;
}

}  // namespace cfgen
