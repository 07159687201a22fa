#include "cfgen/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <json.hpp>

namespace cfgen {

double GbtModel::Tree::eval(std::span<const double> encoded) const {
    int node = 0;
    while (nodes[static_cast<std::size_t>(node)].feature >= 0) {
        const auto& nd = nodes[static_cast<std::size_t>(node)];
        const double v = encoded[static_cast<std::size_t>(nd.feature)];
        const bool left = nd.categorical_split ? (v == nd.category) : (v <= nd.threshold);
        node = left ? nd.left : nd.right;
    }
    return nodes[static_cast<std::size_t>(node)].value;
}

std::vector<double> GbtModel::encode(std::span<const double> values) const {
    if (values.size() != schema_.feature_count())
        throw RuntimeError("predict: expected " + std::to_string(schema_.feature_count()) +
                           " feature values, got " + std::to_string(values.size()));
    std::vector<double> out(values.size());
    for (std::size_t f = 0; f < values.size(); ++f) {
        if (schema_.features[f].kind == FeatureKind::numeric)
            out[f] = (values[f] - scaling_.mean[f]) / scaling_.std[f];
        else
            out[f] = values[f];
    }
    return out;
}

std::vector<double> GbtModel::decision_scores(std::span<const double> values) const {
    const auto encoded = encode(values);
    std::vector<double> scores = prior_scores_;
    for (const auto& stage : stages_)
        for (std::size_t k = 0; k < stage.size(); ++k)
            scores[k] += learning_rate_ * stage[k].eval(encoded);
    return scores;
}

ClassLabel GbtModel::predict(std::span<const double> values) const {
    if (classes_.size() == 1) {
        encode(values);  // arity check
        return classes_[0];
    }
    const auto scores = decision_scores(values);
    std::size_t best = 0;
    for (std::size_t k = 1; k < scores.size(); ++k)
        if (scores[k] > scores[best]) best = k;  // ties keep class order
    return classes_[best];
}

std::string GbtModel::describe() const {
    return "gbt(lr=" + std::to_string(learning_rate_) + ",stages=" + std::to_string(stages_.size()) +
           ",depth=" + std::to_string(max_depth_) + ",train_n=" + std::to_string(train_size_) + ")";
}

namespace {

constexpr double kMinGain = 1e-12;

struct SplitChoice {
    bool found = false;
    int feature = -1;
    bool categorical = false;
    double threshold = 0.0;
    double category = 0.0;
    double score = -std::numeric_limits<double>::infinity();
};

// Proxy score for a split: sum(l)^2/n_l + sum(r)^2/n_r. Maximizing it is
// equivalent to minimizing the post-split squared error.
double split_score(double sum_left, std::size_t n_left, double sum_right, std::size_t n_right) {
    return sum_left * sum_left / static_cast<double>(n_left) +
           sum_right * sum_right / static_cast<double>(n_right);
}

SplitChoice find_best_split(const std::vector<std::vector<double>>& rows,
                            const std::vector<int>& samples,
                            const std::vector<double>& residual,
                            const FeatureSchema& schema) {
    SplitChoice best;
    const std::size_t n = samples.size();
    if (n < 2) return best;
    double total = 0.0;
    for (int s : samples) total += residual[static_cast<std::size_t>(s)];
    const double base_score = total * total / static_cast<double>(n);

    std::vector<std::pair<double, int>> order(n);
    for (std::size_t f = 0; f < schema.feature_count(); ++f) {
        for (std::size_t i = 0; i < n; ++i)
            order[i] = {rows[static_cast<std::size_t>(samples[i])][f], samples[i]};
        std::sort(order.begin(), order.end());
        if (order.front().first == order.back().first) continue;

        if (schema.features[f].kind == FeatureKind::numeric) {
            double sum_left = 0.0;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                sum_left += residual[static_cast<std::size_t>(order[i].second)];
                if (order[i].first == order[i + 1].first) continue;
                const double score = split_score(sum_left, i + 1, total - sum_left, n - i - 1);
                if (score > best.score + kMinGain && score > base_score + kMinGain) {
                    best.found = true;
                    best.feature = static_cast<int>(f);
                    best.categorical = false;
                    best.threshold = order[i].first + (order[i + 1].first - order[i].first) / 2.0;
                    best.score = score;
                }
            }
        } else {
            // One candidate per distinct code: left = (value == code).
            std::size_t i = 0;
            while (i < n) {
                std::size_t j = i;
                double sum_cat = 0.0;
                while (j < n && order[j].first == order[i].first) {
                    sum_cat += residual[static_cast<std::size_t>(order[j].second)];
                    ++j;
                }
                const std::size_t n_cat = j - i;
                if (n_cat < n) {
                    const double score = split_score(sum_cat, n_cat, total - sum_cat, n - n_cat);
                    if (score > best.score + kMinGain && score > base_score + kMinGain) {
                        best.found = true;
                        best.feature = static_cast<int>(f);
                        best.categorical = true;
                        best.category = order[i].first;
                        best.score = score;
                    }
                }
                i = j;
            }
        }
    }
    return best;
}

}  // namespace

GbtModel::Tree GbtModel::fit_tree(const std::vector<std::vector<double>>& rows,
                                  const std::vector<double>& residual,
                                  const std::vector<double>& newton_denom,
                                  const FeatureSchema& schema, int max_depth,
                                  double leaf_factor) {
    Tree tree;
    struct Work {
        int node;
        std::vector<int> samples;
        int depth;
    };

    auto make_leaf = [&](TreeNode& node, const std::vector<int>& samples) {
        double num = 0.0;
        double den = 0.0;
        for (int s : samples) {
            num += residual[static_cast<std::size_t>(s)];
            den += newton_denom[static_cast<std::size_t>(s)];
        }
        node.feature = -1;
        node.value = den > 1e-150 ? leaf_factor * num / den : 0.0;
    };

    std::vector<int> root(rows.size());
    std::iota(root.begin(), root.end(), 0);
    tree.nodes.emplace_back();
    std::vector<Work> stack;
    stack.push_back({0, std::move(root), 0});

    while (!stack.empty()) {
        Work work = std::move(stack.back());
        stack.pop_back();
        auto& node = tree.nodes[static_cast<std::size_t>(work.node)];
        if (work.depth >= max_depth) {
            make_leaf(node, work.samples);
            continue;
        }
        const SplitChoice split = find_best_split(rows, work.samples, residual, schema);
        if (!split.found) {
            make_leaf(node, work.samples);
            continue;
        }
        std::vector<int> left, right;
        for (int s : work.samples) {
            const double v = rows[static_cast<std::size_t>(s)][static_cast<std::size_t>(split.feature)];
            const bool go_left = split.categorical ? (v == split.category) : (v <= split.threshold);
            (go_left ? left : right).push_back(s);
        }
        node.feature = split.feature;
        node.categorical_split = split.categorical;
        node.threshold = split.threshold;
        node.category = split.category;
        const int left_idx = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        const int right_idx = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        // Re-fetch: emplace_back may have reallocated.
        tree.nodes[static_cast<std::size_t>(work.node)].left = left_idx;
        tree.nodes[static_cast<std::size_t>(work.node)].right = right_idx;
        stack.push_back({right_idx, std::move(right), work.depth + 1});
        stack.push_back({left_idx, std::move(left), work.depth + 1});
    }
    return tree;
}

std::unique_ptr<GbtModel> train_gbt(const Dataset& train_set, const GBTParams& params,
                                    std::uint64_t seed) {
    (void)seed;  // deterministic; no subsampling
    if (train_set.instances.empty()) throw RuntimeError("cannot train on an empty set");
    if (params.learning_rate <= 0.0) throw RuntimeError("learning rate must be positive");
    if (params.n_stages < 1) throw RuntimeError("need at least one boosting stage");
    if (params.max_depth < 1) throw RuntimeError("tree depth must be positive");

    auto model = std::make_unique<GbtModel>();
    model->classes_ = train_set.class_set;
    model->learning_rate_ = params.learning_rate;
    model->max_depth_ = params.max_depth;
    model->schema_ = train_set.schema;
    model->scaling_ = compute_scaling(train_set);
    model->train_size_ = static_cast<int>(train_set.size());

    const std::size_t n = train_set.size();
    const std::size_t n_classes = model->classes_.size();

    if (n_classes == 1) {
        model->prior_scores_ = {0.0};
        model->loss_curve_ = {0.0};
        return model;
    }

    std::vector<std::vector<double>> rows(n);
    std::vector<std::size_t> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        rows[i] = model->encode(train_set.instances[i].values);
        const auto it = std::find(model->classes_.begin(), model->classes_.end(),
                                  train_set.instances[i].label);
        y[i] = static_cast<std::size_t>(it - model->classes_.begin());
    }

    model->prior_scores_.resize(n_classes);
    for (std::size_t k = 0; k < n_classes; ++k) {
        std::size_t count = 0;
        for (std::size_t i = 0; i < n; ++i) count += (y[i] == k);
        model->prior_scores_[k] = std::log(static_cast<double>(count) / static_cast<double>(n));
    }

    std::vector<std::vector<double>> scores(n, model->prior_scores_);
    std::vector<std::vector<double>> prob(n, std::vector<double>(n_classes));

    auto refresh_probs_and_loss = [&]() {
        double loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double max_score = scores[i][0];
            for (std::size_t k = 1; k < n_classes; ++k) max_score = std::max(max_score, scores[i][k]);
            double denom = 0.0;
            for (std::size_t k = 0; k < n_classes; ++k) {
                prob[i][k] = std::exp(scores[i][k] - max_score);
                denom += prob[i][k];
            }
            for (std::size_t k = 0; k < n_classes; ++k) prob[i][k] /= denom;
            loss += -std::log(std::max(prob[i][y[i]], 1e-300));
        }
        return loss / static_cast<double>(n);
    };

    model->loss_curve_.push_back(refresh_probs_and_loss());

    const double leaf_factor = static_cast<double>(n_classes - 1) / static_cast<double>(n_classes);
    std::vector<double> residual(n), newton_denom(n);

    for (int stage = 0; stage < params.n_stages; ++stage) {
        std::vector<GbtModel::Tree> stage_trees;
        stage_trees.reserve(n_classes);
        for (std::size_t k = 0; k < n_classes; ++k) {
            for (std::size_t i = 0; i < n; ++i) {
                const double r = (y[i] == k ? 1.0 : 0.0) - prob[i][k];
                residual[i] = r;
                newton_denom[i] = std::abs(r) * (1.0 - std::abs(r));
            }
            stage_trees.push_back(GbtModel::fit_tree(rows, residual, newton_denom,
                                                     model->schema_, params.max_depth, leaf_factor));
        }
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n_classes; ++k)
                scores[i][k] += params.learning_rate * stage_trees[k].eval(rows[i]);
        model->stages_.push_back(std::move(stage_trees));
        model->loss_curve_.push_back(refresh_probs_and_loss());
    }
    return model;
}

std::string GbtModel::to_json() const {
    nlohmann::json doc;
    doc["format"] = "cfgen-gbt";
    doc["version"] = 1;
    doc["learning_rate"] = learning_rate_;
    doc["max_depth"] = max_depth_;
    doc["train_size"] = train_size_;
    doc["classes"] = classes_;
    doc["prior_scores"] = prior_scores_;
    doc["loss_curve"] = loss_curve_;

    nlohmann::json schema;
    schema["class_column"] = schema_.class_column;
    schema["tau"] = schema_.numeric_match_tolerance;
    nlohmann::json feats = nlohmann::json::array();
    for (const auto& f : schema_.features)
        feats.push_back({{"name", f.name},
                         {"kind", f.kind == FeatureKind::numeric ? "numeric" : "categorical"}});
    schema["features"] = std::move(feats);
    doc["schema"] = std::move(schema);

    doc["scaling"] = {{"mean", scaling_.mean},
                      {"std", scaling_.std},
                      {"constant_features", scaling_.constant_features}};

    nlohmann::json stages = nlohmann::json::array();
    for (const auto& stage : stages_) {
        nlohmann::json trees = nlohmann::json::array();
        for (const auto& tree : stage) {
            nlohmann::json nodes = nlohmann::json::array();
            for (const auto& nd : tree.nodes)
                nodes.push_back({{"f", nd.feature},
                                 {"t", nd.threshold},
                                 {"c", nd.category},
                                 {"cat", nd.categorical_split},
                                 {"l", nd.left},
                                 {"r", nd.right},
                                 {"v", nd.value}});
            trees.push_back(std::move(nodes));
        }
        stages.push_back(std::move(trees));
    }
    doc["stages"] = std::move(stages);
    return doc.dump() + "\n";
}

std::unique_ptr<GbtModel> GbtModel::from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad model document: ") + e.what());
    }
    if (doc.value("format", "") != "cfgen-gbt" || doc.value("version", 0) != 1)
        throw ConfigError("bad model document: unknown format/version");
    auto model = std::make_unique<GbtModel>();
    model->learning_rate_ = doc.at("learning_rate").get<double>();
    model->max_depth_ = doc.at("max_depth").get<int>();
    model->train_size_ = doc.at("train_size").get<int>();
    model->classes_ = doc.at("classes").get<std::vector<ClassLabel>>();
    model->prior_scores_ = doc.at("prior_scores").get<std::vector<double>>();
    model->loss_curve_ = doc.at("loss_curve").get<std::vector<double>>();

    const auto& schema = doc.at("schema");
    model->schema_.class_column = schema.at("class_column").get<std::string>();
    model->schema_.numeric_match_tolerance = schema.at("tau").get<double>();
    for (const auto& f : schema.at("features"))
        model->schema_.features.push_back(
            {f.at("name").get<std::string>(),
             f.at("kind").get<std::string>() == "numeric" ? FeatureKind::numeric
                                                          : FeatureKind::categorical});

    const auto& scaling = doc.at("scaling");
    model->scaling_.mean = scaling.at("mean").get<std::vector<double>>();
    model->scaling_.std = scaling.at("std").get<std::vector<double>>();
    model->scaling_.constant_features = scaling.at("constant_features").get<std::vector<std::string>>();

    for (const auto& stage : doc.at("stages")) {
        std::vector<Tree> trees;
        for (const auto& tree_doc : stage) {
            Tree tree;
            for (const auto& nd_doc : tree_doc) {
                TreeNode nd;
                nd.feature = nd_doc.at("f").get<int>();
                nd.threshold = nd_doc.at("t").get<double>();
                nd.category = nd_doc.at("c").get<double>();
                nd.categorical_split = nd_doc.at("cat").get<bool>();
                nd.left = nd_doc.at("l").get<int>();
                nd.right = nd_doc.at("r").get<int>();
                nd.value = nd_doc.at("v").get<double>();
                tree.nodes.push_back(nd);
            }
            trees.push_back(std::move(tree));
        }
        model->stages_.push_back(std::move(trees));
    }
    return model;
}

ClassLabel OneNnModel::predict(std::span<const double> values) const {
    if (values.size() != schema_.feature_count())
        throw RuntimeError("predict: expected " + std::to_string(schema_.feature_count()) +
                           " feature values, got " + std::to_string(values.size()));
    double best = std::numeric_limits<double>::infinity();
    ClassLabel label = train_.front().label;
    for (const auto& inst : train_) {
        const double dist = distance(values, inst.values, scaling_, schema_);
        if (dist < best) {  // ties keep the lower id (ascending order)
            best = dist;
            label = inst.label;
        }
    }
    return label;
}

std::string OneNnModel::describe() const {
    return "1nn(train_n=" + std::to_string(train_.size()) + ")";
}

std::unique_ptr<OneNnModel> train_one_nn(const Dataset& train_set) {
    if (train_set.instances.empty()) throw RuntimeError("cannot train on an empty set");
    auto model = std::make_unique<OneNnModel>();
    model->classes_ = train_set.class_set;
    model->train_ = train_set.instances;
    model->schema_ = train_set.schema;
    model->scaling_ = compute_scaling(train_set);
    return model;
}

}  // namespace cfgen
