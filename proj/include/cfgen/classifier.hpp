#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "cfgen/dataset.hpp"

namespace cfgen {

// The underlying decision model. Anything with this contract can sit
// behind counterfactual validation.
class Model {
public:
    virtual ~Model() = default;

    // Label for a raw feature vector aligned with the training schema.
    // Always one of class_set(); throws RuntimeError on arity mismatch.
    virtual ClassLabel predict(std::span<const double> values) const = 0;

    virtual const std::vector<ClassLabel>& class_set() const = 0;
    virtual std::string describe() const = 0;
};

struct GBTParams {
    double learning_rate = 0.1;
    int n_stages = 100;
    int max_depth = 3;
    // Loss is multinomial logistic deviance; one regression tree per class
    // per stage fit to the softmax gradient.
};

class GbtModel final : public Model {
public:
    ClassLabel predict(std::span<const double> values) const override;
    const std::vector<ClassLabel>& class_set() const override { return classes_; }
    std::string describe() const override;

    // Raw additive scores per class, before the argmax.
    std::vector<double> decision_scores(std::span<const double> values) const;

    // Training deviance after each boosting stage (index 0 = prior only).
    const std::vector<double>& train_log_loss_curve() const { return loss_curve_; }

    std::string to_json() const;
    static std::unique_ptr<GbtModel> from_json(const std::string& text);

private:
    struct TreeNode {
        int feature = -1;          // -1 for leaves
        double threshold = 0.0;    // numeric: go left when value <= threshold
        double category = 0.0;     // categorical: go left when value == category
        bool categorical_split = false;
        int left = -1;
        int right = -1;
        double value = 0.0;        // leaf payload
    };
    struct Tree {
        std::vector<TreeNode> nodes;
        double eval(std::span<const double> encoded) const;
    };

    // Least-squares regression tree on residual targets with Newton leaf
    // values for the multinomial loss.
    static Tree fit_tree(const std::vector<std::vector<double>>& rows,
                         const std::vector<double>& residual,
                         const std::vector<double>& newton_denom,
                         const FeatureSchema& schema, int max_depth, double leaf_factor);

    std::vector<ClassLabel> classes_;
    std::vector<double> prior_scores_;           // per class
    std::vector<std::vector<Tree>> stages_;      // [stage][class]
    double learning_rate_ = 0.1;
    int max_depth_ = 3;
    FeatureSchema schema_;
    ScalingStats scaling_;                       // fit on the training set
    std::vector<double> loss_curve_;
    int train_size_ = 0;

    std::vector<double> encode(std::span<const double> values) const;

    friend std::unique_ptr<GbtModel> train_gbt(const Dataset&, const GBTParams&, std::uint64_t);
};

// Gradient-boosted trees on the multinomial logistic loss. Numeric features
// are standardized with stats fit on the training set; categorical features
// enter as integer codes with equality splits. Training is deterministic;
// the seed is accepted for interface parity with stochastic variants and
// recorded in the model metadata.
std::unique_ptr<GbtModel> train_gbt(const Dataset& train_set, const GBTParams& params,
                                    std::uint64_t seed);

// Nearest-neighbour classifier over the standardized distance; debugging
// stand-in for the boosted model.
class OneNnModel final : public Model {
public:
    ClassLabel predict(std::span<const double> values) const override;
    const std::vector<ClassLabel>& class_set() const override { return classes_; }
    std::string describe() const override;

private:
    std::vector<ClassLabel> classes_;
    std::vector<Instance> train_;
    FeatureSchema schema_;
    ScalingStats scaling_;

    friend std::unique_ptr<OneNnModel> train_one_nn(const Dataset&);
};

std::unique_ptr<OneNnModel> train_one_nn(const Dataset& train_set);

}  // namespace cfgen
