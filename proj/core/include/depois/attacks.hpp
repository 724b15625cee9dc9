/**
 * @file attacks.hpp
 * @brief Reference poisoning attacks with ground-truth poison masks.
 *
 * Every attack appends crafted rows to an untouched copy of the clean input,
 * tags them poisoned, and reports the realized budget. Externally produced
 * poison sets (GAN-based attacks etc.) enter through load_external_poison.
 */
#pragma once

#include <functional>
#include <memory>

#include "depois/dataset.hpp"

namespace depois {

/// Attacker budget R_p = |S_p| / |S_c|. Rates above 30% are rejected.
struct PoisonBudget {
    double rate;
    std::uint64_t seed = 0;

    PoisonBudget(double r, std::uint64_t s) : rate(r), seed(s) {
        if (!(r > 0.0) || r > 0.3) throw std::invalid_argument("PoisonBudget: rate must be in (0, 0.3]");
    }
};

struct AttackResult {
    LabeledDataset dataset;                // clean rows followed by poison rows
    std::vector<std::uint8_t> poison_mask; // per row of `dataset`
    std::string attack_name;
    double realized_rate = 0.0;

    Eigen::Index poison_count() const;
};

/// Row-wise class-probability scorer (n x n_classes simplex rows).
using ProbabilityScorer = std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>;

/// Trains a multinomial logistic victim on the given dataset and wraps it as
/// a probability scorer.
ProbabilityScorer make_logistic_victim(const LabeledDataset& clean);

/// Duplicates the highest-confidence samples with flipped labels (binary:
/// complement, multiclass: the victim's runner-up class). Features unchanged.
AttackResult label_flip_attack(const LabeledDataset& clean, const ProbabilityScorer& victim,
                               const PoisonBudget& budget);

/// Statistical regression attack: poison features drawn from a moment-matched
/// multivariate normal clipped to [0,1]; targets pushed to whichever
/// feasibility boundary value {0,1} is farther from a clean linear model's
/// prediction. Falls back to a diagonal covariance when the fitted covariance
/// is not positive definite.
AttackResult regression_attack_statistical(const LabeledDataset& clean, const PoisonBudget& budget);

/// Differentiable feature map used by the collision attack.
class FeatureExtractor {
  public:
    virtual ~FeatureExtractor() = default;
    virtual Eigen::VectorXd map(const Eigen::VectorXd& x) const = 0;
    /// J(x)^T v for the Jacobian J of map at x.
    virtual Eigen::VectorXd pullback(const Eigen::VectorXd& x, const Eigen::VectorXd& v) const = 0;
};

class LinearExtractor : public FeatureExtractor {
  public:
    explicit LinearExtractor(Eigen::MatrixXd a) : a_(std::move(a)) {}
    Eigen::VectorXd map(const Eigen::VectorXd& x) const override { return a_ * x; }
    Eigen::VectorXd pullback(const Eigen::VectorXd&, const Eigen::VectorXd& v) const override {
        return a_.transpose() * v;
    }
    const Eigen::MatrixXd& matrix() const { return a_; }

  private:
    Eigen::MatrixXd a_;
};

struct CollisionOptions {
    double beta = 0.1;   // proximity weight toward the base instance
    double step = 0.01;  // fixed gradient-descent step
    int iters = 500;
};

/// Clean-label feature-collision attack: each poison p minimizes
/// |f(p) - f(target)|^2 + beta |p - base|^2 by projected gradient descent in
/// the [0,1] box; poison labels stay base_class.
AttackResult feature_collision_attack(const LabeledDataset& clean, const Eigen::VectorXd& target_sample,
                                      int target_class, int base_class, const FeatureExtractor& extractor,
                                      const PoisonBudget& budget, const CollisionOptions& opt = {});

/// Appends rows from a poison CSV (dataset schema plus optional `poisoned`
/// column) with poison_mask = true. The file may be empty (header only).
AttackResult load_external_poison(const LabeledDataset& clean, const std::string& poison_file);

}  // namespace depois
