/**
 * @file augmenter.hpp
 * @brief Trusted-data augmentation: conditional GAN plus authenticator,
 *        trained by Monte-Carlo EM, and the assembly of the augmented set.
 *
 * The discriminator minimizes its adversarial loss plus the authenticator
 * loss on the current Monte-Carlo draws; the generator minimizes its
 * adversarial loss minus that same authenticator loss. Training stops when
 * the parameter delta falls below tolerance or the iteration budget runs out.
 */
#pragma once

#include <functional>

#include "depois/dataset.hpp"
#include "depois/nn.hpp"

namespace depois {

struct AugmentTrainConfig {
    Eigen::Index batch_size = 128;
    Eigen::Index mc_samples = 64;  // M_s, synthetic draws per iteration
    int max_iters = 5000;
    double param_delta_tol = 1e-4;  // L2 norm of the concatenated parameter delta
    double step_size = 0.05;        // SGD step
    std::uint64_t seed = 0;
    std::vector<Eigen::Index> hidden = {128, 256, 128};
    std::vector<Eigen::Index> auth_hidden = {64, 64};
    double auth_l1 = 1e-4;              // L1 penalty of the regression authenticator
    double dropout_rate = 0.4;          // discriminator hidden layers
    double regression_noise_std = 0.05; // z_r
    bool use_authenticator = true;      // ablation switch
    NoiseSpec noise;
};

struct AugmentIterLog {
    int iter = 0;
    double d_objective = 0.0;
    double g_objective = 0.0;
    double auth_loss = 0.0;
    double param_delta = 0.0;
};

struct AugmenterModel {
    ModelParams generator;      // G_c
    ModelParams discriminator;  // D_c
    ModelParams authenticator;
    ConditioningSpec conditioning;
    NoiseSpec noise;
    bool has_authenticator = true;
    std::vector<AugmentIterLog> training_log;

    // Schema snapshot of the training data, so generated sets match it.
    Task task = Task::Classification;
    int n_classes = 0;
    std::vector<ColumnInfo> columns;
    std::string target_name = "target";
};

/// Cross-entropy -(1/M_s) sum_i sum_j y_i^j log(yhat_i^j); probabilities are
/// clamped at 1e-12 inside the log.
double authenticator_loss_classification(const Eigen::MatrixXd& pred_probs, const Eigen::VectorXi& labels);

/// Mean squared error (1/M_s) sum_i (y_i - yhat_i)^2.
double authenticator_loss_regression(const Eigen::VectorXd& preds, const Eigen::VectorXd& targets);

/// Minimization-form cGAN objectives with the authenticator coupling:
/// d = -mean log(d_real) - mean log(1 - d_fake) + L_A,
/// g = -mean log(d_fake) - L_A.
std::pair<double, double> cgan_losses(const Eigen::VectorXd& d_real, const Eigen::VectorXd& d_fake,
                                      double auth_loss);

AugmenterModel train_augmenter(const LabeledDataset& trusted, const AugmentTrainConfig& config);

/// Draws conditioning values (class ids or regression targets).
class ConditionSampler {
  public:
    static ConditionSampler fixed_class(int c);
    static ConditionSampler uniform_classes(int n_classes);
    /// Samples from the dataset's empirical target distribution.
    static ConditionSampler empirical(const LabeledDataset& ds);

    double sample(std::mt19937_64& rng) const { return fn_(rng); }

  private:
    std::function<double(std::mt19937_64&)> fn_;
};

/// n rows of G_c(z|y); targets are the sampled conditions (pre-noise for
/// regression).
LabeledDataset generate_synthetic(const AugmenterModel& model, Eigen::Index n,
                                  const ConditionSampler& conditions, std::uint64_t seed);

/// Optional top-up hook when the synthetic pool is short of target_size.
using SyntheticGenerator = std::function<LabeledDataset(Eigen::Index)>;

/// S_aug: every trusted row plus (target_size - |trusted|) synthetic rows
/// sampled without replacement. When the pool is short, `top_up` is invoked
/// for the remainder; without a hook that case is an error.
LabeledDataset assemble_augmented(const LabeledDataset& trusted, const LabeledDataset& synthetic,
                                  Eigen::Index target_size, std::uint64_t seed,
                                  const SyntheticGenerator& top_up = nullptr);

}  // namespace depois
