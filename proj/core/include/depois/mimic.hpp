/**
 * @file mimic.hpp
 * @brief Mimic-model construction: a conditional WGAN-GP trained on the
 *        augmented dataset. The trained critic D_w is the deployed scorer;
 *        higher scores mean more consistent with clean-data behavior.
 *
 * A plain conditional-GAN discriminator can be swapped in for the critic
 * (ablation composition); it shares the training entry point and the
 * prediction path.
 */
#pragma once

#include "depois/dataset.hpp"
#include "depois/nn.hpp"

namespace depois {

enum class MimicKind { ConditionalWganGp, PlainCgan };

struct MimicTrainConfig {
    Eigen::Index batch_size = 32;
    double learning_rate = 5e-5;  // RMSprop
    int critic_iters = 5;         // n_critic: critic steps per generator step
    double gp_weight = 10.0;      // lambda
    int epochs = 2000;
    std::uint64_t seed = 0;
    std::vector<Eigen::Index> hidden = {128, 256, 128};      // critic widths
    std::vector<Eigen::Index> gen_hidden = {128, 256, 128};  // generator widths
    double regression_noise_std = 0.05;
    double dropout_rate = 0.4;  // plain-cGAN discriminator only
    NoiseSpec noise;
    MimicKind kind = MimicKind::ConditionalWganGp;
};

struct MimicStepLog {
    int epoch = 0;
    int step = 0;
    double wasserstein_estimate = 0.0;  // mean critic(real) - mean critic(fake)
    double critic_objective = 0.0;
    double generator_objective = 0.0;
};

struct MimicModel {
    ModelParams critic;     // D_w; linear head for the WGAN-GP kind
    ModelParams generator;  // G_w
    ConditioningSpec conditioning;
    NoiseSpec noise;
    MimicKind kind = MimicKind::ConditionalWganGp;
    std::vector<MimicStepLog> training_log;
};

/// Per-sample convex combinations eps*real + (1-eps)*fake, eps ~ U[0,1].
Eigen::MatrixXd interpolate_batch(const Eigen::MatrixXd& real, const Eigen::MatrixXd& fake,
                                  std::uint64_t seed);

/// lambda * mean_i (|grad_xhat D(xhat_i | y_i)|_2 - 1)^2. The gradient is
/// taken with respect to the sample part only; `cond` rides along as fixed
/// conditioning input.
double gradient_penalty(const Mlp& critic, const Eigen::MatrixXd& x_hat, const Eigen::MatrixXd& cond,
                        double lambda);

/// critic objective = mean D(fake) - mean D(real) + penalty (minimized);
/// generator objective = -mean D(fake) (minimized).
std::pair<double, double> cwgan_gp_losses(const Eigen::VectorXd& real_scores,
                                          const Eigen::VectorXd& fake_scores, double penalty);

MimicModel train_mimic(const LabeledDataset& s_aug, const MimicTrainConfig& config);

/// D_w(x|y). Deterministic: dropout is disabled at inference.
double mimic_predict(const MimicModel& model, const Eigen::VectorXd& x, double y);
Eigen::VectorXd mimic_predict_batch(const MimicModel& model, const Eigen::MatrixXd& x,
                                    const Eigen::VectorXd& y);

}  // namespace depois
