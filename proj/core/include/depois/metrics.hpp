/**
 * @file metrics.hpp
 * @brief Detection-quality and generation-quality metrics.
 *
 * Positive class = poisoned throughout. The generation-quality side uses a
 * declared proxy: a small classifier trained on trusted data stands in for
 * the Inception network, and embeddings default to the raw feature space.
 */
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

namespace depois {

struct ConfusionReport {
    std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;
    double accuracy = 0.0;
    double precision = 0.0;  // 0 when tp+fp == 0
    double recall = 0.0;     // 0 when tp+fn == 0
    double f1 = 0.0;         // 0 when precision+recall == 0
};

/// Counts with "positive" meaning poisoned; degenerate ratios resolve to 0.
ConfusionReport confusion_metrics(const std::vector<std::uint8_t>& flags,
                                  const std::vector<std::uint8_t>& truth);

struct GenQualityReport {
    double is_score = 1.0;  // proxy inception score, >= 1
    double fid = 0.0;       // proxy FID on embeddings
    double wd = 0.0;        // sliced multi-dim Wasserstein
    double aed = 0.0;       // average pairwise Euclidean distance
};

/// exp(mean_x KL(p(y|x) || p(y))) with p(y) the marginal over the sample set.
/// `class_probs` rows must be probability simplexes.
double proxy_inception_score(const Eigen::MatrixXd& class_probs);

using ClassProbScorer = std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>;

/// Scores the samples with the proxy classifier, then applies the form above.
double proxy_inception_score(const Eigen::MatrixXd& features, const ClassProbScorer& classifier);

/// Frechet distance between Gaussians fitted to the two embedding sets:
/// |m_r - m_g|^2 + Tr(C_r + C_g - 2 (C_r C_g)^{1/2}), the matrix square root
/// taken through symmetric PSD eigendecompositions.
double proxy_fid(const Eigen::MatrixXd& real_embeds, const Eigen::MatrixXd& fake_embeds);

/// Empirical 1-Wasserstein distance; exact quantile-function integral for
/// unequal sample counts.
double wasserstein_1d(std::vector<double> a, std::vector<double> b);

/// Mean pairwise Euclidean distance between the rows of two sets.
double aed(const Eigen::MatrixXd& x_set, const Eigen::MatrixXd& y_set);

/// Sliced approximation: mean of wasserstein_1d over `projections` random
/// unit directions drawn from `seed`.
double multidim_wd(const Eigen::MatrixXd& real, const Eigen::MatrixXd& fake, int projections = 128,
                   std::uint64_t seed = 0);

/// Spearman rank correlation (average-rank ties). Used by trend assertions.
double spearman_rank_correlation(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace depois
