/**
 * @file synthetic.hpp
 * @brief Desk-scale synthetic dataset generators.
 *
 * Stand-ins for the tabular benchmark files so every experiment runs offline:
 * a non-linearly-separable 2-D binary classification set and a linear
 * regression set with known generating coefficients.
 */
#pragma once

#include <cstdint>

#include "depois/dataset.hpp"

namespace depois {

enum class Layout2d { TwoMoonsLike, RingVsCore };

/// 2-feature, 2-class dataset, class balance within +-10% of 50/50, features
/// min-max scaled to [0,1]. With noise == 0 the classes are exactly separable
/// by the generating rule.
LabeledDataset make_synthetic_2d(Eigen::Index n, Layout2d layout, double noise, std::uint64_t seed);

/// Regression targets w.x + b + Gaussian noise, min-max scaled to [0,1].
/// The generating coefficients are recorded in dataset metadata
/// ("gen_w0".."gen_w{d-1}", "gen_b", plus the target scaling used).
LabeledDataset make_synthetic_regression(Eigen::Index n, Eigen::Index n_features, double noise_std,
                                         std::uint64_t seed);

}  // namespace depois
