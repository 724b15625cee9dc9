/**
 * @file linear_models.hpp
 * @brief Small deterministic reference models.
 *
 * Used as attack victims, as the proxy classifier behind generation-quality
 * metrics, and as evaluation baselines. Not part of the defense itself.
 */
#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "depois/dataset.hpp"

namespace depois {

/// Ordinary least squares with an intercept (solved via column-pivoted QR).
struct LinearRegressor {
    Eigen::VectorXd weights;
    double bias = 0.0;

    static LinearRegressor fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);
    Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;
    double mse(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) const;
    double r2(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) const;
};

/// Multinomial logistic regression trained by full-batch gradient descent.
/// Deterministic for fixed inputs (zero-initialized, fixed iteration count).
struct LogisticClassifier {
    Eigen::MatrixXd weights;  // n_classes x n_features
    Eigen::VectorXd bias;     // n_classes

    static LogisticClassifier fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& labels, int n_classes,
                                  int iters = 400, double lr = 0.5);
    /// Row-wise class probability simplex, n x n_classes.
    Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& x) const;
    Eigen::VectorXi predict(const Eigen::MatrixXd& x) const;
    double accuracy(const Eigen::MatrixXd& x, const Eigen::VectorXd& labels) const;
};

}  // namespace depois
