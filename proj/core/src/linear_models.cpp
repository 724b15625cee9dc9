#include "depois/linear_models.hpp"

#include <cmath>

namespace depois {

LinearRegressor LinearRegressor::fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    Eigen::MatrixXd design(x.rows(), x.cols() + 1);
    design << x, Eigen::VectorXd::Ones(x.rows());
    Eigen::VectorXd sol = design.colPivHouseholderQr().solve(y);
    LinearRegressor m;
    m.weights = sol.head(x.cols());
    m.bias = sol(x.cols());
    return m;
}

Eigen::VectorXd LinearRegressor::predict(const Eigen::MatrixXd& x) const {
    return (x * weights).array() + bias;
}

double LinearRegressor::mse(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) const {
    return (predict(x) - y).squaredNorm() / static_cast<double>(y.size());
}

double LinearRegressor::r2(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) const {
    const double ss_res = (predict(x) - y).squaredNorm();
    const double ss_tot = (y.array() - y.mean()).matrix().squaredNorm();
    return ss_tot > 0 ? 1.0 - ss_res / ss_tot : 0.0;
}

namespace {

Eigen::MatrixXd softmax_rows(Eigen::MatrixXd logits) {
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        const double m = logits.row(i).maxCoeff();
        logits.row(i) = (logits.row(i).array() - m).exp();
        logits.row(i) /= logits.row(i).sum();
    }
    return logits;
}

}  // namespace

LogisticClassifier LogisticClassifier::fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& labels,
                                           int n_classes, int iters, double lr) {
    const Eigen::Index n = x.rows();
    LogisticClassifier m;
    m.weights = Eigen::MatrixXd::Zero(n_classes, x.cols());
    m.bias = Eigen::VectorXd::Zero(n_classes);

    Eigen::MatrixXd one_hot = Eigen::MatrixXd::Zero(n, n_classes);
    for (Eigen::Index i = 0; i < n; ++i) one_hot(i, static_cast<int>(labels(i))) = 1.0;

    for (int it = 0; it < iters; ++it) {
        Eigen::MatrixXd p = softmax_rows((x * m.weights.transpose()).rowwise() + m.bias.transpose());
        Eigen::MatrixXd diff = (p - one_hot) / static_cast<double>(n);
        m.weights -= lr * (diff.transpose() * x);
        m.bias -= lr * diff.colwise().sum().transpose();
    }
    return m;
}

Eigen::MatrixXd LogisticClassifier::predict_proba(const Eigen::MatrixXd& x) const {
    return softmax_rows((x * weights.transpose()).rowwise() + bias.transpose());
}

Eigen::VectorXi LogisticClassifier::predict(const Eigen::MatrixXd& x) const {
    Eigen::MatrixXd p = predict_proba(x);
    Eigen::VectorXi out(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        Eigen::Index best;
        p.row(i).maxCoeff(&best);
        out(i) = static_cast<int>(best);
    }
    return out;
}

double LogisticClassifier::accuracy(const Eigen::MatrixXd& x, const Eigen::VectorXd& labels) const {
    Eigen::VectorXi pred = predict(x);
    Eigen::Index hit = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        if (pred(i) == static_cast<int>(labels(i))) ++hit;
    return static_cast<double>(hit) / static_cast<double>(x.rows());
}

}  // namespace depois
