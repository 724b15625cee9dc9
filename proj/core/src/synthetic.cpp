#include "depois/synthetic.hpp"

#include <cmath>
#include <numbers>

#include "depois/rng.hpp"

namespace depois {

namespace {

LabeledDataset finish_2d(Eigen::MatrixXd x, Eigen::VectorXd y) {
    LabeledDataset ds;
    ds.features = std::move(x);
    ds.targets = std::move(y);
    ds.task = Task::Classification;
    ds.n_classes = 2;
    ds.row_tags.assign(static_cast<std::size_t>(ds.features.rows()), kTagNone);
    ds.columns = {ColumnInfo{"x0", {}}, ColumnInfo{"x1", {}}};
    auto [scaled, rec] = normalize_features(ds);
    (void)rec;
    return scaled;
}

}  // namespace

LabeledDataset make_synthetic_2d(Eigen::Index n, Layout2d layout, double noise, std::uint64_t seed) {
    if (n < 10) throw std::invalid_argument("make_synthetic_2d: n must be >= 10");
    auto rng = make_rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    Eigen::MatrixXd x(n, 2);
    Eigen::VectorXd y(n);
    const Eigen::Index n0 = n / 2;

    if (layout == Layout2d::RingVsCore) {
        // Core disk (class 0) of radius 0.5 inside a ring (class 1) at radius
        // [1.0, 1.3): disjoint radial supports, so noise=0 is exactly separable.
        for (Eigen::Index i = 0; i < n; ++i) {
            const bool core = i < n0;
            const double theta = 2.0 * std::numbers::pi * unif(rng);
            const double r = core ? 0.5 * std::sqrt(unif(rng)) : 1.0 + 0.3 * unif(rng);
            x(i, 0) = r * std::cos(theta) + noise * gauss(rng);
            x(i, 1) = r * std::sin(theta) + noise * gauss(rng);
            y(i) = core ? 0.0 : 1.0;
        }
    } else {
        // Two interleaved half-circles.
        for (Eigen::Index i = 0; i < n; ++i) {
            const bool first = i < n0;
            const double t = std::numbers::pi * unif(rng);
            if (first) {
                x(i, 0) = std::cos(t);
                x(i, 1) = std::sin(t);
            } else {
                x(i, 0) = 1.0 - std::cos(t);
                x(i, 1) = 0.5 - std::sin(t);
            }
            x(i, 0) += noise * gauss(rng);
            x(i, 1) += noise * gauss(rng);
            y(i) = first ? 0.0 : 1.0;
        }
    }
    return finish_2d(std::move(x), std::move(y));
}

LabeledDataset make_synthetic_regression(Eigen::Index n, Eigen::Index n_features, double noise_std,
                                         std::uint64_t seed) {
    if (n < 10) throw std::invalid_argument("make_synthetic_regression: n must be >= 10");
    if (n_features < 1) throw std::invalid_argument("make_synthetic_regression: n_features must be >= 1");
    auto rng = make_rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    Eigen::VectorXd w(n_features);
    for (Eigen::Index j = 0; j < n_features; ++j) w(j) = gauss(rng);
    const double b = gauss(rng);

    LabeledDataset ds;
    ds.features.resize(n, n_features);
    ds.targets.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n_features; ++j) ds.features(i, j) = unif(rng);
        ds.targets(i) = w.dot(ds.features.row(i)) + b + noise_std * gauss(rng);
    }
    ds.task = Task::Regression;
    ds.row_tags.assign(static_cast<std::size_t>(n), kTagNone);
    for (Eigen::Index j = 0; j < n_features; ++j) {
        ds.columns.push_back(ColumnInfo{"x" + std::to_string(j), {}});
        ds.metadata["gen_w" + std::to_string(j)] = w(j);
    }
    ds.metadata["gen_b"] = b;

    ScalingRecord rec;
    rec.col_min = ds.features.colwise().minCoeff();
    rec.col_max = ds.features.colwise().maxCoeff();
    auto [scaled, full_rec] = normalize_targets(ds, rec);
    scaled.metadata["target_min"] = full_rec.target_min;
    scaled.metadata["target_max"] = full_rec.target_max;
    return scaled;
}

}  // namespace depois
