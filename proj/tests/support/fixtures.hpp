// Shared dataset fixtures for the unit tests.
#pragma once

#include <algorithm>

#include "depois/dataset.hpp"
#include "depois/rng.hpp"

namespace fixtures {

// Two Gaussian blobs in [0,1]^2, one per class, centered at 0.5 +- gap/2 on
// both axes. The default is well separated; pass a small gap / large sd for
// overlapping classes.
inline depois::LabeledDataset gaussian_mixture(Eigen::Index n, std::uint64_t seed, double gap = 0.4,
                                               double sd = 0.05) {
    auto rng = depois::make_rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    depois::LabeledDataset ds;
    ds.features.resize(n, 2);
    ds.targets.resize(n);
    ds.task = depois::Task::Classification;
    ds.n_classes = 2;
    ds.row_tags.assign(static_cast<std::size_t>(n), depois::kTagNone);
    for (Eigen::Index i = 0; i < n; ++i) {
        const bool zero = i < n / 2;
        const double cx = zero ? 0.5 - gap / 2 : 0.5 + gap / 2;
        ds.features(i, 0) = std::clamp(cx + sd * gauss(rng), 0.0, 1.0);
        ds.features(i, 1) = std::clamp(cx + sd * gauss(rng), 0.0, 1.0);
        ds.targets(i) = zero ? 0.0 : 1.0;
    }
    return ds;
}

// Tiny k-nearest-neighbour classifier: vote shares as class probabilities.
// Used as an attack victim; exact feature duplicates with flipped labels
// corrupt its neighbourhoods directly.
struct Knn {
    int k = 5;
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    int n_classes = 2;

    Eigen::MatrixXd proba(const Eigen::MatrixXd& queries, bool exclude_self = false) const {
        Eigen::MatrixXd out = Eigen::MatrixXd::Zero(queries.rows(), n_classes);
        for (Eigen::Index q = 0; q < queries.rows(); ++q) {
            std::vector<std::pair<double, Eigen::Index>> dist;
            dist.reserve(static_cast<std::size_t>(x.rows()));
            for (Eigen::Index i = 0; i < x.rows(); ++i)
                dist.emplace_back((x.row(i) - queries.row(q)).squaredNorm(), i);
            std::sort(dist.begin(), dist.end());
            int taken = 0;
            bool skipped_self = false;
            for (const auto& [d, i] : dist) {
                if (exclude_self && !skipped_self && d == 0.0) {
                    skipped_self = true;
                    continue;
                }
                out(q, static_cast<int>(y(i))) += 1.0;
                if (++taken == k) break;
            }
            out.row(q) /= out.row(q).sum();
        }
        return out;
    }

    double accuracy(const Eigen::MatrixXd& qx, const Eigen::VectorXd& qy) const {
        const Eigen::MatrixXd p = proba(qx);
        Eigen::Index hit = 0;
        for (Eigen::Index i = 0; i < qx.rows(); ++i) {
            Eigen::Index best;
            p.row(i).maxCoeff(&best);
            if (static_cast<int>(best) == static_cast<int>(qy(i))) ++hit;
        }
        return static_cast<double>(hit) / static_cast<double>(qx.rows());
    }
};

}  // namespace fixtures
