// Independent reference implementations used as test oracles. Everything here
// is deliberately brute-force and kept separate from the library code paths
// it checks.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <vector>

#include "depois/nn.hpp"

namespace oracles {

// Brute-force confusion counts; positive = poisoned.
struct BruteConfusion {
    long tp = 0, fp = 0, tn = 0, fn = 0;
};

inline BruteConfusion brute_confusion(const std::vector<std::uint8_t>& flags,
                                      const std::vector<std::uint8_t>& truth) {
    BruteConfusion c;
    for (std::size_t i = 0; i < flags.size(); ++i) {
        if (truth[i] && flags[i]) ++c.tp;
        if (truth[i] && !flags[i]) ++c.fn;
        if (!truth[i] && flags[i]) ++c.fp;
        if (!truth[i] && !flags[i]) ++c.tn;
    }
    return c;
}

// O(n^3) Hungarian algorithm (potentials formulation) for square cost
// matrices; returns the minimum total assignment cost.
inline double hungarian_min_cost(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> match(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = match[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const int j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0);
    }
    double total = 0.0;
    for (int j = 1; j <= n; ++j) total += cost[match[j] - 1][j - 1];
    return total;
}

// Assignment-based 1-Wasserstein oracle for equal-size sample sets.
inline double assignment_w1(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = a.size();
    std::vector<std::vector<double>> cost(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) cost[i][j] = std::abs(a[i] - b[j]);
    return hungarian_min_cost(cost) / static_cast<double>(n);
}

// Double-loop mean pairwise Euclidean distance.
inline double double_loop_aed(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < y.rows(); ++j) {
            double sq = 0.0;
            for (Eigen::Index k = 0; k < x.cols(); ++k)
                sq += (x(i, k) - y(j, k)) * (x(i, k) - y(j, k));
            sum += std::sqrt(sq);
        }
    return sum / (static_cast<double>(x.rows()) * static_cast<double>(y.rows()));
}

// Termwise inception score: exp(mean KL(p(y|x) || p(y))).
inline double double_sum_is(const Eigen::MatrixXd& probs) {
    std::vector<double> marginal(static_cast<std::size_t>(probs.cols()), 0.0);
    for (Eigen::Index i = 0; i < probs.rows(); ++i)
        for (Eigen::Index j = 0; j < probs.cols(); ++j)
            marginal[static_cast<std::size_t>(j)] += probs(i, j) / static_cast<double>(probs.rows());
    double total = 0.0;
    for (Eigen::Index i = 0; i < probs.rows(); ++i)
        for (Eigen::Index j = 0; j < probs.cols(); ++j)
            if (probs(i, j) > 0.0)
                total += probs(i, j) * std::log(probs(i, j) / marginal[static_cast<std::size_t>(j)]);
    return std::exp(total / static_cast<double>(probs.rows()));
}

// Central finite differences over selected flattened parameters of a network.
inline std::vector<double> finite_diff_param_grads(const depois::Mlp& net,
                                                   const std::function<double(const depois::Mlp&)>& f,
                                                   const std::vector<std::size_t>& probe,
                                                   double h = 1e-5) {
    std::vector<double> flat;
    net.flatten_into(flat);
    std::vector<double> grads;
    for (std::size_t p : probe) {
        depois::Mlp copy = net;
        std::vector<double> bumped = flat;
        bumped[p] = flat[p] + h;
        copy.unflatten_from(bumped.data(), bumped.size());
        const double fp = f(copy);
        bumped[p] = flat[p] - h;
        copy.unflatten_from(bumped.data(), bumped.size());
        const double fm = f(copy);
        grads.push_back((fp - fm) / (2.0 * h));
    }
    return grads;
}

// Depth-limited CART (gini impurity) used to certify non-linear separability.
class DecisionTreeOracle {
  public:
    void fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int max_depth) {
        root_ = build(x, y, indices(x.rows()), max_depth);
    }

    int predict(const Eigen::RowVectorXd& x) const {
        const Node* node = root_.get();
        while (node->feature >= 0) node = x(node->feature) < node->threshold ? node->left.get() : node->right.get();
        return node->label;
    }

    double accuracy(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) const {
        Eigen::Index hit = 0;
        for (Eigen::Index i = 0; i < x.rows(); ++i)
            if (predict(x.row(i)) == static_cast<int>(y(i))) ++hit;
        return static_cast<double>(hit) / static_cast<double>(x.rows());
    }

  private:
    struct Node {
        int feature = -1;
        double threshold = 0.0;
        int label = 0;
        std::unique_ptr<Node> left, right;
    };
    std::unique_ptr<Node> root_;

    static std::vector<Eigen::Index> indices(Eigen::Index n) {
        std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
        return idx;
    }

    static double gini(const std::vector<Eigen::Index>& idx, const Eigen::VectorXd& y) {
        if (idx.empty()) return 0.0;
        double p1 = 0.0;
        for (auto i : idx) p1 += y(i);
        p1 /= static_cast<double>(idx.size());
        return 2.0 * p1 * (1.0 - p1);
    }

    std::unique_ptr<Node> build(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                std::vector<Eigen::Index> idx, int depth) {
        auto node = std::make_unique<Node>();
        double ones = 0.0;
        for (auto i : idx) ones += y(i);
        node->label = ones * 2.0 >= static_cast<double>(idx.size()) ? 1 : 0;
        if (depth == 0 || idx.size() < 2 || ones == 0.0 || ones == static_cast<double>(idx.size()))
            return node;

        double best_score = std::numeric_limits<double>::infinity();
        int best_feature = -1;
        double best_thr = 0.0;
        for (int f = 0; f < x.cols(); ++f) {
            std::vector<Eigen::Index> sorted = idx;
            std::sort(sorted.begin(), sorted.end(),
                      [&](Eigen::Index a, Eigen::Index b) { return x(a, f) < x(b, f); });
            for (std::size_t k = 1; k < sorted.size(); ++k) {
                if (x(sorted[k], f) == x(sorted[k - 1], f)) continue;
                const double thr = (x(sorted[k], f) + x(sorted[k - 1], f)) / 2.0;
                std::vector<Eigen::Index> l(sorted.begin(), sorted.begin() + static_cast<long>(k));
                std::vector<Eigen::Index> r(sorted.begin() + static_cast<long>(k), sorted.end());
                const double score = (gini(l, y) * static_cast<double>(l.size()) +
                                      gini(r, y) * static_cast<double>(r.size())) /
                                     static_cast<double>(idx.size());
                if (score < best_score) {
                    best_score = score;
                    best_feature = f;
                    best_thr = thr;
                }
            }
        }
        if (best_feature < 0) return node;

        std::vector<Eigen::Index> l, r;
        for (auto i : idx) (x(i, best_feature) < best_thr ? l : r).push_back(i);
        if (l.empty() || r.empty()) return node;
        node->feature = best_feature;
        node->threshold = best_thr;
        node->left = build(x, y, std::move(l), depth - 1);
        node->right = build(x, y, std::move(r), depth - 1);
        return node;
    }
};

// Least-squares linear classifier (sign of an affine fit on +-1 labels).
inline double linear_classifier_accuracy(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    Eigen::MatrixXd design(x.rows(), x.cols() + 1);
    design << x, Eigen::VectorXd::Ones(x.rows());
    Eigen::VectorXd signed_y = 2.0 * y.array() - 1.0;
    const Eigen::VectorXd w = design.colPivHouseholderQr().solve(signed_y);
    Eigen::Index hit = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const int pred = design.row(i).dot(w) >= 0 ? 1 : 0;
        if (pred == static_cast<int>(y(i))) ++hit;
    }
    return static_cast<double>(hit) / static_cast<double>(x.rows());
}

}  // namespace oracles
