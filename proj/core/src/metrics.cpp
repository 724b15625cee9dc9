#include "depois/metrics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "depois/rng.hpp"

namespace depois {

ConfusionReport confusion_metrics(const std::vector<std::uint8_t>& flags,
                                  const std::vector<std::uint8_t>& truth) {
    if (flags.size() != truth.size()) throw std::invalid_argument("confusion_metrics: length mismatch");
    if (flags.empty()) throw std::invalid_argument("confusion_metrics: empty input");
    ConfusionReport r;
    for (std::size_t i = 0; i < flags.size(); ++i) {
        const bool f = flags[i] != 0, t = truth[i] != 0;
        if (f && t)
            ++r.tp;
        else if (f && !t)
            ++r.fp;
        else if (!f && t)
            ++r.fn;
        else
            ++r.tn;
    }
    const double n = static_cast<double>(flags.size());
    r.accuracy = static_cast<double>(r.tp + r.tn) / n;
    r.precision = r.tp + r.fp > 0 ? static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fp) : 0.0;
    r.recall = r.tp + r.fn > 0 ? static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fn) : 0.0;
    r.f1 = r.precision + r.recall > 0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
    return r;
}

double proxy_inception_score(const Eigen::MatrixXd& class_probs) {
    if (class_probs.rows() == 0) throw std::invalid_argument("proxy_inception_score: empty sample set");
    const Eigen::VectorXd marginal = class_probs.colwise().mean();
    double mean_kl = 0.0;
    for (Eigen::Index i = 0; i < class_probs.rows(); ++i) {
        double kl = 0.0;
        for (Eigen::Index j = 0; j < class_probs.cols(); ++j) {
            const double p = class_probs(i, j);
            if (p > 0.0) kl += p * std::log(p / marginal(j));
        }
        mean_kl += kl;
    }
    return std::exp(mean_kl / static_cast<double>(class_probs.rows()));
}

double proxy_inception_score(const Eigen::MatrixXd& features, const ClassProbScorer& classifier) {
    if (features.rows() == 0) throw std::invalid_argument("proxy_inception_score: empty sample set");
    return proxy_inception_score(classifier(features));
}

namespace {

Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& x) {
    const Eigen::RowVectorXd mean = x.colwise().mean();
    const Eigen::MatrixXd centered = x.rowwise() - mean;
    return centered.transpose() * centered / static_cast<double>(x.rows() - 1);
}

// Symmetric PSD square root; eigenvalues slightly below zero are clamped,
// anything below -tol is an error.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m, double tol) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    if (es.info() != Eigen::Success) throw std::runtime_error("psd_sqrt: eigendecomposition failed");
    Eigen::VectorXd ev = es.eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev(i) < -tol) throw std::runtime_error("psd_sqrt: matrix is not PSD beyond tolerance");
        ev(i) = std::sqrt(std::max(ev(i), 0.0));
    }
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

double proxy_fid(const Eigen::MatrixXd& real_embeds, const Eigen::MatrixXd& fake_embeds) {
    if (real_embeds.rows() < 2 || fake_embeds.rows() < 2)
        throw std::invalid_argument("proxy_fid: need at least 2 rows per set");
    if (real_embeds.cols() != fake_embeds.cols())
        throw std::invalid_argument("proxy_fid: embedding dimension mismatch");

    const Eigen::VectorXd mr = real_embeds.colwise().mean();
    const Eigen::VectorXd mg = fake_embeds.colwise().mean();
    const Eigen::MatrixXd cr = sample_covariance(real_embeds);
    const Eigen::MatrixXd cg = sample_covariance(fake_embeds);

    // Tr((Cr Cg)^1/2) computed as Tr((Cg^1/2 Cr Cg^1/2)^1/2), which keeps every
    // decomposition symmetric.
    const double tol = 1e-9 * std::max(1.0, std::max(cr.trace(), cg.trace()));
    const Eigen::MatrixXd cg_half = psd_sqrt(cg, tol);
    const Eigen::MatrixXd inner = cg_half * cr * cg_half;
    const Eigen::MatrixXd inner_sqrt = psd_sqrt((inner + inner.transpose()) / 2.0, tol);

    return (mr - mg).squaredNorm() + cr.trace() + cg.trace() - 2.0 * inner_sqrt.trace();
}

double wasserstein_1d(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("wasserstein_1d: empty input");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const std::size_t n = a.size(), m = b.size();
    if (n == m) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += std::abs(a[i] - b[i]);
        return sum / static_cast<double>(n);
    }
    // Quantile-function integral over (0,1); both empirical quantile functions
    // are piecewise constant with breakpoints i/n and j/m.
    double total = 0.0, pos = 0.0;
    std::size_t i = 0, j = 0;
    while (i < n && j < m) {
        const double next_a = static_cast<double>(i + 1) / static_cast<double>(n);
        const double next_b = static_cast<double>(j + 1) / static_cast<double>(m);
        const double next = std::min(next_a, next_b);
        total += (next - pos) * std::abs(a[i] - b[j]);
        pos = next;
        if (next_a <= next) ++i;
        if (next_b <= next) ++j;
    }
    return total;
}

double aed(const Eigen::MatrixXd& x_set, const Eigen::MatrixXd& y_set) {
    if (x_set.rows() == 0 || y_set.rows() == 0) throw std::invalid_argument("aed: empty set");
    if (x_set.cols() != y_set.cols()) throw std::invalid_argument("aed: feature dimension mismatch");
    double sum = 0.0;
    for (Eigen::Index i = 0; i < x_set.rows(); ++i)
        for (Eigen::Index j = 0; j < y_set.rows(); ++j)
            sum += (x_set.row(i) - y_set.row(j)).norm();
    return sum / (static_cast<double>(x_set.rows()) * static_cast<double>(y_set.rows()));
}

double multidim_wd(const Eigen::MatrixXd& real, const Eigen::MatrixXd& fake, int projections,
                   std::uint64_t seed) {
    if (real.rows() == 0 || fake.rows() == 0) throw std::invalid_argument("multidim_wd: empty input");
    if (real.cols() != fake.cols()) throw std::invalid_argument("multidim_wd: feature dimension mismatch");
    auto rng = make_rng(derive_seed(seed, "metrics/sliced-wd"));
    std::normal_distribution<double> gauss(0.0, 1.0);
    const Eigen::Index d = real.cols();
    double sum = 0.0;
    for (int r = 0; r < projections; ++r) {
        Eigen::VectorXd dir(d);
        do {
            for (Eigen::Index j = 0; j < d; ++j) dir(j) = gauss(rng);
        } while (dir.norm() == 0.0);
        dir /= dir.norm();
        const Eigen::VectorXd pr = real * dir;
        const Eigen::VectorXd pf = fake * dir;
        sum += wasserstein_1d(std::vector<double>(pr.data(), pr.data() + pr.size()),
                              std::vector<double>(pf.data(), pf.data() + pf.size()));
    }
    return sum / static_cast<double>(projections);
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

double spearman_rank_correlation(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("spearman_rank_correlation: need two equal-length series");
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= n;
    my /= n;
    double cov = 0.0, vx = 0.0, vy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        cov += (rx[i] - mx) * (ry[i] - my);
        vx += (rx[i] - mx) * (rx[i] - mx);
        vy += (ry[i] - my) * (ry[i] - my);
    }
    if (vx == 0.0 || vy == 0.0) return 0.0;
    return cov / std::sqrt(vx * vy);
}

}  // namespace depois
