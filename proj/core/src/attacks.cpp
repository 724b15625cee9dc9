#include "depois/attacks.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "depois/linear_models.hpp"
#include "depois/rng.hpp"

namespace depois {

namespace {

Eigen::Index poison_row_count(const LabeledDataset& clean, const PoisonBudget& budget) {
    return static_cast<Eigen::Index>(std::llround(budget.rate * static_cast<double>(clean.size())));
}

AttackResult start_result(const LabeledDataset& clean, std::string name) {
    AttackResult res;
    res.dataset = clean;
    res.poison_mask.assign(static_cast<std::size_t>(clean.size()), 0);
    res.attack_name = std::move(name);
    return res;
}

void append_poison(AttackResult& res, const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    LabeledDataset block;
    block.features = x;
    block.targets = y;
    block.task = res.dataset.task;
    block.n_classes = res.dataset.n_classes;
    block.row_tags.assign(static_cast<std::size_t>(x.rows()), kTagPoisoned);
    block.columns = res.dataset.columns;
    res.dataset = res.dataset.append_rows(block);
    res.poison_mask.insert(res.poison_mask.end(), static_cast<std::size_t>(x.rows()), 1);
}

}  // namespace

Eigen::Index AttackResult::poison_count() const {
    return static_cast<Eigen::Index>(std::count(poison_mask.begin(), poison_mask.end(), 1));
}

ProbabilityScorer make_logistic_victim(const LabeledDataset& clean) {
    if (clean.task != Task::Classification)
        throw std::invalid_argument("make_logistic_victim: classification datasets only");
    auto model = std::make_shared<LogisticClassifier>(
        LogisticClassifier::fit(clean.features, clean.targets, clean.n_classes));
    return [model](const Eigen::MatrixXd& x) { return model->predict_proba(x); };
}

AttackResult label_flip_attack(const LabeledDataset& clean, const ProbabilityScorer& victim,
                               const PoisonBudget& budget) {
    if (clean.task != Task::Classification)
        throw std::invalid_argument("label_flip_attack: classification datasets only");
    if (clean.size() == 0) throw std::invalid_argument("label_flip_attack: empty dataset");

    const Eigen::Index k = poison_row_count(clean, budget);
    const Eigen::MatrixXd probs = victim(clean.features);
    if (probs.rows() != clean.size() || probs.cols() != clean.n_classes)
        throw std::invalid_argument("label_flip_attack: victim scorer shape mismatch");

    // Highest true-class confidence first; ties broken by row index.
    std::vector<Eigen::Index> order(static_cast<std::size_t>(clean.size()));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return probs(a, clean.label(a)) > probs(b, clean.label(b));
    });

    Eigen::MatrixXd px(k, clean.n_features());
    Eigen::VectorXd py(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        const Eigen::Index src = order[static_cast<std::size_t>(i)];
        px.row(i) = clean.features.row(src);
        const int true_class = clean.label(src);
        int flipped;
        if (clean.n_classes == 2) {
            flipped = 1 - true_class;
        } else {
            flipped = -1;
            double best = -1.0;
            for (int c = 0; c < clean.n_classes; ++c) {
                if (c == true_class) continue;
                if (probs(src, c) > best) {
                    best = probs(src, c);
                    flipped = c;
                }
            }
        }
        py(i) = flipped;
    }

    AttackResult res = start_result(clean, "label-flip");
    append_poison(res, px, py);
    res.realized_rate = static_cast<double>(k) / static_cast<double>(clean.size());
    return res;
}

AttackResult regression_attack_statistical(const LabeledDataset& clean, const PoisonBudget& budget) {
    if (clean.task != Task::Regression)
        throw std::invalid_argument("regression_attack_statistical: regression datasets only");
    if (clean.size() < 2) throw std::invalid_argument("regression_attack_statistical: dataset too small");

    const Eigen::Index k = poison_row_count(clean, budget);
    const Eigen::Index d = clean.n_features();

    const Eigen::VectorXd mean = clean.features.colwise().mean();
    Eigen::MatrixXd centered = clean.features.rowwise() - mean.transpose();
    Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(clean.size() - 1);

    // Cholesky factor of the covariance; diagonal fallback when not PD.
    Eigen::MatrixXd chol;
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() == Eigen::Success) {
        chol = llt.matrixL();
    } else {
        chol = Eigen::MatrixXd::Zero(d, d);
        for (Eigen::Index j = 0; j < d; ++j) chol(j, j) = std::sqrt(std::max(cov(j, j), 0.0));
    }

    auto rng = make_rng(budget.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd px(k, d);
    for (Eigen::Index i = 0; i < k; ++i) {
        Eigen::VectorXd z(d);
        for (Eigen::Index j = 0; j < d; ++j) z(j) = gauss(rng);
        px.row(i) = (mean + chol * z).cwiseMax(0.0).cwiseMin(1.0).transpose();
    }

    const LinearRegressor clean_model = LinearRegressor::fit(clean.features, clean.targets);
    const Eigen::VectorXd preds = clean_model.predict(px);
    Eigen::VectorXd py(k);
    for (Eigen::Index i = 0; i < k; ++i) py(i) = preds(i) <= 0.5 ? 1.0 : 0.0;

    AttackResult res = start_result(clean, "regression-stat");
    append_poison(res, px, py);
    res.realized_rate = static_cast<double>(k) / static_cast<double>(clean.size());
    return res;
}

AttackResult feature_collision_attack(const LabeledDataset& clean, const Eigen::VectorXd& target_sample,
                                      int target_class, int base_class, const FeatureExtractor& extractor,
                                      const PoisonBudget& budget, const CollisionOptions& opt) {
    if (clean.task != Task::Classification)
        throw std::invalid_argument("feature_collision_attack: classification datasets only");
    (void)target_class;

    const Eigen::Index k = poison_row_count(clean, budget);
    std::vector<Eigen::Index> base_pool;
    for (Eigen::Index i = 0; i < clean.size(); ++i)
        if (clean.label(i) == base_class) base_pool.push_back(i);
    if (static_cast<std::size_t>(k) > base_pool.size())
        throw std::invalid_argument("feature_collision_attack: budget exceeds base-class population");

    auto rng = make_rng(budget.seed);
    std::shuffle(base_pool.begin(), base_pool.end(), rng);

    const Eigen::VectorXd f_target = extractor.map(target_sample);
    Eigen::MatrixXd px(k, clean.n_features());
    for (Eigen::Index i = 0; i < k; ++i) {
        const Eigen::VectorXd base = clean.features.row(base_pool[static_cast<std::size_t>(i)]).transpose();
        Eigen::VectorXd p = base;
        for (int it = 0; it < opt.iters; ++it) {
            const Eigen::VectorXd residual = extractor.map(p) - f_target;
            Eigen::VectorXd grad = 2.0 * extractor.pullback(p, residual) + 2.0 * opt.beta * (p - base);
            p = (p - opt.step * grad).cwiseMax(0.0).cwiseMin(1.0);
        }
        px.row(i) = p.transpose();
    }

    AttackResult res = start_result(clean, "feature-collision");
    append_poison(res, px, Eigen::VectorXd::Constant(k, static_cast<double>(base_class)));
    res.realized_rate = static_cast<double>(k) / static_cast<double>(clean.size());
    return res;
}

namespace {

bool parse_cell(const std::string& s, double& out) {
    const char* last = s.data() + s.size();
    auto res = std::from_chars(s.data(), last, out);
    return res.ec == std::errc{} && res.ptr == last;
}

}  // namespace

AttackResult load_external_poison(const LabeledDataset& clean, const std::string& poison_file) {
    const CsvTable table = read_csv_table(poison_file);

    // Schema: clean feature columns, target, optional trailing `poisoned`.
    const std::size_t d = static_cast<std::size_t>(clean.n_features());
    const bool has_flag = table.header.size() == d + 2 && table.header.back() == "poisoned";
    if (!(table.header.size() == d + 1 || has_flag))
        throw std::runtime_error("load_external_poison: schema mismatch (column count)");
    for (std::size_t j = 0; j < d; ++j) {
        const std::string expected = j < clean.columns.size() ? clean.columns[j].name : "f" + std::to_string(j);
        if (table.header[j] != expected)
            throw std::runtime_error("load_external_poison: schema mismatch at column '" + table.header[j] + "'");
    }
    if (table.header[d] != clean.target_name)
        throw std::runtime_error("load_external_poison: schema mismatch (target column)");

    const Eigen::Index k = static_cast<Eigen::Index>(table.rows.size());
    Eigen::MatrixXd px(k, clean.n_features());
    Eigen::VectorXd py(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        const auto& row = table.rows[static_cast<std::size_t>(i)];
        for (std::size_t j = 0; j < d; ++j) {
            double v;
            if (!parse_cell(row[j], v))
                throw std::runtime_error("load_external_poison: non-numeric cell '" + row[j] + "'");
            px(i, static_cast<Eigen::Index>(j)) = v;
        }
        double t;
        if (!parse_cell(row[d], t))
            throw std::runtime_error("load_external_poison: non-numeric target '" + row[d] + "'");
        py(i) = t;
    }

    AttackResult res = start_result(clean, "external");
    if (k > 0) append_poison(res, px, py);
    res.realized_rate = static_cast<double>(k) / static_cast<double>(clean.size());
    return res;
}

}  // namespace depois
