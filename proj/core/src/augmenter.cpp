#include "depois/augmenter.hpp"

#include <algorithm>
#include <cmath>

#include "depois/optim.hpp"
#include "depois/rng.hpp"

namespace depois {

namespace {

constexpr double kProbEps = 1e-12;

double clamped_log(double p) { return std::log(std::max(p, kProbEps)); }

}  // namespace

double authenticator_loss_classification(const Eigen::MatrixXd& pred_probs, const Eigen::VectorXi& labels) {
    if (pred_probs.rows() != labels.size())
        throw std::invalid_argument("authenticator_loss_classification: batch size mismatch");
    if (pred_probs.rows() == 0) throw std::invalid_argument("authenticator_loss_classification: empty batch");
    double loss = 0.0;
    for (Eigen::Index i = 0; i < pred_probs.rows(); ++i) {
        if (labels(i) < 0 || labels(i) >= pred_probs.cols())
            throw std::invalid_argument("authenticator_loss_classification: label out of range");
        loss -= clamped_log(pred_probs(i, labels(i)));
    }
    return loss / static_cast<double>(pred_probs.rows());
}

double authenticator_loss_regression(const Eigen::VectorXd& preds, const Eigen::VectorXd& targets) {
    if (preds.size() != targets.size())
        throw std::invalid_argument("authenticator_loss_regression: length mismatch");
    if (preds.size() == 0) throw std::invalid_argument("authenticator_loss_regression: empty batch");
    return (preds - targets).squaredNorm() / static_cast<double>(preds.size());
}

std::pair<double, double> cgan_losses(const Eigen::VectorXd& d_real, const Eigen::VectorXd& d_fake,
                                      double auth_loss) {
    double real_term = 0.0;
    for (Eigen::Index i = 0; i < d_real.size(); ++i) real_term -= clamped_log(d_real(i));
    real_term /= static_cast<double>(d_real.size());

    double fake_term = 0.0;
    double gen_term = 0.0;
    for (Eigen::Index i = 0; i < d_fake.size(); ++i) {
        fake_term -= clamped_log(1.0 - d_fake(i));
        gen_term -= clamped_log(d_fake(i));
    }
    fake_term /= static_cast<double>(d_fake.size());
    gen_term /= static_cast<double>(d_fake.size());

    return {real_term + fake_term + auth_loss, gen_term - auth_loss};
}

namespace {

struct TrainerState {
    Mlp gen, dis, auth;
    ConditioningSpec cond;
    NoiseSpec noise;
};

std::vector<double> flatten_all(const TrainerState& s, bool with_auth) {
    std::vector<double> all, tmp;
    s.gen.flatten_into(tmp);
    all.insert(all.end(), tmp.begin(), tmp.end());
    s.dis.flatten_into(tmp);
    all.insert(all.end(), tmp.begin(), tmp.end());
    if (with_auth) {
        s.auth.flatten_into(tmp);
        all.insert(all.end(), tmp.begin(), tmp.end());
    }
    return all;
}

Eigen::VectorXd sample_rows(const Eigen::VectorXd& v, const std::vector<Eigen::Index>& idx) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<Eigen::Index>(i)) = v(idx[i]);
    return out;
}

Eigen::MatrixXd sample_rows(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& idx) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), m.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(idx[i]);
    return out;
}

std::vector<Eigen::Index> draw_indices(Eigen::Index n, Eigen::Index count, std::mt19937_64& rng) {
    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(count));
    for (auto& v : idx) v = pick(rng);
    return idx;
}

Eigen::MatrixXd hcat(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::MatrixXd out(a.rows(), a.cols() + b.cols());
    out << a, b;
    return out;
}

}  // namespace

AugmenterModel train_augmenter(const LabeledDataset& trusted, const AugmentTrainConfig& config) {
    if (trusted.size() == 0) throw std::invalid_argument("train_augmenter: empty trusted set");
    trusted.validate(true);

    const Eigen::Index d = trusted.n_features();
    ConditioningSpec cond;
    cond.mode = trusted.task;
    cond.n_classes = trusted.n_classes;
    cond.regression_noise_std = config.regression_noise_std;

    GeneratorArch gen_arch;
    gen_arch.noise = config.noise;
    gen_arch.cond_dim = cond.dim();
    gen_arch.out_dim = d;
    gen_arch.hidden = config.hidden;

    DiscriminatorArch dis_arch;
    dis_arch.sample_dim = d;
    dis_arch.cond_dim = cond.dim();
    dis_arch.hidden = config.hidden;
    dis_arch.head = DiscriminatorHead::Sigmoid;
    dis_arch.dropout_rate = config.dropout_rate;

    AuthenticatorArch auth_arch;
    auth_arch.task = trusted.task;
    auth_arch.in_dim = d;
    auth_arch.n_classes = trusted.n_classes;
    auth_arch.hidden = config.auth_hidden;
    auth_arch.l1_penalty = config.auth_l1;

    TrainerState s;
    s.gen = Mlp::init(gen_arch.mlp(), derive_seed(config.seed, "augment/gen"));
    s.dis = Mlp::init(dis_arch.mlp(), derive_seed(config.seed, "augment/dis"));
    s.auth = Mlp::init(auth_arch.mlp(), derive_seed(config.seed, "augment/auth"));
    s.cond = cond;
    s.noise = config.noise;

    AugmenterModel model;
    model.conditioning = cond;
    model.noise = config.noise;
    model.has_authenticator = config.use_authenticator;
    model.task = trusted.task;
    model.n_classes = trusted.n_classes;
    model.columns = trusted.columns;
    model.target_name = trusted.target_name;

    auto rng = make_rng(derive_seed(config.seed, "augment/train"));
    Sgd opt{config.step_size};
    const Eigen::Index batch = std::min<Eigen::Index>(config.batch_size, trusted.size());
    const Eigen::Index ms = config.mc_samples;
    const ConditionSampler cond_sampler = ConditionSampler::empirical(trusted);

    std::vector<double> prev = flatten_all(s, config.use_authenticator);

    for (int iter = 1; iter <= config.max_iters; ++iter) {
        // E-step: Monte-Carlo draws z_s = (x_s, y_s) from the current generator.
        Eigen::VectorXd y_s(ms);
        for (Eigen::Index i = 0; i < ms; ++i) y_s(i) = cond_sampler.sample(rng);
        const Eigen::MatrixXd cond_s = build_conditioning(cond, y_s, &rng);
        const Eigen::MatrixXd z = sample_noise(config.noise, ms, rng);
        Mlp::Cache gen_cache;
        const Eigen::MatrixXd x_s = s.gen.forward(hcat(z, cond_s), gen_cache, true, &rng);

        // Authenticator round on a trusted minibatch, then L_A on the draws.
        const auto t_idx = draw_indices(trusted.size(), batch, rng);
        const Eigen::MatrixXd xb = sample_rows(trusted.features, t_idx);
        const Eigen::VectorXd yb = sample_rows(trusted.targets, t_idx);

        double auth_loss = 0.0;
        if (config.use_authenticator) {
            Mlp::Cache ac;
            const Eigen::MatrixXd pred = s.auth.forward(xb, ac, true, &rng);
            auto agrads = s.auth.make_grads();
            Eigen::MatrixXd dOut;
            if (trusted.task == Task::Classification) {
                dOut = Eigen::MatrixXd::Zero(batch, trusted.n_classes);
                for (Eigen::Index i = 0; i < batch; ++i) {
                    const int c = static_cast<int>(yb(i));
                    dOut(i, c) = -1.0 / (std::max(pred(i, c), kProbEps) * static_cast<double>(batch));
                }
            } else {
                dOut = 2.0 * (pred - yb) / static_cast<double>(batch);
            }
            s.auth.backward(ac, dOut, &agrads);
            if (trusted.task == Task::Regression && config.auth_l1 > 0.0) {
                // LASSO subgradient on the linear weights.
                auto& layer = s.auth.layers()[0];
                agrads.w[0] += config.auth_l1 * layer.w.unaryExpr([](double v) {
                    return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0);
                });
            }
            opt.step(s.auth, agrads);

            const Eigen::MatrixXd pred_s = s.auth.forward(x_s);
            if (trusted.task == Task::Classification) {
                Eigen::VectorXi ls(ms);
                for (Eigen::Index i = 0; i < ms; ++i) ls(i) = static_cast<int>(y_s(i));
                auth_loss = authenticator_loss_classification(pred_s, ls);
            } else {
                auth_loss = authenticator_loss_regression(pred_s, y_s);
            }
        }

        // M-step, discriminator: minimize BCE(real,1) + BCE(fake,0) (+ L_A,
        // constant in D's parameters).
        const Eigen::MatrixXd cond_b = build_conditioning(cond, yb, &rng);
        Mlp::Cache dr_cache, df_cache;
        const Eigen::MatrixXd d_real = s.dis.forward(hcat(xb, cond_b), dr_cache, true, &rng);
        const Eigen::MatrixXd d_fake = s.dis.forward(hcat(x_s, cond_s), df_cache, true, &rng);
        {
            auto dgrads = s.dis.make_grads();
            Eigen::MatrixXd dReal(batch, 1), dFake(ms, 1);
            for (Eigen::Index i = 0; i < batch; ++i)
                dReal(i, 0) = -1.0 / (std::max(d_real(i, 0), kProbEps) * static_cast<double>(batch));
            for (Eigen::Index i = 0; i < ms; ++i)
                dFake(i, 0) = 1.0 / (std::max(1.0 - d_fake(i, 0), kProbEps) * static_cast<double>(ms));
            s.dis.backward(dr_cache, dReal, &dgrads);
            s.dis.backward(df_cache, dFake, &dgrads);
            opt.step(s.dis, dgrads);
        }

        // M-step, generator: minimize -mean log D(fake) - L_A.
        Mlp::Cache df2_cache;
        const Eigen::MatrixXd d_fake2 = s.dis.forward(hcat(x_s, cond_s), df2_cache, true, &rng);
        {
            Eigen::MatrixXd dFake(ms, 1);
            for (Eigen::Index i = 0; i < ms; ++i)
                dFake(i, 0) = -1.0 / (std::max(d_fake2(i, 0), kProbEps) * static_cast<double>(ms));
            Eigen::MatrixXd dInput = s.dis.backward(df2_cache, dFake, nullptr);
            Eigen::MatrixXd dX = dInput.leftCols(d);

            if (config.use_authenticator) {
                Mlp::Cache ac;
                const Eigen::MatrixXd pred_s = s.auth.forward(x_s, ac, false, nullptr);
                Eigen::MatrixXd dOut;
                if (trusted.task == Task::Classification) {
                    dOut = Eigen::MatrixXd::Zero(ms, trusted.n_classes);
                    for (Eigen::Index i = 0; i < ms; ++i) {
                        const int c = static_cast<int>(y_s(i));
                        dOut(i, c) = -1.0 / (std::max(pred_s(i, c), kProbEps) * static_cast<double>(ms));
                    }
                } else {
                    dOut = 2.0 * (pred_s - y_s) / static_cast<double>(ms);
                }
                // Label-consistency steering: the generator descends the
                // authenticator loss on its own samples.
                dX += s.auth.backward(ac, dOut, nullptr);
            }

            auto ggrads = s.gen.make_grads();
            s.gen.backward(gen_cache, dX, &ggrads);
            opt.step(s.gen, ggrads);
        }

        const auto [d_obj, g_obj] = cgan_losses(d_real.col(0), d_fake.col(0), auth_loss);
        if (!std::isfinite(d_obj) || !std::isfinite(g_obj))
            throw std::runtime_error("train_augmenter: diverged (non-finite loss) at iteration " +
                                     std::to_string(iter));

        std::vector<double> cur = flatten_all(s, config.use_authenticator);
        double delta_sq = 0.0;
        for (std::size_t i = 0; i < cur.size(); ++i) {
            const double diff = cur[i] - prev[i];
            delta_sq += diff * diff;
        }
        prev = std::move(cur);
        const double delta = std::sqrt(delta_sq);

        model.training_log.push_back({iter, d_obj, g_obj, auth_loss, delta});
        if (delta < config.param_delta_tol) break;
    }

    model.generator = s.gen.to_params(config.seed);
    model.discriminator = s.dis.to_params(config.seed);
    model.authenticator = s.auth.to_params(config.seed);
    return model;
}

ConditionSampler ConditionSampler::fixed_class(int c) {
    ConditionSampler s;
    s.fn_ = [c](std::mt19937_64&) { return static_cast<double>(c); };
    return s;
}

ConditionSampler ConditionSampler::uniform_classes(int n_classes) {
    ConditionSampler s;
    s.fn_ = [n_classes](std::mt19937_64& rng) {
        std::uniform_int_distribution<int> pick(0, n_classes - 1);
        return static_cast<double>(pick(rng));
    };
    return s;
}

ConditionSampler ConditionSampler::empirical(const LabeledDataset& ds) {
    ConditionSampler s;
    auto targets = std::make_shared<Eigen::VectorXd>(ds.targets);
    s.fn_ = [targets](std::mt19937_64& rng) {
        std::uniform_int_distribution<Eigen::Index> pick(0, targets->size() - 1);
        return (*targets)(pick(rng));
    };
    return s;
}

LabeledDataset generate_synthetic(const AugmenterModel& model, Eigen::Index n,
                                  const ConditionSampler& conditions, std::uint64_t seed) {
    LabeledDataset out;
    out.task = model.task;
    out.n_classes = model.n_classes;
    out.columns = model.columns;
    out.target_name = model.target_name;
    out.features.resize(n, Eigen::Index(model.generator.arch.output_dim()));
    out.targets.resize(n);
    out.row_tags.assign(static_cast<std::size_t>(n), kTagNone);
    if (n == 0) return out;

    auto rng = make_rng(derive_seed(seed, "augment/generate"));
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) y(i) = conditions.sample(rng);
    const Eigen::MatrixXd cond = build_conditioning(model.conditioning, y, &rng);
    const Eigen::MatrixXd z = sample_noise(model.noise, n, rng);

    Eigen::MatrixXd input(n, z.cols() + cond.cols());
    input << z, cond;
    out.features = forward(model.generator, input);
    out.targets = y;  // pre-noise conditions
    return out;
}

LabeledDataset assemble_augmented(const LabeledDataset& trusted, const LabeledDataset& synthetic,
                                  Eigen::Index target_size, std::uint64_t seed,
                                  const SyntheticGenerator& top_up) {
    if (trusted.size() > target_size)
        throw std::invalid_argument("assemble_augmented: |trusted| exceeds target size");
    const Eigen::Index need = target_size - trusted.size();

    LabeledDataset pool = synthetic;
    while (pool.size() < need) {
        if (!top_up)
            throw std::runtime_error("assemble_augmented: synthetic pool short and no generation hook");
        pool = pool.append_rows(top_up(need - pool.size()));
    }

    std::vector<Eigen::Index> idx(static_cast<std::size_t>(pool.size()));
    std::iota(idx.begin(), idx.end(), 0);
    auto rng = make_rng(derive_seed(seed, "augment/assemble"));
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(static_cast<std::size_t>(need));

    return trusted.append_rows(pool.select_rows(idx));
}

}  // namespace depois
