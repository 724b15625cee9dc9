#include "depois/mimic.hpp"

#include <cmath>

#include "depois/optim.hpp"
#include "depois/rng.hpp"

namespace depois {

namespace {

constexpr double kProbEps = 1e-12;
constexpr double kNormEps = 1e-12;

Eigen::MatrixXd hcat(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::MatrixXd out(a.rows(), a.cols() + b.cols());
    out << a, b;
    return out;
}

std::vector<Eigen::Index> draw_indices(Eigen::Index n, Eigen::Index count, std::mt19937_64& rng) {
    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(count));
    for (auto& v : idx) v = pick(rng);
    return idx;
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& idx) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), m.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(idx[i]);
    return out;
}

Eigen::VectorXd take_rows(const Eigen::VectorXd& v, const std::vector<Eigen::Index>& idx) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<Eigen::Index>(i)) = v(idx[i]);
    return out;
}

// Shared by the public value-only entry point and the training path, which
// also needs the parameter gradient of the penalty.
double gradient_penalty_impl(const Mlp& critic, const Eigen::MatrixXd& x_hat, const Eigen::MatrixXd& cond,
                             double lambda, Mlp::Grads* grads) {
    if (x_hat.rows() != cond.rows()) throw std::invalid_argument("gradient_penalty: batch size mismatch");
    const Eigen::Index batch = x_hat.rows();
    const Eigen::Index d = x_hat.cols();

    Mlp::Cache cache;
    critic.forward(hcat(x_hat, cond), cache, false, nullptr);
    const Mlp::InputGrad ig = critic.input_gradient(cache);
    if (!ig.d_input.allFinite()) throw std::runtime_error("gradient_penalty: non-finite input gradient");

    double penalty = 0.0;
    Eigen::MatrixXd u = Eigen::MatrixXd::Zero(batch, ig.d_input.cols());
    for (Eigen::Index i = 0; i < batch; ++i) {
        const double norm = ig.d_input.row(i).head(d).norm();
        const double dev = norm - 1.0;
        penalty += dev * dev;
        if (grads) {
            const double coef = lambda * 2.0 * dev / (static_cast<double>(batch) * std::max(norm, kNormEps));
            u.row(i).head(d) = coef * ig.d_input.row(i).head(d);
        }
    }
    penalty = lambda * penalty / static_cast<double>(batch);
    if (grads) critic.tangent_param_grads(cache, ig, u, *grads);
    return penalty;
}

}  // namespace

Eigen::MatrixXd interpolate_batch(const Eigen::MatrixXd& real, const Eigen::MatrixXd& fake,
                                  std::uint64_t seed) {
    if (real.rows() != fake.rows() || real.cols() != fake.cols())
        throw std::invalid_argument("interpolate_batch: shape mismatch");
    auto rng = make_rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Eigen::MatrixXd out(real.rows(), real.cols());
    for (Eigen::Index i = 0; i < real.rows(); ++i) {
        const double eps = unif(rng);
        // eps*real + (1-eps)*fake, written so real == fake is an exact fixed point.
        out.row(i) = fake.row(i) + eps * (real.row(i) - fake.row(i));
    }
    return out;
}

double gradient_penalty(const Mlp& critic, const Eigen::MatrixXd& x_hat, const Eigen::MatrixXd& cond,
                        double lambda) {
    return gradient_penalty_impl(critic, x_hat, cond, lambda, nullptr);
}

std::pair<double, double> cwgan_gp_losses(const Eigen::VectorXd& real_scores,
                                          const Eigen::VectorXd& fake_scores, double penalty) {
    if (!real_scores.allFinite() || !fake_scores.allFinite() || !std::isfinite(penalty))
        throw std::invalid_argument("cwgan_gp_losses: non-finite inputs");
    const double critic_obj = fake_scores.mean() - real_scores.mean() + penalty;
    const double gen_obj = -fake_scores.mean();
    return {critic_obj, gen_obj};
}

MimicModel train_mimic(const LabeledDataset& s_aug, const MimicTrainConfig& config) {
    if (s_aug.size() == 0) throw std::invalid_argument("train_mimic: empty dataset");
    s_aug.validate(true);

    const Eigen::Index d = s_aug.n_features();
    ConditioningSpec cond;
    cond.mode = s_aug.task;
    cond.n_classes = s_aug.n_classes;
    cond.regression_noise_std = config.regression_noise_std;

    GeneratorArch gen_arch;
    gen_arch.noise = config.noise;
    gen_arch.cond_dim = cond.dim();
    gen_arch.out_dim = d;
    gen_arch.hidden = config.gen_hidden;

    DiscriminatorArch critic_arch;
    critic_arch.sample_dim = d;
    critic_arch.cond_dim = cond.dim();
    critic_arch.hidden = config.hidden;
    critic_arch.head = config.kind == MimicKind::ConditionalWganGp ? DiscriminatorHead::Linear
                                                                   : DiscriminatorHead::Sigmoid;
    critic_arch.dropout_rate = config.dropout_rate;

    Mlp gen = Mlp::init(gen_arch.mlp(), derive_seed(config.seed, "mimic/gen"));
    Mlp critic = Mlp::init(critic_arch.mlp(), derive_seed(config.seed, "mimic/critic"));

    MimicModel model;
    model.conditioning = cond;
    model.noise = config.noise;
    model.kind = config.kind;

    auto rng = make_rng(derive_seed(config.seed, "mimic/train"));
    RmsProp critic_opt(config.learning_rate);
    RmsProp gen_opt(config.learning_rate);

    const Eigen::Index batch = std::min<Eigen::Index>(config.batch_size, s_aug.size());
    const Eigen::Index steps_per_epoch = std::max<Eigen::Index>(1, s_aug.size() / batch);
    const int n_critic = config.kind == MimicKind::ConditionalWganGp ? config.critic_iters : 1;
    std::uniform_int_distribution<std::uint64_t> seed_draw;

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        for (Eigen::Index step = 0; step < steps_per_epoch; ++step) {
            double last_w = 0.0, last_cobj = 0.0;
            for (int t = 0; t < n_critic; ++t) {
                const auto idx = draw_indices(s_aug.size(), batch, rng);
                const Eigen::MatrixXd xr = take_rows(s_aug.features, idx);
                const Eigen::VectorXd yr = take_rows(s_aug.targets, idx);
                const Eigen::MatrixXd cb = build_conditioning(cond, yr, &rng);

                // Fakes are generated under their own empirical conditions, and
                // the critic's fake term conditions on an independent empirical
                // draw. The critic therefore contrasts the joint (x, y)
                // distribution with a product of marginals, which keeps
                // mismatched pairs scoring low even once the generator has
                // converged.
                const Eigen::VectorXd y_gen =
                    take_rows(s_aug.targets, draw_indices(s_aug.size(), batch, rng));
                const Eigen::MatrixXd cg = build_conditioning(cond, y_gen, &rng);
                const Eigen::VectorXd y_crit =
                    take_rows(s_aug.targets, draw_indices(s_aug.size(), batch, rng));
                const Eigen::MatrixXd cc = build_conditioning(cond, y_crit, &rng);
                const Eigen::MatrixXd z = sample_noise(config.noise, batch, rng);
                const Eigen::MatrixXd xf = gen.forward(hcat(z, cg));

                auto grads = critic.make_grads();
                double penalty = 0.0;
                Mlp::Cache rc, fc;
                Eigen::MatrixXd sr, sf;
                if (config.kind == MimicKind::ConditionalWganGp) {
                    sr = critic.forward(hcat(xr, cb), rc, false, nullptr);
                    sf = critic.forward(hcat(xf, cc), fc, false, nullptr);
                    const Eigen::MatrixXd xh = interpolate_batch(xr, xf, seed_draw(rng));
                    penalty = gradient_penalty_impl(critic, xh, cb, config.gp_weight, &grads);
                    const double inv = 1.0 / static_cast<double>(batch);
                    critic.backward(fc, Eigen::MatrixXd::Constant(batch, 1, inv), &grads);
                    critic.backward(rc, Eigen::MatrixXd::Constant(batch, 1, -inv), &grads);
                    const auto [cobj, gobj] = cwgan_gp_losses(sr.col(0), sf.col(0), penalty);
                    (void)gobj;
                    last_cobj = cobj;
                } else {
                    sr = critic.forward(hcat(xr, cb), rc, true, &rng);
                    sf = critic.forward(hcat(xf, cc), fc, true, &rng);
                    Eigen::MatrixXd dr(batch, 1), df(batch, 1);
                    for (Eigen::Index i = 0; i < batch; ++i) {
                        dr(i, 0) = -1.0 / (std::max(sr(i, 0), kProbEps) * static_cast<double>(batch));
                        df(i, 0) = 1.0 / (std::max(1.0 - sf(i, 0), kProbEps) * static_cast<double>(batch));
                    }
                    critic.backward(rc, dr, &grads);
                    critic.backward(fc, df, &grads);
                    double bce = 0.0;
                    for (Eigen::Index i = 0; i < batch; ++i)
                        bce -= std::log(std::max(sr(i, 0), kProbEps)) +
                               std::log(std::max(1.0 - sf(i, 0), kProbEps));
                    last_cobj = bce / static_cast<double>(batch);
                }
                if (!grads.all_finite() || !std::isfinite(last_cobj))
                    throw std::runtime_error("train_mimic: diverged (non-finite critic update) at epoch " +
                                             std::to_string(epoch));
                critic_opt.step(critic, grads);
                last_w = sr.col(0).mean() - sf.col(0).mean();
            }

            // Generator step on a fresh batch of conditions.
            const auto idx = draw_indices(s_aug.size(), batch, rng);
            const Eigen::VectorXd yg = take_rows(s_aug.targets, idx);
            const Eigen::MatrixXd cg = build_conditioning(cond, yg, &rng);
            const Eigen::MatrixXd z = sample_noise(config.noise, batch, rng);
            Mlp::Cache gc;
            const Eigen::MatrixXd xf = gen.forward(hcat(z, cg), gc, true, &rng);

            Mlp::Cache fc;
            const Eigen::MatrixXd sf = critic.forward(hcat(xf, cg), fc,
                                                      config.kind == MimicKind::PlainCgan, &rng);
            Eigen::MatrixXd dOut(batch, 1);
            double gen_obj = 0.0;
            if (config.kind == MimicKind::ConditionalWganGp) {
                dOut.setConstant(-1.0 / static_cast<double>(batch));
                gen_obj = -sf.col(0).mean();
            } else {
                for (Eigen::Index i = 0; i < batch; ++i) {
                    dOut(i, 0) = -1.0 / (std::max(sf(i, 0), kProbEps) * static_cast<double>(batch));
                    gen_obj -= std::log(std::max(sf(i, 0), kProbEps));
                }
                gen_obj /= static_cast<double>(batch);
            }
            const Eigen::MatrixXd dInput = critic.backward(fc, dOut, nullptr);
            auto ggrads = gen.make_grads();
            gen.backward(gc, dInput.leftCols(d), &ggrads);
            if (!ggrads.all_finite())
                throw std::runtime_error("train_mimic: diverged (non-finite generator update) at epoch " +
                                         std::to_string(epoch));
            gen_opt.step(gen, ggrads);

            model.training_log.push_back(
                {epoch, static_cast<int>(step), last_w, last_cobj, gen_obj});
        }
    }

    model.critic = critic.to_params(config.seed);
    model.generator = gen.to_params(config.seed);
    return model;
}

double mimic_predict(const MimicModel& model, const Eigen::VectorXd& x, double y) {
    Eigen::MatrixXd xm = x.transpose();
    Eigen::VectorXd yv(1);
    yv(0) = y;
    return mimic_predict_batch(model, xm, yv)(0);
}

Eigen::VectorXd mimic_predict_batch(const MimicModel& model, const Eigen::MatrixXd& x,
                                    const Eigen::VectorXd& y) {
    if (x.rows() != y.size()) throw std::invalid_argument("mimic_predict_batch: batch size mismatch");
    const Eigen::MatrixXd cond = build_conditioning(model.conditioning, y, nullptr);
    Eigen::MatrixXd input(x.rows(), x.cols() + cond.cols());
    input << x, cond;
    return forward(model.critic, input).col(0);
}

}  // namespace depois
