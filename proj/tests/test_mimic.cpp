#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "depois/attacks.hpp"
#include "depois/augmenter.hpp"
#include "depois/mimic.hpp"
#include "depois/rng.hpp"
#include "depois/synthetic.hpp"
#include "support/oracles.hpp"

using namespace depois;

namespace {

LabeledDataset gaussian_mixture(Eigen::Index n, std::uint64_t seed) {
    auto rng = make_rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    LabeledDataset ds;
    ds.features.resize(n, 2);
    ds.targets.resize(n);
    ds.task = Task::Classification;
    ds.n_classes = 2;
    ds.row_tags.assign(static_cast<std::size_t>(n), kTagNone);
    for (Eigen::Index i = 0; i < n; ++i) {
        const bool zero = i < n / 2;
        const double cx = zero ? 0.3 : 0.7;
        ds.features(i, 0) = std::clamp(cx + 0.05 * gauss(rng), 0.0, 1.0);
        ds.features(i, 1) = std::clamp(cx + 0.05 * gauss(rng), 0.0, 1.0);
        ds.targets(i) = zero ? 0.0 : 1.0;
    }
    return ds;
}

// Critic whose scalar output is w.x + c.cond + b, built as a single layer.
Mlp linear_critic(const Eigen::VectorXd& w_features, const Eigen::VectorXd& w_cond, double bias) {
    MlpSpec spec;
    spec.input_dim = w_features.size() + w_cond.size();
    spec.widths = {1};
    spec.acts = {Activation::Linear};
    Mlp net = Mlp::init(spec, 0);
    Eigen::VectorXd full(spec.input_dim);
    full << w_features, w_cond;
    net.layers()[0].w = full.transpose();
    net.layers()[0].b(0) = bias;
    return net;
}

MimicTrainConfig fast_mimic(std::uint64_t seed) {
    MimicTrainConfig cfg;
    cfg.seed = seed;
    cfg.hidden = {16, 32, 16};
    cfg.epochs = 60;
    cfg.learning_rate = 1e-3;
    return cfg;
}

}  // namespace

TEST_CASE("interpolate_batch stays on the segment between real and fake") {
    auto rng = make_rng(3);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd real(16, 3), fake(16, 3);
    for (Eigen::Index i = 0; i < 16; ++i)
        for (Eigen::Index j = 0; j < 3; ++j) {
            real(i, j) = gauss(rng);
            fake(i, j) = gauss(rng);
        }

    SUBCASE("identical inputs are a fixed point") {
        const Eigen::MatrixXd out = interpolate_batch(real, real, 7);
        CHECK(out == real);
    }
    SUBCASE("every component lies inside the elementwise envelope") {
        const Eigen::MatrixXd out = interpolate_batch(real, fake, 11);
        for (Eigen::Index i = 0; i < 16; ++i)
            for (Eigen::Index j = 0; j < 3; ++j) {
                CHECK(out(i, j) >= std::min(real(i, j), fake(i, j)) - 1e-15);
                CHECK(out(i, j) <= std::max(real(i, j), fake(i, j)) + 1e-15);
            }
    }
    SUBCASE("mixing weights cover both endpoints across seeds") {
        Eigen::MatrixXd one(1, 1), zero(1, 1);
        one << 1.0;
        zero << 0.0;
        double lo = 1.0, hi = 0.0;
        for (std::uint64_t s = 0; s < 300; ++s) {
            const double eps = interpolate_batch(one, zero, s)(0, 0);
            lo = std::min(lo, eps);
            hi = std::max(hi, eps);
        }
        CHECK(lo < 0.02);
        CHECK(hi > 0.98);
    }
    SUBCASE("shape mismatch is rejected") {
        CHECK_THROWS(interpolate_batch(real, fake.topRows(4), 1));
    }
}

TEST_CASE("gradient_penalty closed forms and finite-difference oracle") {
    SUBCASE("unit-norm linear critic has zero penalty") {
        Eigen::VectorXd w(2), wc(1);
        w << 1.0, 0.0;
        wc << 5.0;  // conditioning weights must not enter the penalty
        const Mlp critic = linear_critic(w, wc, 0.3);
        const Eigen::MatrixXd xh = Eigen::MatrixXd::Random(8, 2);
        const Eigen::MatrixXd cond = Eigen::MatrixXd::Random(8, 1);
        CHECK(gradient_penalty(critic, xh, cond, 10.0) == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("norm-3 linear critic with lambda 10 costs 40") {
        Eigen::VectorXd w(3), wc(1);
        w << 3.0, 0.0, 0.0;
        wc << -2.0;
        const Mlp critic = linear_critic(w, wc, 0.0);
        const Eigen::MatrixXd xh = Eigen::MatrixXd::Random(5, 3);
        const Eigen::MatrixXd cond = Eigen::MatrixXd::Random(5, 1);
        CHECK(gradient_penalty(critic, xh, cond, 10.0) == doctest::Approx(40.0).epsilon(1e-9));
    }
    SUBCASE("small MLP critic matches central differences on the input gradient") {
        DiscriminatorArch arch;
        arch.sample_dim = 3;
        arch.cond_dim = 2;
        arch.hidden = {8, 8, 8};
        arch.head = DiscriminatorHead::Linear;
        const Mlp critic = Mlp::init(arch.mlp(), 21);
        const Eigen::MatrixXd xh = Eigen::MatrixXd::Random(6, 3);
        const Eigen::MatrixXd cond = Eigen::MatrixXd::Random(6, 2);
        const double lambda = 10.0;

        // Independent oracle: numerically differentiate the critic w.r.t. each
        // sample coordinate, then apply the penalty formula directly.
        const double h = 1e-6;
        double penalty = 0.0;
        for (Eigen::Index i = 0; i < xh.rows(); ++i) {
            Eigen::VectorXd g(xh.cols());
            for (Eigen::Index j = 0; j < xh.cols(); ++j) {
                Eigen::MatrixXd xp = xh, xm = xh;
                xp(i, j) += h;
                xm(i, j) -= h;
                Eigen::MatrixXd ip(1, 5), im(1, 5);
                ip << xp.row(i), cond.row(i);
                im << xm.row(i), cond.row(i);
                g(j) = (critic.forward(ip)(0, 0) - critic.forward(im)(0, 0)) / (2.0 * h);
            }
            penalty += (g.norm() - 1.0) * (g.norm() - 1.0);
        }
        penalty = lambda * penalty / static_cast<double>(xh.rows());
        const double analytic = gradient_penalty(critic, xh, cond, lambda);
        CHECK(std::abs(analytic - penalty) / std::max(std::abs(penalty), 1e-9) < 1e-3);
    }
    SUBCASE("penalty parameter gradients match finite differences") {
        DiscriminatorArch arch;
        arch.sample_dim = 2;
        arch.cond_dim = 1;
        arch.hidden = {6, 6, 6};
        arch.head = DiscriminatorHead::Linear;
        Mlp critic = Mlp::init(arch.mlp(), 22);
        const Eigen::MatrixXd xh = Eigen::MatrixXd::Random(5, 2);
        const Eigen::MatrixXd cond = Eigen::MatrixXd::Random(5, 1);
        const double lambda = 10.0;

        // Analytic parameter gradient of the penalty via the tangent pass.
        Mlp::Cache cache;
        Eigen::MatrixXd input(5, 3);
        input << xh, cond;
        critic.forward(input, cache, false, nullptr);
        const Mlp::InputGrad ig = critic.input_gradient(cache);
        auto grads = critic.make_grads();
        Eigen::MatrixXd u = Eigen::MatrixXd::Zero(5, 3);
        for (Eigen::Index i = 0; i < 5; ++i) {
            const double norm = ig.d_input.row(i).head(2).norm();
            u.row(i).head(2) =
                lambda * 2.0 * (norm - 1.0) / (5.0 * std::max(norm, 1e-12)) * ig.d_input.row(i).head(2);
        }
        critic.tangent_param_grads(cache, ig, u, grads);

        std::vector<double> flat_grads;
        {
            Mlp tmp = critic;
            for (std::size_t l = 0; l < grads.w.size(); ++l) {
                tmp.layers()[l].w = grads.w[l];
                tmp.layers()[l].b = grads.b[l];
            }
            tmp.flatten_into(flat_grads);
        }
        std::vector<double> flat;
        critic.flatten_into(flat);
        const std::vector<std::size_t> probes = {0, flat.size() / 4, flat.size() / 2,
                                                 (3 * flat.size()) / 4, flat.size() - 2};
        const auto fd = oracles::finite_diff_param_grads(
            critic, [&](const Mlp& m) { return gradient_penalty(m, xh, cond, lambda); }, probes, 1e-6);
        for (std::size_t k = 0; k < probes.size(); ++k) {
            const double denom = std::max({std::abs(fd[k]), std::abs(flat_grads[probes[k]]), 1e-6});
            CHECK(std::abs(fd[k] - flat_grads[probes[k]]) / denom < 1e-3);
        }
    }
}

TEST_CASE("cwgan_gp_losses") {
    Eigen::VectorXd a(3), b(3);
    a.setConstant(1.5);
    b.setConstant(1.5);
    SUBCASE("equal means cancel") {
        const auto [c, g] = cwgan_gp_losses(a, b, 0.0);
        CHECK(c == doctest::Approx(0.0));
        CHECK(g == doctest::Approx(-1.5));
    }
    SUBCASE("real mean 2, fake mean 0 gives critic objective -2") {
        Eigen::VectorXd real(4), fake(4);
        real.setConstant(2.0);
        fake.setConstant(0.0);
        const auto [c, g] = cwgan_gp_losses(real, fake, 0.0);
        CHECK(c == doctest::Approx(-2.0));
        CHECK(g == doctest::Approx(0.0));
    }
    SUBCASE("random batches match the termwise oracle") {
        auto rng = make_rng(17);
        std::normal_distribution<double> gauss(0.0, 1.0);
        Eigen::VectorXd real(11), fake(11);
        for (Eigen::Index i = 0; i < 11; ++i) {
            real(i) = gauss(rng);
            fake(i) = gauss(rng);
        }
        const double pen = 0.77;
        double sum_r = 0.0, sum_f = 0.0;
        for (Eigen::Index i = 0; i < 11; ++i) {
            sum_r += real(i);
            sum_f += fake(i);
        }
        const auto [c, g] = cwgan_gp_losses(real, fake, pen);
        CHECK(c == doctest::Approx(sum_f / 11.0 - sum_r / 11.0 + pen).epsilon(1e-10));
        CHECK(g == doctest::Approx(-sum_f / 11.0).epsilon(1e-10));
    }
}

TEST_CASE("train_mimic basics") {
    const LabeledDataset data = gaussian_mixture(500, 31);

    SUBCASE("epochs 0 returns the initialized model") {
        MimicTrainConfig cfg = fast_mimic(1);
        cfg.epochs = 0;
        const MimicModel a = train_mimic(data, cfg);
        const MimicModel b = train_mimic(data, cfg);
        CHECK(a.training_log.empty());
        CHECK(Mlp::from_params(a.critic).param_hash() == Mlp::from_params(b.critic).param_hash());
    }
    SUBCASE("same seed reproduces the final parameter hash") {
        MimicTrainConfig cfg = fast_mimic(2);
        cfg.epochs = 3;
        const MimicModel a = train_mimic(data, cfg);
        const MimicModel b = train_mimic(data, cfg);
        CHECK(Mlp::from_params(a.critic).param_hash() == Mlp::from_params(b.critic).param_hash());
        CHECK(Mlp::from_params(a.generator).param_hash() == Mlp::from_params(b.generator).param_hash());
    }
    SUBCASE("Wasserstein estimate shrinks as the generator catches up") {
        MimicTrainConfig cfg = fast_mimic(3);
        cfg.epochs = 60;
        const MimicModel m = train_mimic(data, cfg);
        const auto& log = m.training_log;
        REQUIRE(log.size() > 40);
        const std::size_t steps_per_epoch = 500 / 32;
        double first = 0.0, last = 0.0;
        for (std::size_t i = 0; i < steps_per_epoch; ++i) first += std::abs(log[i].wasserstein_estimate);
        for (std::size_t i = log.size() - steps_per_epoch; i < log.size(); ++i)
            last += std::abs(log[i].wasserstein_estimate);
        CHECK(last < 0.25 * first);
    }
    SUBCASE("critic objective decreases on average over the first 100 steps") {
        int improved = 0;
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            MimicTrainConfig cfg = fast_mimic(seed);
            cfg.epochs = 1;
            cfg.critic_iters = 7;  // 15 steps/epoch x 7 > 100 critic steps
            const MimicModel m = train_mimic(gaussian_mixture(480, seed + 50), cfg);
            std::vector<double> cobj;
            for (const auto& l : m.training_log) cobj.push_back(l.critic_objective);
            const std::size_t half = cobj.size() / 2;
            double a = 0.0, b = 0.0;
            for (std::size_t i = 0; i < half; ++i) a += cobj[i];
            for (std::size_t i = half; i < cobj.size(); ++i) b += cobj[i];
            if (b / static_cast<double>(cobj.size() - half) < a / static_cast<double>(half)) ++improved;
        }
        CHECK(improved >= 3);
    }
}

TEST_CASE("mimic_predict is deterministic and consumes conditioning") {
    const LabeledDataset data = gaussian_mixture(400, 77);
    MimicTrainConfig cfg = fast_mimic(5);
    cfg.epochs = 40;
    const MimicModel model = train_mimic(data, cfg);

    SUBCASE("two calls agree bitwise") {
        const Eigen::VectorXd x = data.features.row(3).transpose();
        CHECK(mimic_predict(model, x, data.targets(3)) == mimic_predict(model, x, data.targets(3)));
    }
    SUBCASE("batch and single-sample paths agree within 1e-9") {
        const Eigen::VectorXd batch = mimic_predict_batch(model, data.features, data.targets);
        for (Eigen::Index i = 0; i < 20; ++i) {
            const double single = mimic_predict(model, data.features.row(i).transpose(), data.targets(i));
            CHECK(std::abs(single - batch(i)) < 1e-9);
        }
    }
    SUBCASE("permuting the conditioning changes predictions") {
        const Eigen::VectorXd flipped = (1.0 - data.targets.array()).matrix();
        const Eigen::VectorXd straight = mimic_predict_batch(model, data.features, data.targets);
        const Eigen::VectorXd crossed = mimic_predict_batch(model, data.features, flipped);
        Eigen::Index moved = 0;
        for (Eigen::Index i = 0; i < straight.size(); ++i)
            if (std::abs(straight(i) - crossed(i)) > 1e-6) ++moved;
        CHECK(static_cast<double>(moved) >= 0.9 * static_cast<double>(straight.size()));
    }
}

TEST_CASE("trained critic ranks clean pairs above label-flipped pairs") {
    const LabeledDataset clean = make_synthetic_2d(400, Layout2d::RingVsCore, 0.05, 91);
    const AttackResult res = label_flip_attack(clean, make_logistic_victim(clean), PoisonBudget(0.2, 92));

    // Train the mimic on clean data (stand-in for S_aug) and compare scores.
    MimicTrainConfig cfg = fast_mimic(6);
    cfg.epochs = 80;
    const MimicModel model = train_mimic(clean, cfg);

    const Eigen::Index n_clean = clean.size();
    const Eigen::Index n_poison = res.dataset.size() - n_clean;
    const Eigen::VectorXd clean_scores = mimic_predict_batch(model, clean.features, clean.targets);
    const Eigen::VectorXd poison_scores =
        mimic_predict_batch(model, res.dataset.features.bottomRows(n_poison),
                            res.dataset.targets.tail(n_poison));
    CHECK(clean_scores.mean() > poison_scores.mean());
}
