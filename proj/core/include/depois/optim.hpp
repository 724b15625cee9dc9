/// Minimal first-order optimizers for the GAN training loops.
#pragma once

#include "depois/nn.hpp"

namespace depois {

struct Sgd {
    double lr = 0.01;

    void step(Mlp& net, const Mlp::Grads& grads) {
        auto& layers = net.layers();
        for (std::size_t l = 0; l < layers.size(); ++l) {
            layers[l].w -= lr * grads.w[l];
            layers[l].b -= lr * grads.b[l];
        }
    }
};

/// RMSprop-style adaptive step (Tieleman/Hinton moving-average variant).
class RmsProp {
  public:
    explicit RmsProp(double lr = 5e-5, double decay = 0.9, double eps = 1e-8)
        : lr_(lr), decay_(decay), eps_(eps) {}

    void step(Mlp& net, const Mlp::Grads& grads) {
        auto& layers = net.layers();
        if (vw_.empty()) {
            for (const auto& layer : layers) {
                vw_.push_back(Eigen::MatrixXd::Zero(layer.w.rows(), layer.w.cols()));
                vb_.push_back(Eigen::VectorXd::Zero(layer.b.size()));
            }
        }
        for (std::size_t l = 0; l < layers.size(); ++l) {
            vw_[l] = decay_ * vw_[l] + (1.0 - decay_) * grads.w[l].cwiseProduct(grads.w[l]);
            vb_[l] = decay_ * vb_[l] + (1.0 - decay_) * grads.b[l].cwiseProduct(grads.b[l]);
            layers[l].w -= lr_ * grads.w[l].cwiseQuotient((vw_[l].cwiseSqrt().array() + eps_).matrix());
            layers[l].b -= lr_ * grads.b[l].cwiseQuotient((vb_[l].cwiseSqrt().array() + eps_).matrix());
        }
    }

  private:
    double lr_, decay_, eps_;
    std::vector<Eigen::MatrixXd> vw_;
    std::vector<Eigen::VectorXd> vb_;
};

}  // namespace depois
