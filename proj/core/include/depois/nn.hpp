/**
 * @file nn.hpp
 * @brief Fully-connected network primitives shared by the augmentation and
 *        mimic modules: architectures, deterministic initialization,
 *        forward/backward passes and parameter-bundle serialization.
 *
 * Networks are small dense MLPs. The critic path additionally supports exact
 * per-sample input gradients and the parameter gradient of functions of those
 * input gradients (valid for piecewise-linear nets: leaky-relu hidden layers
 * and a linear head), which is what the Wasserstein gradient penalty needs.
 */
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <json.hpp>
#include <random>
#include <string>
#include <vector>

#include "depois/dataset.hpp"

namespace depois {

enum class Activation { Linear, LeakyRelu, Sigmoid, Softmax };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

struct MlpSpec {
    Eigen::Index input_dim = 0;
    std::vector<Eigen::Index> widths;  // output dim per layer
    std::vector<Activation> acts;      // one per layer
    double leak_slope = 0.2;
    double dropout_rate = 0.0;  // hidden layers, training passes only

    Eigen::Index output_dim() const { return widths.empty() ? input_dim : widths.back(); }
    nlohmann::json to_json() const;
    static MlpSpec from_json(const nlohmann::json& j);
};

/// Latent noise prior: `dim`-dimensional standard normal.
struct NoiseSpec {
    Eigen::Index dim = 100;
};

Eigen::MatrixXd sample_noise(const NoiseSpec& spec, Eigen::Index n, std::mt19937_64& rng);

/// How targets are turned into conditioning vectors: one-hot class ids for
/// classification; the regression value plus additive unimodal noise z_r
/// (training passes only) for regression.
struct ConditioningSpec {
    Task mode = Task::Classification;
    int n_classes = 0;
    double regression_noise_std = 0.05;

    Eigen::Index dim() const { return mode == Task::Classification ? n_classes : 1; }
    nlohmann::json to_json() const;
    static ConditioningSpec from_json(const nlohmann::json& j);
};

/// Conditioning matrix for a target vector. Pass a non-null rng to add the
/// regression noise z_r; inference passes leave it null.
Eigen::MatrixXd build_conditioning(const ConditioningSpec& spec, const Eigen::VectorXd& targets,
                                   std::mt19937_64* noise_rng = nullptr);

// --- Prescribed architectures ------------------------------------------------

/// Generator: concat(noise, conditioning) -> 3 leaky-relu layers -> sigmoid
/// output in (0,1)^out_dim.
struct GeneratorArch {
    NoiseSpec noise;
    Eigen::Index cond_dim = 0;
    Eigen::Index out_dim = 0;
    std::vector<Eigen::Index> hidden = {128, 256, 128};

    MlpSpec mlp() const;
};

enum class DiscriminatorHead { Sigmoid, Linear };

/// Discriminator/critic: concat(sample, conditioning) -> 3 leaky-relu layers
/// -> sigmoid unit (cGAN role, dropout 0.4) or linear unit (critic role).
struct DiscriminatorArch {
    Eigen::Index sample_dim = 0;
    Eigen::Index cond_dim = 0;
    std::vector<Eigen::Index> hidden = {128, 256, 128};
    DiscriminatorHead head = DiscriminatorHead::Sigmoid;
    double dropout_rate = 0.4;  // ignored for the critic role

    MlpSpec mlp() const;
};

/// Authenticator: a small fully-connected classifier (cross-entropy) for
/// classification, or a linear model with an L1 penalty (mean-squared-error)
/// for regression.
struct AuthenticatorArch {
    Task task = Task::Classification;
    Eigen::Index in_dim = 0;
    int n_classes = 0;
    std::vector<Eigen::Index> hidden = {64, 64};  // classifier only
    double l1_penalty = 1e-4;                     // regression only

    MlpSpec mlp() const;
};

// --- Parameter bundles -------------------------------------------------------

/// Opaque serializable parameter bundle. serialize -> deserialize round-trips
/// bit-exactly (raw little-endian doubles behind a JSON header).
struct ModelParams {
    MlpSpec arch;
    std::vector<double> values;
    std::uint64_t seed = 0;
    int version = 1;
};

ModelParams init_params(const MlpSpec& arch, std::uint64_t seed);

void save_model(const ModelParams& params, const std::string& path);
ModelParams load_model(const std::string& path);

// --- The network -------------------------------------------------------------

struct DenseLayer {
    Eigen::MatrixXd w;  // out x in
    Eigen::VectorXd b;
    Activation act = Activation::Linear;
};

class Mlp {
  public:
    Mlp() = default;

    /// Deterministic Glorot-uniform initialization.
    static Mlp init(const MlpSpec& spec, std::uint64_t seed);
    static Mlp from_params(const ModelParams& params);

    const MlpSpec& spec() const { return spec_; }
    Eigen::Index input_dim() const { return spec_.input_dim; }
    Eigen::Index output_dim() const { return spec_.output_dim(); }
    std::vector<DenseLayer>& layers() { return layers_; }
    const std::vector<DenseLayer>& layers() const { return layers_; }

    struct Cache {
        Eigen::MatrixXd input;
        std::vector<Eigen::MatrixXd> pre;      // pre-activation per layer
        std::vector<Eigen::MatrixXd> act_out;  // activation output per layer
        std::vector<Eigen::MatrixXd> out;      // after dropout (layer output)
        std::vector<Eigen::MatrixXd> mask;     // inverted-dropout masks (may be empty)
    };

    /// Inference pass: dropout disabled, no cache.
    Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;

    /// Training pass with cache; applies inverted dropout when the spec asks
    /// for it and `training` is set (rng required in that case).
    Eigen::MatrixXd forward(const Eigen::MatrixXd& x, Cache& cache, bool training,
                            std::mt19937_64* rng = nullptr) const;

    struct Grads {
        std::vector<Eigen::MatrixXd> w;
        std::vector<Eigen::VectorXd> b;
        void add_scaled(const Grads& other, double s);
        bool all_finite() const;
    };
    Grads make_grads() const;

    /// Backpropagates dOut (gradient at the post-activation output, B x out).
    /// Accumulates parameter gradients into `grads` when non-null; returns the
    /// gradient at the input.
    Eigen::MatrixXd backward(const Cache& cache, const Eigen::MatrixXd& dOut, Grads* grads) const;

    struct InputGrad {
        Eigen::MatrixXd d_input;               // row i = grad of output_i w.r.t. input row i
        std::vector<Eigen::MatrixXd> deltas;   // per-layer pre-activation deltas
    };

    /// Per-sample input gradients of a scalar-head network (dOut = ones).
    InputGrad input_gradient(const Cache& cache) const;

    /// Accumulates the parameter gradient of sum_i u_i . grad_x(out_i).
    /// Exact for piecewise-linear networks; asserts the spec qualifies
    /// (leaky-relu/linear activations, linear head, no dropout).
    void tangent_param_grads(const Cache& cache, const InputGrad& ig, const Eigen::MatrixXd& u,
                             Grads& grads) const;

    std::size_t param_count() const;
    void flatten_into(std::vector<double>& out) const;
    void unflatten_from(const double* data, std::size_t count);
    ModelParams to_params(std::uint64_t seed) const;

    /// FNV-1a over the raw parameter bytes; bit-exact reproducibility checks.
    std::uint64_t param_hash() const;

  private:
    MlpSpec spec_;
    std::vector<DenseLayer> layers_;
};

/// Spec-level forward: builds the network from a parameter bundle and runs an
/// inference pass.
Eigen::MatrixXd forward(const ModelParams& params, const Eigen::MatrixXd& inputs);

}  // namespace depois
