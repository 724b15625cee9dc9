#include "depois/nn.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "depois/rng.hpp"

namespace depois {

std::string to_string(Activation a) {
    switch (a) {
        case Activation::Linear: return "linear";
        case Activation::LeakyRelu: return "leaky_relu";
        case Activation::Sigmoid: return "sigmoid";
        case Activation::Softmax: return "softmax";
    }
    return "linear";
}

Activation activation_from_string(const std::string& s) {
    if (s == "linear") return Activation::Linear;
    if (s == "leaky_relu") return Activation::LeakyRelu;
    if (s == "sigmoid") return Activation::Sigmoid;
    if (s == "softmax") return Activation::Softmax;
    throw std::invalid_argument("unknown activation: " + s);
}

nlohmann::json MlpSpec::to_json() const {
    nlohmann::json j;
    j["input_dim"] = input_dim;
    j["widths"] = widths;
    std::vector<std::string> a;
    for (auto act : acts) a.push_back(to_string(act));
    j["acts"] = a;
    j["leak_slope"] = leak_slope;
    j["dropout_rate"] = dropout_rate;
    return j;
}

MlpSpec MlpSpec::from_json(const nlohmann::json& j) {
    MlpSpec s;
    s.input_dim = j.at("input_dim").get<Eigen::Index>();
    s.widths = j.at("widths").get<std::vector<Eigen::Index>>();
    for (const auto& a : j.at("acts")) s.acts.push_back(activation_from_string(a.get<std::string>()));
    s.leak_slope = j.at("leak_slope").get<double>();
    s.dropout_rate = j.at("dropout_rate").get<double>();
    return s;
}

Eigen::MatrixXd sample_noise(const NoiseSpec& spec, Eigen::Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd z(n, spec.dim);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < spec.dim; ++j) z(i, j) = gauss(rng);
    return z;
}

nlohmann::json ConditioningSpec::to_json() const {
    return {{"mode", mode == Task::Classification ? "classification" : "regression"},
            {"n_classes", n_classes},
            {"regression_noise_std", regression_noise_std}};
}

ConditioningSpec ConditioningSpec::from_json(const nlohmann::json& j) {
    ConditioningSpec s;
    s.mode = j.at("mode").get<std::string>() == "classification" ? Task::Classification : Task::Regression;
    s.n_classes = j.at("n_classes").get<int>();
    s.regression_noise_std = j.at("regression_noise_std").get<double>();
    return s;
}

Eigen::MatrixXd build_conditioning(const ConditioningSpec& spec, const Eigen::VectorXd& targets,
                                   std::mt19937_64* noise_rng) {
    const Eigen::Index n = targets.size();
    if (spec.mode == Task::Classification) {
        Eigen::MatrixXd cond = Eigen::MatrixXd::Zero(n, spec.n_classes);
        for (Eigen::Index i = 0; i < n; ++i) {
            const int c = static_cast<int>(targets(i));
            if (c < 0 || c >= spec.n_classes)
                throw std::invalid_argument("build_conditioning: class id out of range");
            cond(i, c) = 1.0;
        }
        return cond;
    }
    Eigen::MatrixXd cond = targets;
    if (noise_rng && spec.regression_noise_std > 0) {
        std::normal_distribution<double> gauss(0.0, spec.regression_noise_std);
        for (Eigen::Index i = 0; i < n; ++i) cond(i, 0) += gauss(*noise_rng);
    }
    return cond;
}

MlpSpec GeneratorArch::mlp() const {
    MlpSpec s;
    s.input_dim = noise.dim + cond_dim;
    for (auto h : hidden) {
        s.widths.push_back(h);
        s.acts.push_back(Activation::LeakyRelu);
    }
    s.widths.push_back(out_dim);
    s.acts.push_back(Activation::Sigmoid);
    return s;
}

MlpSpec DiscriminatorArch::mlp() const {
    MlpSpec s;
    s.input_dim = sample_dim + cond_dim;
    for (auto h : hidden) {
        s.widths.push_back(h);
        s.acts.push_back(Activation::LeakyRelu);
    }
    s.widths.push_back(1);
    s.acts.push_back(head == DiscriminatorHead::Sigmoid ? Activation::Sigmoid : Activation::Linear);
    s.dropout_rate = head == DiscriminatorHead::Sigmoid ? dropout_rate : 0.0;
    return s;
}

MlpSpec AuthenticatorArch::mlp() const {
    MlpSpec s;
    s.input_dim = in_dim;
    if (task == Task::Classification) {
        for (auto h : hidden) {
            s.widths.push_back(h);
            s.acts.push_back(Activation::LeakyRelu);
        }
        s.widths.push_back(n_classes);
        s.acts.push_back(Activation::Softmax);
    } else {
        s.widths.push_back(1);
        s.acts.push_back(Activation::Linear);
    }
    return s;
}

// --- Mlp ---------------------------------------------------------------------

Mlp Mlp::init(const MlpSpec& spec, std::uint64_t seed) {
    if (spec.widths.size() != spec.acts.size())
        throw std::invalid_argument("MlpSpec: widths/acts length mismatch");
    Mlp m;
    m.spec_ = spec;
    auto rng = make_rng(seed);
    Eigen::Index in = spec.input_dim;
    for (std::size_t l = 0; l < spec.widths.size(); ++l) {
        const Eigen::Index out = spec.widths[l];
        const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
        std::uniform_real_distribution<double> unif(-limit, limit);
        DenseLayer layer;
        layer.w.resize(out, in);
        for (Eigen::Index r = 0; r < out; ++r)
            for (Eigen::Index c = 0; c < in; ++c) layer.w(r, c) = unif(rng);
        layer.b = Eigen::VectorXd::Zero(out);
        layer.act = spec.acts[l];
        m.layers_.push_back(std::move(layer));
        in = out;
    }
    return m;
}

Mlp Mlp::from_params(const ModelParams& params) {
    Mlp m = Mlp::init(params.arch, 0);
    m.unflatten_from(params.values.data(), params.values.size());
    return m;
}

namespace {

void apply_activation(Activation act, double leak, const Eigen::MatrixXd& pre, Eigen::MatrixXd& out) {
    switch (act) {
        case Activation::Linear:
            out = pre;
            break;
        case Activation::LeakyRelu:
            out = pre.unaryExpr([leak](double v) { return v > 0 ? v : leak * v; });
            break;
        case Activation::Sigmoid:
            out = pre.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
            break;
        case Activation::Softmax: {
            out.resizeLike(pre);
            for (Eigen::Index i = 0; i < pre.rows(); ++i) {
                const double mx = pre.row(i).maxCoeff();
                out.row(i) = (pre.row(i).array() - mx).exp();
                out.row(i) /= out.row(i).sum();
            }
            break;
        }
    }
}

// dPre from dAct (gradient at the activation output).
Eigen::MatrixXd activation_backward(Activation act, double leak, const Eigen::MatrixXd& pre,
                                    const Eigen::MatrixXd& act_out, const Eigen::MatrixXd& dAct) {
    switch (act) {
        case Activation::Linear:
            return dAct;
        case Activation::LeakyRelu:
            return dAct.cwiseProduct(
                pre.unaryExpr([leak](double v) { return v > 0 ? 1.0 : leak; }));
        case Activation::Sigmoid:
            return dAct.cwiseProduct(act_out.cwiseProduct((1.0 - act_out.array()).matrix()));
        case Activation::Softmax: {
            Eigen::MatrixXd dPre(dAct.rows(), dAct.cols());
            for (Eigen::Index i = 0; i < dAct.rows(); ++i) {
                const double dot = dAct.row(i).dot(act_out.row(i));
                dPre.row(i) = act_out.row(i).cwiseProduct((dAct.row(i).array() - dot).matrix());
            }
            return dPre;
        }
    }
    return dAct;
}

}  // namespace

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x) const {
    if (x.cols() != spec_.input_dim) throw std::invalid_argument("Mlp::forward: input dim mismatch");
    Eigen::MatrixXd cur = x;
    Eigen::MatrixXd next;
    for (const auto& layer : layers_) {
        Eigen::MatrixXd pre = (cur * layer.w.transpose()).rowwise() + layer.b.transpose();
        apply_activation(layer.act, spec_.leak_slope, pre, next);
        cur = std::move(next);
    }
    return cur;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x, Cache& cache, bool training,
                             std::mt19937_64* rng) const {
    if (x.cols() != spec_.input_dim) throw std::invalid_argument("Mlp::forward: input dim mismatch");
    const bool use_dropout = training && spec_.dropout_rate > 0.0;
    if (use_dropout && rng == nullptr)
        throw std::invalid_argument("Mlp::forward: dropout training pass requires an rng");
    cache.input = x;
    cache.pre.assign(layers_.size(), {});
    cache.act_out.assign(layers_.size(), {});
    cache.out.assign(layers_.size(), {});
    cache.mask.assign(layers_.size(), {});

    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const Eigen::MatrixXd* cur = &x;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const auto& layer = layers_[l];
        cache.pre[l] = (*cur * layer.w.transpose()).rowwise() + layer.b.transpose();
        apply_activation(layer.act, spec_.leak_slope, cache.pre[l], cache.act_out[l]);
        const bool hidden = l + 1 < layers_.size();
        if (use_dropout && hidden) {
            const double keep = 1.0 - spec_.dropout_rate;
            cache.mask[l].resizeLike(cache.act_out[l]);
            for (Eigen::Index i = 0; i < cache.mask[l].rows(); ++i)
                for (Eigen::Index j = 0; j < cache.mask[l].cols(); ++j)
                    cache.mask[l](i, j) = unif(*rng) < keep ? 1.0 / keep : 0.0;
            cache.out[l] = cache.act_out[l].cwiseProduct(cache.mask[l]);
        } else {
            cache.out[l] = cache.act_out[l];
        }
        cur = &cache.out[l];
    }
    return cache.out.back();
}

Mlp::Grads Mlp::make_grads() const {
    Grads g;
    for (const auto& layer : layers_) {
        g.w.push_back(Eigen::MatrixXd::Zero(layer.w.rows(), layer.w.cols()));
        g.b.push_back(Eigen::VectorXd::Zero(layer.b.size()));
    }
    return g;
}

void Mlp::Grads::add_scaled(const Grads& other, double s) {
    for (std::size_t l = 0; l < w.size(); ++l) {
        w[l] += s * other.w[l];
        b[l] += s * other.b[l];
    }
}

bool Mlp::Grads::all_finite() const {
    for (const auto& m : w)
        if (!m.allFinite()) return false;
    for (const auto& v : b)
        if (!v.allFinite()) return false;
    return true;
}

Eigen::MatrixXd Mlp::backward(const Cache& cache, const Eigen::MatrixXd& dOut, Grads* grads) const {
    Eigen::MatrixXd d = dOut;
    for (std::size_t li = layers_.size(); li-- > 0;) {
        const auto& layer = layers_[li];
        if (cache.mask[li].size() > 0) d = d.cwiseProduct(cache.mask[li]);
        Eigen::MatrixXd dPre =
            activation_backward(layer.act, spec_.leak_slope, cache.pre[li], cache.act_out[li], d);
        const Eigen::MatrixXd& layer_in = li == 0 ? cache.input : cache.out[li - 1];
        if (grads) {
            grads->w[li] += dPre.transpose() * layer_in;
            grads->b[li] += dPre.colwise().sum().transpose();
        }
        d = dPre * layer.w;
    }
    return d;
}

Mlp::InputGrad Mlp::input_gradient(const Cache& cache) const {
    if (output_dim() != 1)
        throw std::invalid_argument("Mlp::input_gradient: scalar-head networks only");
    InputGrad ig;
    ig.deltas.assign(layers_.size(), {});
    Eigen::MatrixXd d = Eigen::MatrixXd::Ones(cache.input.rows(), 1);
    for (std::size_t li = layers_.size(); li-- > 0;) {
        const auto& layer = layers_[li];
        if (cache.mask[li].size() > 0) d = d.cwiseProduct(cache.mask[li]);
        ig.deltas[li] =
            activation_backward(layer.act, spec_.leak_slope, cache.pre[li], cache.act_out[li], d);
        d = ig.deltas[li] * layer.w;
    }
    ig.d_input = std::move(d);
    return ig;
}

void Mlp::tangent_param_grads(const Cache& cache, const InputGrad& ig, const Eigen::MatrixXd& u,
                              Grads& grads) const {
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const bool head = l + 1 == layers_.size();
        const Activation a = layers_[l].act;
        const bool ok = head ? a == Activation::Linear
                             : (a == Activation::LeakyRelu || a == Activation::Linear);
        if (!ok || cache.mask[l].size() > 0)
            throw std::invalid_argument(
                "Mlp::tangent_param_grads: requires piecewise-linear layers, linear head, no dropout");
    }
    Eigen::MatrixXd m = u;  // tangent of the layer input
    const double leak = spec_.leak_slope;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const auto& layer = layers_[l];
        grads.w[l] += ig.deltas[l].transpose() * m;
        Eigen::MatrixXd n = m * layer.w.transpose();
        if (layer.act == Activation::LeakyRelu)
            n = n.cwiseProduct(cache.pre[l].unaryExpr([leak](double v) { return v > 0 ? 1.0 : leak; }));
        m = std::move(n);
    }
}

std::size_t Mlp::param_count() const {
    std::size_t n = 0;
    for (const auto& layer : layers_)
        n += static_cast<std::size_t>(layer.w.size()) + static_cast<std::size_t>(layer.b.size());
    return n;
}

void Mlp::flatten_into(std::vector<double>& out) const {
    out.clear();
    out.reserve(param_count());
    for (const auto& layer : layers_) {
        out.insert(out.end(), layer.w.data(), layer.w.data() + layer.w.size());
        out.insert(out.end(), layer.b.data(), layer.b.data() + layer.b.size());
    }
}

void Mlp::unflatten_from(const double* data, std::size_t count) {
    if (count != param_count()) throw std::invalid_argument("Mlp::unflatten_from: size mismatch");
    std::size_t off = 0;
    for (auto& layer : layers_) {
        std::memcpy(layer.w.data(), data + off, sizeof(double) * static_cast<std::size_t>(layer.w.size()));
        off += static_cast<std::size_t>(layer.w.size());
        std::memcpy(layer.b.data(), data + off, sizeof(double) * static_cast<std::size_t>(layer.b.size()));
        off += static_cast<std::size_t>(layer.b.size());
    }
}

ModelParams Mlp::to_params(std::uint64_t seed) const {
    ModelParams p;
    p.arch = spec_;
    p.seed = seed;
    flatten_into(p.values);
    return p;
}

std::uint64_t Mlp::param_hash() const {
    std::vector<double> flat;
    flatten_into(flat);
    return fnv1a(std::string_view(reinterpret_cast<const char*>(flat.data()), flat.size() * sizeof(double)));
}

ModelParams init_params(const MlpSpec& arch, std::uint64_t seed) {
    return Mlp::init(arch, seed).to_params(seed);
}

Eigen::MatrixXd forward(const ModelParams& params, const Eigen::MatrixXd& inputs) {
    return Mlp::from_params(params).forward(inputs);
}

// --- Model file I/O ----------------------------------------------------------

namespace {
constexpr char kMagic[8] = {'D', 'E', 'P', 'O', 'I', 'S', 'M', '1'};
}

void save_model(const ModelParams& params, const std::string& path) {
    nlohmann::json header;
    header["version"] = params.version;
    header["seed"] = params.seed;
    header["arch"] = params.arch.to_json();
    header["count"] = params.values.size();
    const std::string hs = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_model: cannot write " + path);
    out.write(kMagic, sizeof(kMagic));
    const std::uint64_t hlen = hs.size();
    out.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
    out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
    out.write(reinterpret_cast<const char*>(params.values.data()),
              static_cast<std::streamsize>(params.values.size() * sizeof(double)));
}

ModelParams load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_model: cannot open " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("load_model: bad magic in " + path);
    std::uint64_t hlen = 0;
    in.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
    std::string hs(hlen, '\0');
    in.read(hs.data(), static_cast<std::streamsize>(hlen));
    const nlohmann::json header = nlohmann::json::parse(hs);

    ModelParams p;
    p.version = header.at("version").get<int>();
    p.seed = header.at("seed").get<std::uint64_t>();
    p.arch = MlpSpec::from_json(header.at("arch"));
    const auto count = header.at("count").get<std::size_t>();
    p.values.resize(count);
    in.read(reinterpret_cast<char*>(p.values.data()), static_cast<std::streamsize>(count * sizeof(double)));
    if (!in) throw std::runtime_error("load_model: truncated file " + path);
    return p;
}

}  // namespace depois
