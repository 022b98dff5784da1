#include "mirspec/mlp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "nlohmann/json.hpp"

#include "mirspec/rng.hpp"

namespace mirspec {

namespace {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMatrix = Eigen::Map<RowMatrix>;
using ConstMapMatrix = Eigen::Map<const RowMatrix>;

double softplus(double z) {
    return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

std::size_t param_count(const std::vector<int>& layers) {
    std::size_t n = 0;
    for (std::size_t l = 1; l < layers.size(); ++l)
        n += static_cast<std::size_t>(layers[l]) * layers[l - 1] +
             static_cast<std::size_t>(layers[l]);
    return n;
}

// weight/bias offsets of layer l (1-based over layers_)
struct LayerView {
    std::size_t w_offset, b_offset;
    int in, out;
};

LayerView layer_view(const std::vector<int>& layers, std::size_t l,
                     std::size_t offset) {
    LayerView v;
    v.in = layers[l - 1];
    v.out = layers[l];
    v.w_offset = offset;
    v.b_offset = offset + static_cast<std::size_t>(v.in) * v.out;
    return v;
}

}  // namespace

MlpModel::MlpModel(std::vector<int> layer_sizes)
    : layers_(std::move(layer_sizes)) {
    if (layers_.size() < 2)
        throw Error("bad-mlp", "need at least input and output layers");
    for (int s : layers_)
        if (s < 1) throw Error("bad-mlp", "layer sizes must be positive");
    if (layers_.back() != 1)
        throw Error("bad-mlp", "the output layer must have exactly one unit");
    params_.assign(param_count(layers_), 0.0);
}

MlpModel MlpModel::glorot_init(std::vector<int> layer_sizes,
                               std::uint64_t seed) {
    MlpModel model(std::move(layer_sizes));
    auto engine = make_engine(seed);
    std::size_t offset = 0;
    for (std::size_t l = 1; l < model.layers_.size(); ++l) {
        const auto view = layer_view(model.layers_, l, offset);
        const double bound =
            std::sqrt(6.0 / (static_cast<double>(view.in) + view.out));
        std::uniform_real_distribution<double> u(-bound, bound);
        for (std::size_t i = 0; i < static_cast<std::size_t>(view.in) * view.out;
             ++i)
            model.params_[view.w_offset + i] = u(engine);
        // biases stay zero
        offset = view.b_offset + static_cast<std::size_t>(view.out);
    }
    return model;
}

std::vector<double> MlpModel::forward(std::span<const double> x,
                                      std::size_t n) const {
    const auto in_dim = static_cast<std::size_t>(layers_.front());
    if (x.size() != n * in_dim)
        throw Error("length-mismatch", "batch does not match the input layer");

    RowMatrix act = ConstMapMatrix(x.data(), static_cast<Eigen::Index>(n),
                                   static_cast<Eigen::Index>(in_dim));
    std::size_t offset = 0;
    for (std::size_t l = 1; l < layers_.size(); ++l) {
        const auto view = layer_view(layers_, l, offset);
        ConstMapMatrix w(params_.data() + view.w_offset, view.out, view.in);
        Eigen::Map<const Eigen::VectorXd> b(params_.data() + view.b_offset,
                                            view.out);
        RowMatrix z = act * w.transpose();
        z.rowwise() += b.transpose();
        if (l + 1 < layers_.size())
            act = z.cwiseMax(0.0);  // ReLU
        else
            act = std::move(z);     // logits; sigmoid applied below
        offset = view.b_offset + static_cast<std::size_t>(view.out);
    }

    std::vector<double> scores(n);
    for (std::size_t i = 0; i < n; ++i)
        scores[i] = sigmoid(act(static_cast<Eigen::Index>(i), 0));
    return scores;
}

double MlpModel::mean_bce(std::span<const double> x,
                          std::span<const std::uint8_t> y,
                          std::size_t n) const {
    if (n == 0) throw Error("bad-input", "empty batch");
    const auto in_dim = static_cast<std::size_t>(layers_.front());

    RowMatrix act = ConstMapMatrix(x.data(), static_cast<Eigen::Index>(n),
                                   static_cast<Eigen::Index>(in_dim));
    std::size_t offset = 0;
    for (std::size_t l = 1; l < layers_.size(); ++l) {
        const auto view = layer_view(layers_, l, offset);
        ConstMapMatrix w(params_.data() + view.w_offset, view.out, view.in);
        Eigen::Map<const Eigen::VectorXd> b(params_.data() + view.b_offset,
                                            view.out);
        RowMatrix z = act * w.transpose();
        z.rowwise() += b.transpose();
        if (l + 1 < layers_.size()) act = z.cwiseMax(0.0);
        else act = std::move(z);
        offset = view.b_offset + static_cast<std::size_t>(view.out);
    }

    // BCE from logits: softplus(z) - y z
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double z = act(static_cast<Eigen::Index>(i), 0);
        loss += softplus(z) - (y[i] ? z : 0.0);
    }
    return loss / static_cast<double>(n);
}

std::vector<double> MlpModel::gradient(std::span<const double> x,
                                       std::span<const std::uint8_t> y,
                                       std::size_t n) const {
    if (n == 0) throw Error("bad-input", "empty batch");
    const auto in_dim = static_cast<std::size_t>(layers_.front());
    if (x.size() != n * in_dim || y.size() != n)
        throw Error("length-mismatch", "batch does not match the input layer");

    const std::size_t n_layers = layers_.size() - 1;
    std::vector<RowMatrix> activations(n_layers + 1);
    std::vector<RowMatrix> zs(n_layers);
    activations[0] = ConstMapMatrix(x.data(), static_cast<Eigen::Index>(n),
                                    static_cast<Eigen::Index>(in_dim));

    std::vector<LayerView> views(n_layers + 1);
    std::size_t offset = 0;
    for (std::size_t l = 1; l <= n_layers; ++l) {
        views[l] = layer_view(layers_, l, offset);
        offset = views[l].b_offset + static_cast<std::size_t>(views[l].out);
        ConstMapMatrix w(params_.data() + views[l].w_offset, views[l].out,
                         views[l].in);
        Eigen::Map<const Eigen::VectorXd> b(params_.data() + views[l].b_offset,
                                            views[l].out);
        zs[l - 1] = activations[l - 1] * w.transpose();
        zs[l - 1].rowwise() += b.transpose();
        activations[l] =
            (l < n_layers) ? zs[l - 1].cwiseMax(0.0).eval() : zs[l - 1];
    }

    std::vector<double> grad(params_.size(), 0.0);

    // output delta: (sigmoid(z) - y) / n
    RowMatrix delta(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        const double s = sigmoid(zs[n_layers - 1](static_cast<Eigen::Index>(i), 0));
        delta(static_cast<Eigen::Index>(i), 0) =
            (s - (y[i] ? 1.0 : 0.0)) / static_cast<double>(n);
    }

    for (std::size_t l = n_layers; l >= 1; --l) {
        const auto& view = views[l];
        MapMatrix dw(grad.data() + view.w_offset, view.out, view.in);
        Eigen::Map<Eigen::VectorXd> db(grad.data() + view.b_offset, view.out);
        dw = delta.transpose() * activations[l - 1];
        db = delta.colwise().sum().transpose();
        if (l > 1) {
            ConstMapMatrix w(params_.data() + view.w_offset, view.out, view.in);
            RowMatrix next = delta * w;
            // ReLU mask of the previous layer's pre-activation
            next.array() *= (zs[l - 2].array() > 0.0).cast<double>();
            delta = std::move(next);
        }
    }
    return grad;
}

std::vector<double> MlpModel::train(std::span<const double> x,
                                    std::span<const std::uint8_t> y,
                                    std::size_t n,
                                    const TrainOptions& options) {
    if (n == 0) throw Error("bad-input", "empty training set");
    if (options.epochs < 1 || options.batch_size < 1)
        throw Error("bad-mlp", "epochs and batch size must be positive");
    const auto in_dim = static_cast<std::size_t>(layers_.front());

    std::vector<double> m(params_.size(), 0.0), v(params_.size(), 0.0);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    auto engine = make_engine(derive_seed(options.seed, 0x3adab));

    const auto batch = static_cast<std::size_t>(options.batch_size);
    std::vector<double> bx(batch * in_dim);
    std::vector<std::uint8_t> by(batch);
    std::vector<double> history;
    history.reserve(static_cast<std::size_t>(options.epochs));

    long step = 0;
    for (int epoch = 0; epoch < options.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), engine);
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t b = std::min(batch, n - start);
            for (std::size_t i = 0; i < b; ++i) {
                const std::size_t src = order[start + i];
                std::copy_n(x.data() + src * in_dim, in_dim,
                            bx.data() + i * in_dim);
                by[i] = y[src];
            }
            const auto grad =
                gradient(std::span<const double>(bx.data(), b * in_dim),
                         std::span<const std::uint8_t>(by.data(), b), b);
            ++step;
            const double bc1 = 1.0 - std::pow(options.beta1, step);
            const double bc2 = 1.0 - std::pow(options.beta2, step);
            for (std::size_t p = 0; p < params_.size(); ++p) {
                m[p] = options.beta1 * m[p] + (1.0 - options.beta1) * grad[p];
                v[p] = options.beta2 * v[p] +
                       (1.0 - options.beta2) * grad[p] * grad[p];
                params_[p] -= options.learning_rate * (m[p] / bc1) /
                              (std::sqrt(v[p] / bc2) + options.epsilon);
            }
        }
        history.push_back(mean_bce(x, y, n));
    }
    return history;
}

std::unique_ptr<MlpClassifier> MlpClassifier::train(
    const MlpParams& params, std::span<const float> x,
    std::span<const std::uint8_t> y, std::size_t dim, std::uint64_t seed) {
    const std::size_t n = y.size();
    if (dim < 1 || x.size() != n * dim)
        throw Error("bad-input", "feature matrix does not match labels");
    std::size_t pos = 0;
    for (auto v : y) pos += (v != 0);
    if (pos == 0 || pos == n)
        throw Error("single-class", "MLP needs samples of both classes");
    for (float v : x)
        if (!std::isfinite(v)) throw Error("bad-input", "non-finite feature value");

    std::vector<int> layers;
    layers.push_back(static_cast<int>(dim));
    for (int h : params.hidden) layers.push_back(h);
    layers.push_back(1);

    auto model = MlpModel::glorot_init(layers, derive_seed(seed, 0x1417));
    std::vector<double> xd(x.begin(), x.end());

    MlpModel::TrainOptions options;
    options.epochs = params.epochs;
    options.batch_size = params.batch_size;
    options.learning_rate = params.learning_rate;
    options.beta1 = params.beta1;
    options.beta2 = params.beta2;
    options.epsilon = params.epsilon;
    options.seed = seed;
    auto history = model.train(xd, y, n, options);

    auto out = std::make_unique<MlpClassifier>(std::move(model));
    out->loss_history_ = std::move(history);
    out->params_ = params;
    return out;
}

void MlpClassifier::predict_into(const float* x, std::size_t n,
                                 std::size_t dim, double* out) const {
    if (dim != input_dim())
        throw Error("length-mismatch", "feature dimension does not match MLP");
    constexpr std::size_t kChunk = 4096;
    std::vector<double> buf(std::min(kChunk, n) * dim);
    for (std::size_t start = 0; start < n; start += kChunk) {
        const std::size_t b = std::min(kChunk, n - start);
        for (std::size_t i = 0; i < b * dim; ++i)
            buf[i] = x[start * dim + i];
        const auto scores = model_.forward(
            std::span<const double>(buf.data(), b * dim), b);
        std::copy(scores.begin(), scores.end(), out + start);
    }
}

nlohmann::ordered_json MlpClassifier::to_json() const {
    nlohmann::ordered_json j;
    j["format"] = "mirspec-model";
    j["version"] = 1;
    j["kind"] = "mlp3";
    j["hyperparameters"]["hidden"] = params_.hidden;
    j["hyperparameters"]["epochs"] = params_.epochs;
    j["hyperparameters"]["batch_size"] = params_.batch_size;
    j["hyperparameters"]["learning_rate"] = params_.learning_rate;
    j["hyperparameters"]["beta1"] = params_.beta1;
    j["hyperparameters"]["beta2"] = params_.beta2;
    j["hyperparameters"]["epsilon"] = params_.epsilon;
    j["parameters"]["layers"] = model_.layer_sizes();
    j["parameters"]["values"] = model_.parameters();
    j["parameters"]["loss_history"] = loss_history_;
    return j;
}

std::unique_ptr<MlpClassifier> MlpClassifier::from_json(
    const nlohmann::json& j) {
    const auto& p = j.at("parameters");
    MlpModel model(p.at("layers").get<std::vector<int>>());
    model.parameters() = p.at("values").get<std::vector<double>>();
    if (model.parameters().size() != param_count(model.layer_sizes()))
        throw Error("bad-model", "parameter vector does not match the layers");
    auto out = std::make_unique<MlpClassifier>(std::move(model));
    const auto& h = j.at("hyperparameters");
    out->params_.hidden = h.at("hidden").get<std::vector<int>>();
    out->params_.epochs = h.at("epochs").get<int>();
    out->params_.batch_size = h.at("batch_size").get<int>();
    out->params_.learning_rate = h.at("learning_rate").get<double>();
    out->params_.beta1 = h.at("beta1").get<double>();
    out->params_.beta2 = h.at("beta2").get<double>();
    out->params_.epsilon = h.at("epsilon").get<double>();
    out->loss_history_ = p.at("loss_history").get<std::vector<double>>();
    return out;
}

}  // namespace mirspec
