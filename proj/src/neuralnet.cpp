#include "conetrack/neuralnet.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "conetrack/errors.hpp"

namespace conetrack {

namespace {

constexpr std::array<char, 8> kMagic{'C', 'N', 'T', 'R', 'K', 'M', 'L', 'P'};
constexpr std::uint32_t kVersion = 1;

// Vectorised tanh through exp; a short odd series covers |x| < 1e-2 where (e - 1)/(e + 1)
// loses relative accuracy. Absolute error stays within a few ulp of 1.
void fast_tanh(Eigen::MatrixXd& x) {
    auto a = x.array();
    const Eigen::ArrayXXd e = (2.0 * a.min(40.0).max(-40.0)).exp();
    const Eigen::ArrayXXd sq = a.square();
    const Eigen::ArrayXXd series = a * (1.0 - sq * (1.0 / 3.0 - sq * (2.0 / 15.0)));
    a = (a.abs() < 1e-2).select(series, (e - 1.0) / (e + 1.0));
}

void apply_activation(Eigen::MatrixXd& x, Activation a) {
    switch (a) {
    case Activation::Tanh:
        fast_tanh(x);
        break;
    case Activation::Relu:
        x = x.array().max(0.0).matrix();
        break;
    case Activation::Linear:
        break;
    }
}

// Multiplies `delta` in place by the activation derivative, expressed via the layer output.
void apply_derivative(Eigen::MatrixXd& delta, const Eigen::MatrixXd& output, Activation a) {
    switch (a) {
    case Activation::Tanh:
        delta.array() *= 1.0 - output.array().square();
        break;
    case Activation::Relu:
        delta.array() *= (output.array() > 0.0).cast<double>();
        break;
    case Activation::Linear:
        break;
    }
}

Activation layer_activation(const MlpModel& m, std::size_t k) {
    return k + 1 == m.layer_count() ? m.output_activation : m.hidden_activation;
}

} // namespace

const char* to_string(Activation a) {
    switch (a) {
    case Activation::Tanh:
        return "tanh";
    case Activation::Relu:
        return "relu";
    case Activation::Linear:
        return "linear";
    }
    return "unknown";
}

Activation activation_from_string(const std::string& name) {
    if (name == "tanh") {
        return Activation::Tanh;
    }
    if (name == "relu") {
        return Activation::Relu;
    }
    if (name == "linear") {
        return Activation::Linear;
    }
    throw ConfigError("unknown activation '" + name + "'");
}

MlpModel MlpModel::create(std::vector<int> dims, Activation hidden, Rng& rng) {
    if (dims.size() < 2) {
        throw ShapeMismatch("a network needs at least an input and an output size");
    }
    for (int d : dims) {
        if (d < 1) {
            throw ShapeMismatch("layer sizes must be positive");
        }
    }
    MlpModel m;
    m.layer_dims = std::move(dims);
    m.hidden_activation = hidden;
    for (std::size_t k = 0; k + 1 < m.layer_dims.size(); ++k) {
        const int fan_in = m.layer_dims[k];
        const int fan_out = m.layer_dims[k + 1];
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        std::uniform_real_distribution<double> dist(-limit, limit);
        Eigen::MatrixXd w(fan_out, fan_in);
        for (int r = 0; r < fan_out; ++r) {
            for (int c = 0; c < fan_in; ++c) {
                w(r, c) = dist(rng);
            }
        }
        m.weights.push_back(std::move(w));
        m.biases.push_back(Eigen::VectorXd::Zero(fan_out));
    }
    return m;
}

std::size_t MlpModel::parameter_count() const {
    std::size_t n = 0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
        n += static_cast<std::size_t>(weights[k].size() + biases[k].size());
    }
    return n;
}

bool MlpModel::all_finite() const {
    for (std::size_t k = 0; k < weights.size(); ++k) {
        if (!weights[k].allFinite() || !biases[k].allFinite()) {
            return false;
        }
    }
    return true;
}

bool operator==(const MlpModel& a, const MlpModel& b) {
    if (a.layer_dims != b.layer_dims || a.hidden_activation != b.hidden_activation ||
        a.output_activation != b.output_activation) {
        return false;
    }
    for (std::size_t k = 0; k < a.weights.size(); ++k) {
        if (a.weights[k] != b.weights[k] || a.biases[k] != b.biases[k]) {
            return false;
        }
    }
    return true;
}

Gradients Gradients::zeros_like(const MlpModel& model) {
    Gradients g;
    for (std::size_t k = 0; k < model.layer_count(); ++k) {
        g.weights.push_back(Eigen::MatrixXd::Zero(model.weights[k].rows(), model.weights[k].cols()));
        g.biases.push_back(Eigen::VectorXd::Zero(model.biases[k].size()));
    }
    return g;
}

Eigen::MatrixXd forward(const MlpModel& model, const Eigen::MatrixXd& input, ForwardCache* cache) {
    if (input.rows() != model.input_size()) {
        throw ShapeMismatch("network expects " + std::to_string(model.input_size()) +
                            " inputs, got " + std::to_string(input.rows()));
    }
    if (cache) {
        cache->inputs.clear();
        cache->activations.clear();
    }
    Eigen::MatrixXd x = input;
    for (std::size_t k = 0; k < model.layer_count(); ++k) {
        Eigen::MatrixXd z = model.weights[k] * x;
        z.colwise() += model.biases[k];
        apply_activation(z, layer_activation(model, k));
        if (cache) {
            cache->inputs.push_back(std::move(x));
            cache->activations.push_back(z);
        }
        x = std::move(z);
    }
    return x;
}

Eigen::VectorXd forward(const MlpModel& model, std::span<const double> input) {
    const Eigen::Map<const Eigen::VectorXd> col(input.data(), static_cast<Eigen::Index>(input.size()));
    return forward(model, Eigen::MatrixXd(col)).col(0);
}

Gradients backward(const MlpModel& model, const ForwardCache& cache,
                   const Eigen::MatrixXd& output_gradient) {
    if (cache.inputs.size() != model.layer_count()) {
        throw ShapeMismatch("forward cache does not match the network depth");
    }
    const Eigen::MatrixXd& last = cache.activations.back();
    if (output_gradient.rows() != last.rows() || output_gradient.cols() != last.cols()) {
        throw ShapeMismatch("output gradient shape does not match the cached output");
    }
    Gradients g;
    g.weights.resize(model.layer_count());
    g.biases.resize(model.layer_count());
    Eigen::MatrixXd delta = output_gradient;
    for (std::size_t k = model.layer_count(); k-- > 0;) {
        apply_derivative(delta, cache.activations[k], layer_activation(model, k));
        g.weights[k].noalias() = delta * cache.inputs[k].transpose();
        g.biases[k] = delta.rowwise().sum();
        Eigen::MatrixXd upstream = model.weights[k].transpose() * delta;
        delta = std::move(upstream);
    }
    g.input = std::move(delta);
    return g;
}

Eigen::MatrixXd input_gradient(const MlpModel& model, const ForwardCache& cache,
                               const Eigen::MatrixXd& output_gradient) {
    if (cache.inputs.size() != model.layer_count()) {
        throw ShapeMismatch("forward cache does not match the network depth");
    }
    const Eigen::MatrixXd& last = cache.activations.back();
    if (output_gradient.rows() != last.rows() || output_gradient.cols() != last.cols()) {
        throw ShapeMismatch("output gradient shape does not match the cached output");
    }
    Eigen::MatrixXd delta = output_gradient;
    for (std::size_t k = model.layer_count(); k-- > 0;) {
        apply_derivative(delta, cache.activations[k], layer_activation(model, k));
        Eigen::MatrixXd upstream = model.weights[k].transpose() * delta;
        delta = std::move(upstream);
    }
    return delta;
}

AdamState AdamState::for_model(const MlpModel& model, AdamConfig config) {
    AdamState s;
    s.config = config;
    for (std::size_t k = 0; k < model.layer_count(); ++k) {
        const auto& w = model.weights[k];
        s.m_weights.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
        s.v_weights.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
        s.m_biases.push_back(Eigen::VectorXd::Zero(model.biases[k].size()));
        s.v_biases.push_back(Eigen::VectorXd::Zero(model.biases[k].size()));
    }
    return s;
}

namespace {

template <typename Param, typename Moment>
void adam_apply(Param& p, const Param& g, Moment& m, Moment& v, const AdamConfig& c, double corr1,
                double corr2) {
    m = c.beta1 * m + (1.0 - c.beta1) * g;
    v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseProduct(g);
    p.array() -= c.learning_rate * (m.array() / corr1) / ((v.array() / corr2).sqrt() + c.epsilon);
}

} // namespace

void adam_step(MlpModel& model, const Gradients& grads, AdamState& state) {
    if (grads.weights.size() != model.layer_count() || state.m_weights.size() != model.layer_count()) {
        throw ShapeMismatch("gradient or optimizer state does not match the model");
    }
    ++state.step_count;
    const double t = static_cast<double>(state.step_count);
    const double corr1 = 1.0 - std::pow(state.config.beta1, t);
    const double corr2 = 1.0 - std::pow(state.config.beta2, t);
    for (std::size_t k = 0; k < model.layer_count(); ++k) {
        adam_apply(model.weights[k], grads.weights[k], state.m_weights[k], state.v_weights[k],
                   state.config, corr1, corr2);
        adam_apply(model.biases[k], grads.biases[k], state.m_biases[k], state.v_biases[k],
                   state.config, corr1, corr2);
    }
}

double ScalarAdam::step(double param, double grad) {
    ++step_count;
    const double t = static_cast<double>(step_count);
    m = config.beta1 * m + (1.0 - config.beta1) * grad;
    v = config.beta2 * v + (1.0 - config.beta2) * grad * grad;
    const double m_hat = m / (1.0 - std::pow(config.beta1, t));
    const double v_hat = v / (1.0 - std::pow(config.beta2, t));
    return param - config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
}

void soft_update(MlpModel& target, const MlpModel& source, double tau) {
    if (target.layer_dims != source.layer_dims) {
        throw ShapeMismatch("soft_update between networks of different shapes");
    }
    for (std::size_t k = 0; k < target.layer_count(); ++k) {
        target.weights[k] = (1.0 - tau) * target.weights[k] + tau * source.weights[k];
        target.biases[k] = (1.0 - tau) * target.biases[k] + tau * source.biases[k];
    }
}

// ---------------------------------------------------------------------------------------------
// Persistence: magic, u32 version, u32 dim count, u32 dims, u8 hidden, u8 output, then per
// layer the row-major weights followed by the biases as little-endian doubles.

namespace {

void put_u64(std::ostream& out, std::uint64_t v) {
    std::array<char, 8> b{};
    for (int i = 0; i < 8; ++i) {
        b[static_cast<std::size_t>(i)] = static_cast<char>((v >> (8 * i)) & 0xFF);
    }
    out.write(b.data(), 8);
}

void put_u32(std::ostream& out, std::uint32_t v) {
    std::array<char, 4> b{};
    for (int i = 0; i < 4; ++i) {
        b[static_cast<std::size_t>(i)] = static_cast<char>((v >> (8 * i)) & 0xFF);
    }
    out.write(b.data(), 4);
}

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

template <std::size_t N>
std::array<unsigned char, N> take(std::istream& in) {
    std::array<unsigned char, N> b{};
    in.read(reinterpret_cast<char*>(b.data()), N);
    if (in.gcount() != static_cast<std::streamsize>(N)) {
        throw CorruptFile("model file is truncated");
    }
    return b;
}

std::uint32_t get_u32(std::istream& in) {
    const auto b = take<4>(in);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) {
        v = (v << 8) | b[static_cast<std::size_t>(i)];
    }
    return v;
}

double get_f64(std::istream& in) {
    const auto b = take<8>(in);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) {
        v = (v << 8) | b[static_cast<std::size_t>(i)];
    }
    return std::bit_cast<double>(v);
}

Activation get_activation(std::istream& in) {
    const auto b = take<1>(in);
    if (b[0] > static_cast<unsigned char>(Activation::Linear)) {
        throw CorruptFile("unknown activation tag");
    }
    return static_cast<Activation>(b[0]);
}

} // namespace

void write_model(std::ostream& out, const MlpModel& model) {
    out.write(kMagic.data(), kMagic.size());
    put_u32(out, kVersion);
    put_u32(out, static_cast<std::uint32_t>(model.layer_dims.size()));
    for (int d : model.layer_dims) {
        put_u32(out, static_cast<std::uint32_t>(d));
    }
    const char tags[2] = {static_cast<char>(model.hidden_activation),
                          static_cast<char>(model.output_activation)};
    out.write(tags, 2);
    for (std::size_t k = 0; k < model.layer_count(); ++k) {
        const auto& w = model.weights[k];
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            for (Eigen::Index c = 0; c < w.cols(); ++c) {
                put_f64(out, w(r, c));
            }
        }
        for (Eigen::Index r = 0; r < model.biases[k].size(); ++r) {
            put_f64(out, model.biases[k](r));
        }
    }
}

MlpModel read_model(std::istream& in) {
    const auto magic = take<8>(in);
    if (std::memcmp(magic.data(), kMagic.data(), kMagic.size()) != 0) {
        throw CorruptFile("not a model file (bad magic)");
    }
    const std::uint32_t version = get_u32(in);
    if (version != kVersion) {
        throw CorruptFile("unsupported model version " + std::to_string(version));
    }
    const std::uint32_t n_dims = get_u32(in);
    if (n_dims < 2 || n_dims > 64) {
        throw CorruptFile("implausible layer count");
    }
    MlpModel m;
    for (std::uint32_t i = 0; i < n_dims; ++i) {
        const std::uint32_t d = get_u32(in);
        if (d == 0 || d > (1u << 20)) {
            throw CorruptFile("implausible layer width");
        }
        m.layer_dims.push_back(static_cast<int>(d));
    }
    m.hidden_activation = get_activation(in);
    m.output_activation = get_activation(in);
    for (std::size_t k = 0; k + 1 < m.layer_dims.size(); ++k) {
        Eigen::MatrixXd w(m.layer_dims[k + 1], m.layer_dims[k]);
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            for (Eigen::Index c = 0; c < w.cols(); ++c) {
                w(r, c) = get_f64(in);
            }
        }
        Eigen::VectorXd b(m.layer_dims[k + 1]);
        for (Eigen::Index r = 0; r < b.size(); ++r) {
            b(r) = get_f64(in);
        }
        m.weights.push_back(std::move(w));
        m.biases.push_back(std::move(b));
    }
    if (in.peek() != std::char_traits<char>::eof()) {
        throw CorruptFile("trailing bytes after model parameters");
    }
    if (!m.all_finite()) {
        throw CorruptFile("model contains non-finite parameters");
    }
    return m;
}

void save_model(const std::string& path, const MlpModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write " + path);
    }
    write_model(out, model);
}

MlpModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot read " + path);
    }
    return read_model(in);
}

} // namespace conetrack
