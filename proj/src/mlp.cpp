#include "ddce/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "ddce/errors.hpp"
#include "ddce/rng.hpp"

namespace ddce {

double crelu(double a, Activation act) {
    if (act == Activation::Clipped) return std::min(std::max(a, 0.0), 1.0);
    double v = 0.0;
    if (a > 0.0) v += a;
    if (a > 1.0) v += a - 1.0;
    return v;
}

double crelu_deriv(double a, Activation act) {
    if (act == Activation::Clipped) return a > 0.0 && a < 1.0 ? 1.0 : 0.0;
    if (a > 1.0) return 2.0;
    return a > 0.0 ? 1.0 : 0.0;
}

size_t MlpModel::w_offset(int layer) const {
    size_t off = 0;
    for (int l = 0; l < layer; ++l)
        off += static_cast<size_t>(dims[l + 1]) * dims[l] + dims[l + 1];
    return off;
}

size_t MlpModel::b_offset(int layer) const {
    return w_offset(layer) + static_cast<size_t>(dims[layer + 1]) * dims[layer];
}

MlpModel MlpModel::init(std::vector<int> dims, Activation act, uint64_t seed) {
    if (dims.size() < 2) throw ShapeMismatch("mlp: need at least input and output widths");
    MlpModel m;
    m.dims = std::move(dims);
    m.activation = act;
    size_t total = 0;
    for (int l = 0; l + 1 < static_cast<int>(m.dims.size()); ++l)
        total += static_cast<size_t>(m.dims[l + 1]) * m.dims[l] + m.dims[l + 1];
    m.params.assign(total, 0.0);

    std::mt19937_64 rng(mix_seed(seed, 0x6D6C70ull));
    for (int l = 0; l < m.layers(); ++l) {
        const double bound = std::sqrt(6.0 / (m.dims[l] + m.dims[l + 1]));
        double* w = m.params.data() + m.w_offset(l);
        const size_t count = static_cast<size_t>(m.dims[l + 1]) * m.dims[l];
        for (size_t i = 0; i < count; ++i) w[i] = bound * (2.0 * uniform01(rng) - 1.0);
    }
    return m;
}

std::vector<double> forward(const MlpModel& model, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != model.input_width())
        throw ShapeMismatch("mlp forward: input width mismatch");
    std::vector<double> z(x.size());
    for (size_t i = 0; i < x.size(); ++i) z[i] = (x[i] - model.norm_offset) / model.norm_scale;

    std::vector<double> next;
    for (int l = 0; l < model.layers(); ++l) {
        const int rows = model.dims[l + 1];
        const int cols = model.dims[l];
        const double* w = model.params.data() + model.w_offset(l);
        const double* b = model.params.data() + model.b_offset(l);
        next.assign(rows, 0.0);
        for (int i = 0; i < rows; ++i) {
            double acc = b[i];
            const double* wr = w + static_cast<size_t>(i) * cols;
            for (int j = 0; j < cols; ++j) acc += wr[j] * z[j];
            next[i] = l + 1 < model.layers() ? crelu(acc, model.activation) : acc;
        }
        z.swap(next);
    }
    for (double& v : z) v = v * model.norm_scale + model.norm_offset;
    return z;
}

double backward(const MlpModel& model, const std::vector<double>& x, const std::vector<double>& target,
                std::vector<double>& grad, MlpWorkspace& ws) {
    const int layers = model.layers();
    if (static_cast<int>(x.size()) != model.input_width() ||
        static_cast<int>(target.size()) != model.output_width())
        throw ShapeMismatch("mlp backward: width mismatch");
    if (grad.size() != model.params.size()) grad.assign(model.params.size(), 0.0);

    ws.act.resize(layers + 1);
    ws.pre.resize(layers);
    ws.act[0].resize(x.size());
    for (size_t i = 0; i < x.size(); ++i) ws.act[0][i] = (x[i] - model.norm_offset) / model.norm_scale;

    for (int l = 0; l < layers; ++l) {
        const int rows = model.dims[l + 1];
        const int cols = model.dims[l];
        const double* w = model.params.data() + model.w_offset(l);
        const double* b = model.params.data() + model.b_offset(l);
        ws.pre[l].resize(rows);
        ws.act[l + 1].resize(rows);
        const std::vector<double>& in = ws.act[l];
        for (int i = 0; i < rows; ++i) {
            double acc = b[i];
            const double* wr = w + static_cast<size_t>(i) * cols;
            for (int j = 0; j < cols; ++j) acc += wr[j] * in[j];
            ws.pre[l][i] = acc;
            ws.act[l + 1][i] = l + 1 < layers ? crelu(acc, model.activation) : acc;
        }
    }

    // Output y = raw * scale + offset; residual drives the backward pass.
    const int out_w = model.output_width();
    double loss = 0.0;
    ws.delta_a.resize(out_w);
    for (int i = 0; i < out_w; ++i) {
        const double y = ws.act[layers][i] * model.norm_scale + model.norm_offset;
        const double r = y - target[i];
        loss += 0.5 * r * r;
        ws.delta_a[i] = r * model.norm_scale; // d loss / d raw output
    }

    for (int l = layers - 1; l >= 0; --l) {
        const int rows = model.dims[l + 1];
        const int cols = model.dims[l];
        double* gw = grad.data() + model.w_offset(l);
        double* gb = grad.data() + model.b_offset(l);
        const std::vector<double>& in = ws.act[l];
        const double* w = model.params.data() + model.w_offset(l);

        if (l > 0) ws.delta_b.assign(cols, 0.0);
        for (int i = 0; i < rows; ++i) {
            const double d = ws.delta_a[i];
            if (d == 0.0) continue;
            double* gwr = gw + static_cast<size_t>(i) * cols;
            const double* wr = w + static_cast<size_t>(i) * cols;
            for (int j = 0; j < cols; ++j) gwr[j] += d * in[j];
            gb[i] += d;
            if (l > 0)
                for (int j = 0; j < cols; ++j) ws.delta_b[j] += d * wr[j];
        }
        if (l > 0) {
            // Through the previous layer's activation.
            for (int j = 0; j < cols; ++j) ws.delta_b[j] *= crelu_deriv(ws.pre[l - 1][j], model.activation);
            ws.delta_a.swap(ws.delta_b);
        }
    }
    return loss;
}

void adam_step(std::vector<double>& params, const std::vector<double>& grad, AdamState& state, double lr,
               double beta1, double beta2, double eps) {
    if (state.m.size() != params.size()) {
        state.m.assign(params.size(), 0.0);
        state.v.assign(params.size(), 0.0);
        state.t = 0;
    }
    state.t += 1;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
    for (size_t i = 0; i < params.size(); ++i) {
        state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * grad[i];
        state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * grad[i] * grad[i];
        const double mhat = state.m[i] / c1;
        const double vhat = state.v[i] / c2;
        params[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

FadingSpec ChannelTemplate::at_rho(double rho) const {
    if (kind == FadingKind::Rayleigh) return FadingSpec::rayleigh(rho, sigma_h2);
    return FadingSpec::rician(rho, k_factor, f_los < 0.0 ? rho : f_los, alpha0, sigma_h2);
}

Dataset make_dataset(const TrainConfig& cfg, const PredictorDims& dims, const ChannelTemplate& channel,
                     Part part, uint64_t seed) {
    cfg.rho_range.validate();
    Dataset data;
    data.input_width = dims.input_width();
    data.target_width = dims.target_width();
    data.rows = cfg.n_samples;
    data.part = part;
    data.inputs.resize(static_cast<size_t>(data.rows) * data.input_width);
    data.targets.resize(static_cast<size_t>(data.rows) * data.target_width);

    const int span = dims.n_p + dims.n_x;
    for (int j = 0; j < data.rows; ++j) {
        std::mt19937_64 rng(mix_seed(seed, 0x64617461ull, j));
        const double rho = cfg.rho_range.rho_min + uniform01(rng) * (cfg.rho_range.rho_max - cfg.rho_range.rho_min);
        const ChannelTrace trace =
            generate_trace(channel.at_rho(rho), dims.n_t, dims.n_r, span, mix_seed(seed, 0x7472616365ull, j));

        double* in = data.inputs.data() + static_cast<size_t>(j) * data.input_width;
        double* tg = data.targets.data() + static_cast<size_t>(j) * data.target_width;
        size_t pos = 0;
        for (int k = 0; k < span; ++k)
            for (int rx = 0; rx < dims.n_r; ++rx)
                for (int tx = 0; tx < dims.n_t; ++tx) {
                    const cd v = trace.at(rx, tx, k);
                    const double value = part == Part::Real ? v.real() : v.imag();
                    if (pos < static_cast<size_t>(data.input_width))
                        in[pos] = value;
                    else
                        tg[pos - data.input_width] = value;
                    ++pos;
                }
    }
    return data;
}

namespace {

// Batched forward/backward for the training loop. Activations and deltas are
// stored per sample and the weight gradient is written once per batch, which
// is what the per-sample backward() cannot do; that one stays as the
// reference implementation for gradient checks.
struct BatchWorkspace {
    std::vector<std::vector<double>> act;   // act[l]: count x dims[l]
    std::vector<std::vector<double>> pre;   // pre[l]: count x dims[l+1]
    std::vector<std::vector<double>> delta; // delta[l]: count x dims[l+1]
};

double train_batch(const MlpModel& model, const Dataset& data, const int* idx, int count,
                   std::vector<double>& grad, BatchWorkspace& ws) {
    const int layers = model.layers();
    ws.act.resize(layers + 1);
    ws.pre.resize(layers);
    ws.delta.resize(layers);

    const int in_w = model.input_width();
    ws.act[0].resize(static_cast<size_t>(count) * in_w);
    for (int s = 0; s < count; ++s) {
        const double* row = data.input_row(idx[s]);
        double* dst = ws.act[0].data() + static_cast<size_t>(s) * in_w;
        for (int j = 0; j < in_w; ++j) dst[j] = (row[j] - model.norm_offset) / model.norm_scale;
    }

    for (int l = 0; l < layers; ++l) {
        const int rows = model.dims[l + 1];
        const int cols = model.dims[l];
        const double* w = model.params.data() + model.w_offset(l);
        const double* b = model.params.data() + model.b_offset(l);
        ws.pre[l].resize(static_cast<size_t>(count) * rows);
        ws.act[l + 1].resize(static_cast<size_t>(count) * rows);
        for (int s = 0; s < count; ++s) {
            const double* in = ws.act[l].data() + static_cast<size_t>(s) * cols;
            double* pre = ws.pre[l].data() + static_cast<size_t>(s) * rows;
            double* out = ws.act[l + 1].data() + static_cast<size_t>(s) * rows;
            for (int i = 0; i < rows; ++i) {
                double acc = b[i];
                const double* wr = w + static_cast<size_t>(i) * cols;
                for (int j = 0; j < cols; ++j) acc += wr[j] * in[j];
                pre[i] = acc;
                out[i] = l + 1 < layers ? crelu(acc, model.activation) : acc;
            }
        }
    }

    // Output deltas and batch loss (0.5 ||y - t||^2 summed over the batch).
    const int out_w = model.output_width();
    double loss = 0.0;
    ws.delta[layers - 1].resize(static_cast<size_t>(count) * out_w);
    for (int s = 0; s < count; ++s) {
        const double* raw = ws.act[layers].data() + static_cast<size_t>(s) * out_w;
        const double* t = data.target_row(idx[s]);
        double* d = ws.delta[layers - 1].data() + static_cast<size_t>(s) * out_w;
        for (int i = 0; i < out_w; ++i) {
            const double r = raw[i] * model.norm_scale + model.norm_offset - t[i];
            loss += 0.5 * r * r;
            d[i] = r * model.norm_scale;
        }
    }

    // Backpropagate deltas, then write each gradient entry once.
    for (int l = layers - 1; l >= 1; --l) {
        const int rows = model.dims[l + 1];
        const int cols = model.dims[l];
        const double* w = model.params.data() + model.w_offset(l);
        ws.delta[l - 1].assign(static_cast<size_t>(count) * cols, 0.0);
        for (int s = 0; s < count; ++s) {
            const double* d = ws.delta[l].data() + static_cast<size_t>(s) * rows;
            const double* pre = ws.pre[l - 1].data() + static_cast<size_t>(s) * cols;
            double* dn = ws.delta[l - 1].data() + static_cast<size_t>(s) * cols;
            for (int i = 0; i < rows; ++i) {
                const double di = d[i];
                if (di == 0.0) continue;
                const double* wr = w + static_cast<size_t>(i) * cols;
                for (int j = 0; j < cols; ++j) dn[j] += di * wr[j];
            }
            for (int j = 0; j < cols; ++j) dn[j] *= crelu_deriv(pre[j], model.activation);
        }
    }

    const double inv = 1.0 / count;
    for (int l = 0; l < layers; ++l) {
        const int rows = model.dims[l + 1];
        const int cols = model.dims[l];
        double* gw = grad.data() + model.w_offset(l);
        double* gb = grad.data() + model.b_offset(l);
        for (int i = 0; i < rows; ++i) {
            double* gwr = gw + static_cast<size_t>(i) * cols;
            for (int j = 0; j < cols; ++j) {
                double acc = 0.0;
                for (int s = 0; s < count; ++s)
                    acc += ws.delta[l][static_cast<size_t>(s) * rows + i] *
                           ws.act[l][static_cast<size_t>(s) * cols + j];
                gwr[j] = acc * inv;
            }
            double acc = 0.0;
            for (int s = 0; s < count; ++s) acc += ws.delta[l][static_cast<size_t>(s) * rows + i];
            gb[i] = acc * inv;
        }
    }
    return loss;
}

} // namespace

TrainResult train(MlpModel model, const Dataset& data, const TrainConfig& cfg) {
    if (data.rows == 0) throw BadLength("train: empty dataset");
    if (data.input_width != model.input_width() || data.target_width != model.output_width())
        throw ShapeMismatch("train: dataset widths do not match model");

    std::vector<int> order(data.rows);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 split_rng(mix_seed(cfg.seed, 0x73706C6974ull));
    std::shuffle(order.begin(), order.end(), split_rng);
    const int n_val = std::max(data.rows / 10, data.rows > 1 ? 1 : 0);
    const int n_train = data.rows - n_val;
    std::vector<int> train_idx(order.begin(), order.begin() + n_train);
    const std::vector<int> val_idx(order.begin() + n_train, order.end());

    TrainResult result;
    result.train_loss.reserve(cfg.epochs);
    result.val_loss.reserve(cfg.epochs);

    AdamState adam;
    BatchWorkspace ws;
    std::vector<double> grad(model.params.size());
    std::vector<double> x(model.input_width());

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::mt19937_64 epoch_rng(mix_seed(cfg.seed, 0x65706F6368ull, epoch));
        std::shuffle(train_idx.begin(), train_idx.end(), epoch_rng);

        double epoch_loss = 0.0;
        long samples_seen = 0;
        for (int start = 0; start < n_train; start += cfg.batch_size) {
            const int count = std::min(cfg.batch_size, n_train - start);
            epoch_loss += train_batch(model, data, train_idx.data() + start, count, grad, ws);
            adam_step(model.params, grad, adam, cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.eps);
            samples_seen += count;
        }
        // Report mean ||f(x)-t||^2 per sample.
        result.train_loss.push_back(2.0 * epoch_loss / std::max(samples_seen, 1L));

        double val_loss = 0.0;
        for (int j : val_idx) {
            const double* in = data.input_row(j);
            std::copy(in, in + data.input_width, x.begin());
            const std::vector<double> y = forward(model, x);
            const double* t = data.target_row(j);
            for (int i = 0; i < data.target_width; ++i) {
                const double r = y[i] - t[i];
                val_loss += r * r;
            }
        }
        result.val_loss.push_back(val_idx.empty() ? 0.0 : val_loss / val_idx.size());
    }
    result.model = std::move(model);
    return result;
}

double zero_order_hold_mse(const Dataset& data, const PredictorDims& dims) {
    const int per_index = dims.n_t * dims.n_r;
    double acc = 0.0;
    long count = 0;
    for (int j = 0; j < data.rows; ++j) {
        const double* in = data.input_row(j);
        const double* tg = data.target_row(j);
        const double* last = in + static_cast<size_t>(per_index) * (dims.n_p - 1);
        for (int s = 0; s < dims.n_x; ++s)
            for (int a = 0; a < per_index; ++a) {
                const double r = tg[s * per_index + a] - last[a];
                acc += r * r;
                ++count;
            }
    }
    return count > 0 ? acc / count : 0.0;
}

double dataset_mse(const MlpModel& model, const Dataset& data) {
    std::vector<double> x(data.input_width);
    double acc = 0.0;
    long count = 0;
    for (int j = 0; j < data.rows; ++j) {
        const double* in = data.input_row(j);
        std::copy(in, in + data.input_width, x.begin());
        const std::vector<double> y = forward(model, x);
        const double* tg = data.target_row(j);
        for (int i = 0; i < data.target_width; ++i) {
            const double r = y[i] - tg[i];
            acc += r * r;
            ++count;
        }
    }
    return count > 0 ? acc / count : 0.0;
}

namespace {

constexpr const char* kMagic = "MLPCHPRED";
constexpr const char* kVersion = "v1";

void write_net(std::ofstream& out, const MlpModel& m) {
    char buf[32];
    for (int l = 0; l < m.layers(); ++l) {
        const int rows = m.dims[l + 1];
        const int cols = m.dims[l];
        const double* w = m.params.data() + m.w_offset(l);
        for (int i = 0; i < rows; ++i) {
            for (int j = 0; j < cols; ++j) {
                std::snprintf(buf, sizeof buf, "%.17g", w[static_cast<size_t>(i) * cols + j]);
                out << buf << (j + 1 < cols ? " " : "\n");
            }
        }
        const double* b = m.params.data() + m.b_offset(l);
        for (int i = 0; i < rows; ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", b[i]);
            out << buf << (i + 1 < rows ? " " : "\n");
        }
    }
}

void read_net(std::istream& in, MlpModel& m) {
    for (int l = 0; l < m.layers(); ++l) {
        const int rows = m.dims[l + 1];
        const int cols = m.dims[l];
        double* w = m.params.data() + m.w_offset(l);
        for (size_t i = 0; i < static_cast<size_t>(rows) * cols; ++i)
            if (!(in >> w[i])) throw CorruptPayload("model file: truncated weight block");
        double* b = m.params.data() + m.b_offset(l);
        for (int i = 0; i < rows; ++i)
            if (!(in >> b[i])) throw CorruptPayload("model file: truncated bias block");
    }
}

} // namespace

void save_model(const MlpModelPair& pair, const std::string& path) {
    if (pair.real_net.dims != pair.imag_net.dims ||
        pair.real_net.activation != pair.imag_net.activation)
        throw ShapeMismatch("save_model: real/imag networks must share structure");
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open model output: " + path);
    out << kMagic << " " << kVersion << "\n";
    out << "dims";
    for (int d : pair.real_net.dims) out << " " << d;
    char buf[64];
    std::snprintf(buf, sizeof buf, " act %d norm %.17g %.17g\n",
                  pair.real_net.activation == Activation::Literal ? 1 : 0, pair.real_net.norm_offset,
                  pair.real_net.norm_scale);
    out << buf;
    write_net(out, pair.real_net);
    write_net(out, pair.imag_net);
}

MlpModelPair load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open model file: " + path);
    std::string magic, version;
    if (!(in >> magic)) throw BadMagic("model file: empty");
    if (magic != kMagic) throw BadMagic("model file: bad magic '" + magic + "'");
    if (!(in >> version)) throw CorruptPayload("model file: missing version");
    if (version != kVersion) throw VersionMismatch("model file: unsupported version '" + version + "'");

    std::string line;
    std::getline(in, line); // rest of magic line
    if (!std::getline(in, line)) throw CorruptPayload("model file: missing header line");
    std::istringstream hdr(line);
    std::string tok;
    if (!(hdr >> tok) || tok != "dims") throw CorruptPayload("model file: expected dims");
    std::vector<int> dims;
    while (hdr >> tok) {
        if (tok == "act") break;
        try {
            dims.push_back(std::stoi(tok));
        } catch (...) {
            throw CorruptPayload("model file: bad dimension '" + tok + "'");
        }
    }
    if (tok != "act" || dims.size() < 2) throw CorruptPayload("model file: malformed header");
    int act_flag = 0;
    double off = 0.0, scale = 1.0;
    std::string norm_tok;
    if (!(hdr >> act_flag >> norm_tok >> off >> scale) || norm_tok != "norm")
        throw CorruptPayload("model file: malformed header");

    MlpModelPair pair;
    const Activation act = act_flag == 1 ? Activation::Literal : Activation::Clipped;
    for (MlpModel* net : {&pair.real_net, &pair.imag_net}) {
        *net = MlpModel::init(dims, act, 0);
        net->norm_offset = off;
        net->norm_scale = scale;
        read_net(in, *net);
    }
    return pair;
}

} // namespace ddce
