#include "frontier/encoder.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace frontier {

namespace {

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;
template <typename T>
using ConstView = Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
template <typename T>
using View = Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

// Tensor order inside ParamLayout: three input tensors, then kSlots per
// layer, then the final norm and output head.
enum Slot : std::size_t {
    kNorm1Gain,
    kNorm1Bias,
    kWq,
    kBq,
    kWk,
    kBk,
    kWv,
    kBv,
    kWo,
    kBo,
    kNorm2Gain,
    kNorm2Bias,
    kW1,
    kB1,
    kW2,
    kB2,
    kSlots
};
enum Head : std::size_t { kInputWeight, kInputBias, kPosition, kHeadTensors };
enum Tail : std::size_t { kFinalGain, kFinalBias, kOutWeight, kOutBias };

const TensorInfo& layer_tensor(const ParamLayout& layout, std::size_t layer, Slot slot) {
    return layout.tensors()[kHeadTensors + layer * kSlots + slot];
}

const TensorInfo& tail_tensor(const ParamLayout& layout, std::size_t depth, Tail t) {
    return layout.tensors()[kHeadTensors + depth * kSlots + t];
}

template <typename T>
ConstView<T> view(const std::vector<T>& p, const TensorInfo& t) {
    return ConstView<T>(p.data() + t.offset, static_cast<Eigen::Index>(t.rows), static_cast<Eigen::Index>(t.cols));
}

template <typename T>
View<T> view(std::vector<T>& p, const TensorInfo& t) {
    return View<T>(p.data() + t.offset, static_cast<Eigen::Index>(t.rows), static_cast<Eigen::Index>(t.cols));
}

template <typename T>
Mat<T> linear(const Mat<T>& x, const ConstView<T>& w, const ConstView<T>& b) {
    Mat<T> y = x * w.transpose();
    y.rowwise() += b.row(0);
    return y;
}

template <typename T>
Mat<T> linear_backward(const Mat<T>& dy, const Mat<T>& x, const ConstView<T>& w, View<T> dw, View<T> db) {
    dw.noalias() += dy.transpose() * x;
    db.row(0) += dy.colwise().sum();
    return dy * w;
}

constexpr double kNormEps = 1e-5;

template <typename T>
void layer_norm(const Mat<T>& x, const ConstView<T>& gain, const ConstView<T>& bias, Mat<T>& xhat, Vec<T>& rstd,
                Mat<T>& y) {
    xhat.resize(x.rows(), x.cols());
    rstd.resize(x.rows());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        const T mean = x.row(r).mean();
        const auto centered = (x.row(r).array() - mean).eval();
        const T var = centered.square().mean();
        const T rs = T(1) / std::sqrt(var + T(kNormEps));
        xhat.row(r) = centered * rs;
        rstd(r) = rs;
    }
    y = (xhat.array().rowwise() * gain.row(0).array()).rowwise() + bias.row(0).array();
}

template <typename T>
Mat<T> layer_norm_backward(const Mat<T>& dy, const Mat<T>& xhat, const Vec<T>& rstd, const ConstView<T>& gain,
                           View<T> dgain, View<T> dbias) {
    dgain.row(0) += (dy.array() * xhat.array()).colwise().sum().matrix();
    dbias.row(0) += dy.colwise().sum();
    const Mat<T> dxhat = (dy.array().rowwise() * gain.row(0).array()).matrix();
    Mat<T> dx(dy.rows(), dy.cols());
    for (Eigen::Index r = 0; r < dy.rows(); ++r) {
        const T m1 = dxhat.row(r).mean();
        const T m2 = (dxhat.row(r).array() * xhat.row(r).array()).mean();
        dx.row(r) = rstd(r) * (dxhat.row(r).array() - m1 - xhat.row(r).array() * m2);
    }
    return dx;
}

template <typename T>
T sigmoid(T z) {
    return T(1) / (T(1) + std::exp(-z));
}

}  // namespace

void EncoderConfig::validate() const {
    if (n_max == 0 || input_dim == 0 || token_dim == 0 || depth == 0 || heads == 0 || head_dim == 0 || ff_dim == 0) {
        throw std::invalid_argument("encoder config: all sizes must be positive");
    }
    if (hidden_activation != "swish") {
        throw std::invalid_argument("encoder config: unsupported hidden activation '" + hidden_activation + "'");
    }
    if (output_activation != "sigmoid") {
        throw std::invalid_argument("encoder config: unsupported output activation '" + output_activation + "'");
    }
}

EncoderConfig tiny_config(std::size_t n_max) {
    EncoderConfig c;
    c.n_max = n_max;
    c.input_dim = 12 + n_max;
    c.token_dim = 8;
    c.depth = 1;
    c.heads = 2;
    c.head_dim = 4;
    c.ff_dim = 16;
    return c;
}

ParamLayout::ParamLayout(const EncoderConfig& config) {
    config.validate();
    const std::size_t d = config.token_dim;
    const std::size_t a = config.attention_dim();
    const std::size_t f = config.ff_dim;
    add("input.weight", d, config.input_dim, true);
    add("input.bias", 1, d, false);
    add("position", config.n_max, d, false);
    for (std::size_t l = 0; l < config.depth; ++l) {
        const std::string p = "layers." + std::to_string(l) + ".";
        add(p + "norm1.gain", 1, d, false);
        add(p + "norm1.bias", 1, d, false);
        add(p + "attn.wq", a, d, true);
        add(p + "attn.bq", 1, a, false);
        add(p + "attn.wk", a, d, true);
        add(p + "attn.bk", 1, a, false);
        add(p + "attn.wv", a, d, true);
        add(p + "attn.bv", 1, a, false);
        add(p + "attn.wo", d, a, true);
        add(p + "attn.bo", 1, d, false);
        add(p + "norm2.gain", 1, d, false);
        add(p + "norm2.bias", 1, d, false);
        add(p + "ff.w1", f, d, true);
        add(p + "ff.b1", 1, f, false);
        add(p + "ff.w2", d, f, true);
        add(p + "ff.b2", 1, d, false);
    }
    add("final_norm.gain", 1, d, false);
    add("final_norm.bias", 1, d, false);
    add("head.weight", 1, d, false);
    add("head.bias", 1, 1, false);
}

std::size_t ParamLayout::add(std::string name, std::size_t rows, std::size_t cols, bool decay) {
    tensors_.push_back({std::move(name), rows, cols, total_, decay});
    total_ += rows * cols;
    return tensors_.size() - 1;
}

const TensorInfo& ParamLayout::at(const std::string& name) const {
    for (const auto& t : tensors_) {
        if (t.name == name) {
            return t;
        }
    }
    throw std::out_of_range("no tensor named '" + name + "'");
}

template <typename T>
Model<T>::Model(EncoderConfig cfg) : config(std::move(cfg)), layout(config), params(layout.total(), T(0)) {}

template <typename T>
Model<T> init_model(const EncoderConfig& config, std::uint64_t seed) {
    Model<T> model(config);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (const auto& t : model.layout.tensors()) {
        const bool is_gain = t.name.find(".gain") != std::string::npos;
        double stddev = 0.0;
        if (t.name == "position") {
            stddev = 0.02;
        } else if (t.decay || t.name == "head.weight") {
            stddev = 1.0 / std::sqrt(static_cast<double>(t.cols));
        }
        for (std::size_t i = 0; i < t.size(); ++i) {
            double v = 0.0;
            if (is_gain) {
                v = 1.0;
            } else if (stddev > 0.0) {
                v = stddev * normal(rng);
            }
            model.params[t.offset + i] = static_cast<T>(v);
        }
    }
    return model;
}

template <typename T>
Vec<T> forward(const Model<T>& model, const Mat<T>& tokens, const std::vector<std::size_t>& positions,
               ForwardCache<T>* cache) {
    const EncoderConfig& cfg = model.config;
    const ParamLayout& layout = model.layout;
    const auto& p = model.params;
    const auto rows = tokens.rows();
    if (static_cast<std::size_t>(tokens.cols()) != cfg.input_dim) {
        throw std::invalid_argument("forward: token width " + std::to_string(tokens.cols()) + " != input_dim " +
                                    std::to_string(cfg.input_dim));
    }
    if (positions.size() != static_cast<std::size_t>(rows) || static_cast<std::size_t>(rows) > cfg.n_max) {
        throw std::invalid_argument("forward: position count mismatch or too many tokens");
    }

    ForwardCache<T> local;
    ForwardCache<T>& c = cache ? *cache : local;
    c.tokens = tokens;
    c.positions = positions;
    c.layers.resize(cfg.depth);

    const auto& tensors = layout.tensors();
    Mat<T> x = linear<T>(tokens, view(p, tensors[kInputWeight]), view(p, tensors[kInputBias]));
    const auto pos = view(p, tensors[kPosition]);
    for (Eigen::Index r = 0; r < rows; ++r) {
        if (positions[static_cast<std::size_t>(r)] >= cfg.n_max) {
            throw std::invalid_argument("forward: position out of range");
        }
        x.row(r) += pos.row(static_cast<Eigen::Index>(positions[static_cast<std::size_t>(r)]));
    }

    const auto hd = static_cast<Eigen::Index>(cfg.head_dim);
    const T scale = T(1) / std::sqrt(static_cast<T>(cfg.head_dim));
    for (std::size_t l = 0; l < cfg.depth; ++l) {
        auto& lc = c.layers[l];
        auto t = [&](Slot s) { return view(p, layer_tensor(layout, l, s)); };
        lc.x_in = x;
        layer_norm<T>(x, t(kNorm1Gain), t(kNorm1Bias), lc.xhat1, lc.rstd1, lc.u1);
        lc.q = linear<T>(lc.u1, t(kWq), t(kBq));
        lc.k = linear<T>(lc.u1, t(kWk), t(kBk));
        lc.v = linear<T>(lc.u1, t(kWv), t(kBv));
        lc.o.resize(rows, static_cast<Eigen::Index>(cfg.attention_dim()));
        lc.attn.resize(cfg.heads);
        for (std::size_t h = 0; h < cfg.heads; ++h) {
            const auto col = static_cast<Eigen::Index>(h) * hd;
            Mat<T> s = (lc.q.middleCols(col, hd) * lc.k.middleCols(col, hd).transpose()) * scale;
            for (Eigen::Index r = 0; r < rows; ++r) {
                const T mx = s.row(r).maxCoeff();
                s.row(r) = (s.row(r).array() - mx).exp();
                s.row(r) /= s.row(r).sum();
            }
            lc.o.middleCols(col, hd) = s * lc.v.middleCols(col, hd);
            lc.attn[h] = std::move(s);
        }
        x += linear<T>(lc.o, t(kWo), t(kBo));
        lc.x_mid = x;
        layer_norm<T>(x, t(kNorm2Gain), t(kNorm2Bias), lc.xhat2, lc.rstd2, lc.u2);
        lc.h_pre = linear<T>(lc.u2, t(kW1), t(kB1));
        lc.h_act = lc.h_pre.unaryExpr([](T z) { return z * sigmoid(z); });
        x += linear<T>(lc.h_act, t(kW2), t(kB2));
    }

    c.x_final = x;
    layer_norm<T>(x, view(p, tail_tensor(layout, cfg.depth, kFinalGain)),
                  view(p, tail_tensor(layout, cfg.depth, kFinalBias)), c.xhat_f, c.rstd_f, c.u_f);
    const auto w_out = view(p, tail_tensor(layout, cfg.depth, kOutWeight));
    const T b_out = p[tail_tensor(layout, cfg.depth, kOutBias).offset];
    const Vec<T> logits = c.u_f * w_out.row(0).transpose();
    c.out = logits.unaryExpr([b_out](T z) { return sigmoid(z + b_out); });
    return c.out;
}

template <typename T>
Vec<T> forward_masked(const Model<T>& model, const Eigen::MatrixXd& tokens, const std::vector<unsigned char>& mask,
                      ForwardCache<T>* cache) {
    if (mask.size() != static_cast<std::size_t>(tokens.rows())) {
        throw std::invalid_argument("forward: mask length does not match token rows");
    }
    std::vector<std::size_t> positions;
    for (std::size_t r = 0; r < mask.size(); ++r) {
        if (mask[r]) {
            positions.push_back(r);
        }
    }
    Mat<T> active(static_cast<Eigen::Index>(positions.size()), tokens.cols());
    for (std::size_t r = 0; r < positions.size(); ++r) {
        active.row(static_cast<Eigen::Index>(r)) =
            tokens.row(static_cast<Eigen::Index>(positions[r])).template cast<T>();
    }
    return forward(model, active, positions, cache);
}

template <typename T>
void backward(const Model<T>& model, const ForwardCache<T>& c, const Vec<T>& d_out, std::vector<T>& grad) {
    const EncoderConfig& cfg = model.config;
    const ParamLayout& layout = model.layout;
    const auto& p = model.params;
    if (grad.size() != p.size()) {
        throw std::invalid_argument("backward: gradient buffer has wrong size");
    }
    if (d_out.size() != c.out.size()) {
        throw std::invalid_argument("backward: output gradient has wrong length");
    }
    const std::size_t depth = cfg.depth;

    const Vec<T> d_logit = d_out.array() * c.out.array() * (T(1) - c.out.array());
    const auto& out_w = tail_tensor(layout, depth, kOutWeight);
    view(grad, out_w).row(0) += d_logit.transpose() * c.u_f;
    grad[tail_tensor(layout, depth, kOutBias).offset] += d_logit.sum();
    const Mat<T> du_f = d_logit * view(p, out_w).row(0);
    Mat<T> dx = layer_norm_backward<T>(du_f, c.xhat_f, c.rstd_f, view(p, tail_tensor(layout, depth, kFinalGain)),
                                       view(grad, tail_tensor(layout, depth, kFinalGain)),
                                       view(grad, tail_tensor(layout, depth, kFinalBias)));

    const auto hd = static_cast<Eigen::Index>(cfg.head_dim);
    const T scale = T(1) / std::sqrt(static_cast<T>(cfg.head_dim));
    for (std::size_t l = depth; l-- > 0;) {
        const auto& lc = c.layers[l];
        auto t = [&](Slot s) { return view(p, layer_tensor(layout, l, s)); };
        auto g = [&](Slot s) { return view(grad, layer_tensor(layout, l, s)); };

        const Mat<T> dh_act = linear_backward<T>(dx, lc.h_act, t(kW2), g(kW2), g(kB2));
        const Mat<T> dh_pre = dh_act.binaryExpr(lc.h_pre, [](T dy, T z) {
            const T s = sigmoid(z);
            return dy * (s + z * s * (T(1) - s));
        });
        const Mat<T> du2 = linear_backward<T>(dh_pre, lc.u2, t(kW1), g(kW1), g(kB1));
        const Mat<T> dx_mid = dx + layer_norm_backward<T>(du2, lc.xhat2, lc.rstd2, t(kNorm2Gain), g(kNorm2Gain),
                                                          g(kNorm2Bias));

        const Mat<T> d_o = linear_backward<T>(dx_mid, lc.o, t(kWo), g(kWo), g(kBo));
        Mat<T> dq = Mat<T>::Zero(lc.q.rows(), lc.q.cols());
        Mat<T> dk = Mat<T>::Zero(lc.k.rows(), lc.k.cols());
        Mat<T> dv = Mat<T>::Zero(lc.v.rows(), lc.v.cols());
        for (std::size_t h = 0; h < cfg.heads; ++h) {
            const auto col = static_cast<Eigen::Index>(h) * hd;
            const Mat<T>& a = lc.attn[h];
            const Mat<T> d_oh = d_o.middleCols(col, hd);
            const Mat<T> da = d_oh * lc.v.middleCols(col, hd).transpose();
            dv.middleCols(col, hd) = a.transpose() * d_oh;
            const Vec<T> row_dot = (da.array() * a.array()).rowwise().sum();
            const Mat<T> ds = (a.array() * (da.array().colwise() - row_dot.array())).matrix();
            dq.middleCols(col, hd) = (ds * lc.k.middleCols(col, hd)) * scale;
            dk.middleCols(col, hd) = (ds.transpose() * lc.q.middleCols(col, hd)) * scale;
        }
        Mat<T> du1 = linear_backward<T>(dq, lc.u1, t(kWq), g(kWq), g(kBq));
        du1 += linear_backward<T>(dk, lc.u1, t(kWk), g(kWk), g(kBk));
        du1 += linear_backward<T>(dv, lc.u1, t(kWv), g(kWv), g(kBv));
        dx = dx_mid + layer_norm_backward<T>(du1, lc.xhat1, lc.rstd1, t(kNorm1Gain), g(kNorm1Gain), g(kNorm1Bias));
    }

    const auto& tensors = layout.tensors();
    linear_backward<T>(dx, c.tokens, view(p, tensors[kInputWeight]), view(grad, tensors[kInputWeight]),
                       view(grad, tensors[kInputBias]));
    auto d_pos = view(grad, tensors[kPosition]);
    for (Eigen::Index r = 0; r < dx.rows(); ++r) {
        d_pos.row(static_cast<Eigen::Index>(c.positions[static_cast<std::size_t>(r)])) += dx.row(r);
    }
}

template <typename To, typename From>
Model<To> convert_model(const Model<From>& model) {
    Model<To> out(model.config);
    for (std::size_t i = 0; i < model.params.size(); ++i) {
        out.params[i] = static_cast<To>(model.params[i]);
    }
    return out;
}

template struct Model<float>;
template struct Model<double>;
template Model<float> init_model<float>(const EncoderConfig&, std::uint64_t);
template Model<double> init_model<double>(const EncoderConfig&, std::uint64_t);
template Vec<float> forward<float>(const Model<float>&, const Mat<float>&, const std::vector<std::size_t>&,
                                   ForwardCache<float>*);
template Vec<double> forward<double>(const Model<double>&, const Mat<double>&, const std::vector<std::size_t>&,
                                     ForwardCache<double>*);
template Vec<float> forward_masked<float>(const Model<float>&, const Eigen::MatrixXd&,
                                          const std::vector<unsigned char>&, ForwardCache<float>*);
template Vec<double> forward_masked<double>(const Model<double>&, const Eigen::MatrixXd&,
                                            const std::vector<unsigned char>&, ForwardCache<double>*);
template void backward<float>(const Model<float>&, const ForwardCache<float>&, const Vec<float>&,
                              std::vector<float>&);
template void backward<double>(const Model<double>&, const ForwardCache<double>&, const Vec<double>&,
                               std::vector<double>&);
template Model<float> convert_model<float, double>(const Model<double>&);
template Model<double> convert_model<double, float>(const Model<float>&);
template Model<float> convert_model<float, float>(const Model<float>&);
template Model<double> convert_model<double, double>(const Model<double>&);

}  // namespace frontier
