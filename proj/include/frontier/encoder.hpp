#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace frontier {

/// Transformer encoder shape. Defaults are the full-size configuration
/// (about 7.9M parameters); tests and toy runs shrink it.
struct EncoderConfig {
    std::size_t n_max = 12;
    std::size_t input_dim = 24;  // TokenLayout::feature_width()
    std::size_t token_dim = 320;
    std::size_t depth = 8;
    std::size_t heads = 8;
    std::size_t head_dim = 32;
    std::size_t ff_dim = 1024;
    std::string hidden_activation = "swish";
    std::string output_activation = "sigmoid";

    /// Throws std::invalid_argument on zero sizes or unsupported activations.
    void validate() const;
    std::size_t attention_dim() const { return heads * head_dim; }
};

/// Small configuration used by tests: token_dim 8, depth 1, 2 heads of 4.
EncoderConfig tiny_config(std::size_t n_max = 12);

struct TensorInfo {
    std::string name;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t offset = 0;
    bool decay = false;  // weight decay applies (matrices only)

    std::size_t size() const { return rows * cols; }
};

/// Flat parameter layout: every tensor is a row-major block of one buffer.
class ParamLayout {
public:
    explicit ParamLayout(const EncoderConfig& config);

    const std::vector<TensorInfo>& tensors() const { return tensors_; }
    const TensorInfo& at(const std::string& name) const;
    std::size_t total() const { return total_; }

private:
    std::size_t add(std::string name, std::size_t rows, std::size_t cols, bool decay);

    std::vector<TensorInfo> tensors_;
    std::size_t total_ = 0;
};

template <typename T>
struct Model {
    EncoderConfig config;
    ParamLayout layout;
    std::vector<T> params;

    explicit Model(EncoderConfig cfg);  // all parameters zero
};

/// Seeded initialization: scaled normal matrices, unit norm gains, zero biases.
template <typename T>
Model<T> init_model(const EncoderConfig& config, std::uint64_t seed);

template <typename T>
struct LayerCache {
    using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
    using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;
    Mat x_in, xhat1, u1, q, k, v, o, x_mid, xhat2, u2, h_pre, h_act;
    Vec rstd1, rstd2;
    std::vector<Mat> attn;
};

template <typename T>
struct ForwardCache {
    using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
    using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;
    Mat tokens;
    std::vector<std::size_t> positions;
    std::vector<LayerCache<T>> layers;
    Mat x_final, xhat_f, u_f;
    Vec rstd_f, out;
};

/// Encoder pass over the active tokens only (rows of `tokens`), with
/// `positions[r]` the sequence slot of row r. Returns one sigmoid output per row.
template <typename T>
Eigen::Matrix<T, Eigen::Dynamic, 1> forward(const Model<T>& model,
                                            const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>& tokens,
                                            const std::vector<std::size_t>& positions,
                                            ForwardCache<T>* cache = nullptr);

/// Padded form: gathers rows whose mask bit is set and runs the encoder on
/// them, so padding never enters attention. Output has one entry per active row.
template <typename T>
Eigen::Matrix<T, Eigen::Dynamic, 1> forward_masked(const Model<T>& model, const Eigen::MatrixXd& tokens,
                                                   const std::vector<unsigned char>& mask,
                                                   ForwardCache<T>* cache = nullptr);

/// Accumulates d loss / d params into `grad` (same layout as params) given
/// d loss / d outputs.
template <typename T>
void backward(const Model<T>& model, const ForwardCache<T>& cache, const Eigen::Matrix<T, Eigen::Dynamic, 1>& d_out,
              std::vector<T>& grad);

template <typename To, typename From>
Model<To> convert_model(const Model<From>& model);

}  // namespace frontier
