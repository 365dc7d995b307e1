#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "rvrecon/dataset.hpp"
#include "rvrecon/signals.hpp"

namespace rvrecon {

// Dense batch x channels x length block, row-major.
struct Tensor {
    std::vector<double> data;
    std::size_t batch = 0, channels = 0, length = 1;

    void resize(std::size_t b, std::size_t c, std::size_t l) {
        batch = b;
        channels = c;
        length = l;
        data.assign(b * c * l, 0.0);
    }
    std::size_t size() const { return batch * channels * length; }
    double* row(std::size_t b, std::size_t c) { return data.data() + (b * channels + c) * length; }
    const double* row(std::size_t b, std::size_t c) const {
        return data.data() + (b * channels + c) * length;
    }
};

// One named parameter array with its gradient accumulator.
struct ParamRef {
    std::string name;
    std::vector<std::size_t> shape;
    double* value = nullptr;
    double* grad = nullptr;
    std::size_t size = 0;
};

class Layer {
public:
    virtual ~Layer() = default;
    // forward caches whatever backward needs.
    virtual void forward(const Tensor& x, Tensor& y) = 0;
    // backward accumulates (+=) into parameter gradients and writes dx.
    virtual void backward(const Tensor& dy, Tensor& dx) = 0;
    virtual std::vector<ParamRef> params(const std::string& prefix) { (void)prefix; return {}; }
    virtual std::string spec() const = 0;
    virtual void out_shape(std::size_t in_ch, std::size_t in_len, std::size_t& out_ch,
                           std::size_t& out_len) const = 0;
    virtual std::unique_ptr<Layer> clone() const = 0;
};

// 1D convolution, stride 1, "same" zero padding; kernel width must be odd.
class Conv1d : public Layer {
public:
    Conv1d(std::size_t in_ch, std::size_t out_ch, std::size_t kernel);
    void init_he_uniform(std::mt19937_64& rng);

    void forward(const Tensor& x, Tensor& y) override;
    void backward(const Tensor& dy, Tensor& dx) override;
    std::vector<ParamRef> params(const std::string& prefix) override;
    std::string spec() const override;
    void out_shape(std::size_t in_ch, std::size_t in_len, std::size_t& out_ch,
                   std::size_t& out_len) const override;
    std::unique_ptr<Layer> clone() const override;

    std::size_t in_ch_, out_ch_, kernel_;
    std::vector<double> weight, bias;        // weight: out_ch x in_ch x kernel
    std::vector<double> dweight, dbias;

private:
    Tensor cached_x_;
};

class Relu : public Layer {
public:
    void forward(const Tensor& x, Tensor& y) override;
    void backward(const Tensor& dy, Tensor& dx) override;
    std::string spec() const override { return "relu"; }
    void out_shape(std::size_t in_ch, std::size_t in_len, std::size_t& out_ch,
                   std::size_t& out_len) const override {
        out_ch = in_ch;
        out_len = in_len;
    }
    std::unique_ptr<Layer> clone() const override { return std::make_unique<Relu>(); }

private:
    Tensor cached_x_;
};

// Width-2 max pooling; an odd trailing element is dropped. Ties route the
// gradient to the lower index.
class MaxPool2 : public Layer {
public:
    void forward(const Tensor& x, Tensor& y) override;
    void backward(const Tensor& dy, Tensor& dx) override;
    std::string spec() const override { return "maxpool2"; }
    void out_shape(std::size_t in_ch, std::size_t in_len, std::size_t& out_ch,
                   std::size_t& out_len) const override {
        out_ch = in_ch;
        out_len = in_len / 2;
    }
    std::unique_ptr<Layer> clone() const override { return std::make_unique<MaxPool2>(); }

private:
    std::vector<std::size_t> argmax_;
    std::size_t in_len_ = 0, batch_ = 0, channels_ = 0;
};

// Mean over the length axis; output length 1.
class GlobalAvgPool : public Layer {
public:
    void forward(const Tensor& x, Tensor& y) override;
    void backward(const Tensor& dy, Tensor& dx) override;
    std::string spec() const override { return "gap"; }
    void out_shape(std::size_t in_ch, std::size_t in_len, std::size_t& out_ch,
                   std::size_t& out_len) const override {
        out_ch = in_ch;
        out_len = in_len > 0 ? 1 : 0;
    }
    std::unique_ptr<Layer> clone() const override { return std::make_unique<GlobalAvgPool>(); }

private:
    std::size_t in_len_ = 0, batch_ = 0, channels_ = 0;
};

// Fully connected layer over length-1 tensors (channels act as features).
class Dense : public Layer {
public:
    Dense(std::size_t in_features, std::size_t out_features);
    void init_he_uniform(std::mt19937_64& rng);

    void forward(const Tensor& x, Tensor& y) override;
    void backward(const Tensor& dy, Tensor& dx) override;
    std::vector<ParamRef> params(const std::string& prefix) override;
    std::string spec() const override;
    void out_shape(std::size_t in_ch, std::size_t in_len, std::size_t& out_ch,
                   std::size_t& out_len) const override {
        out_ch = out_;
        out_len = in_len;
    }
    std::unique_ptr<Layer> clone() const override;

    std::size_t in_, out_;
    std::vector<double> weight, bias;  // weight: out x in
    std::vector<double> dweight, dbias;

private:
    Tensor cached_x_;
};

// Ordered layer stack ending in a 3-value regression head.
struct CnnModel {
    std::vector<std::unique_ptr<Layer>> layers;
    std::size_t in_channels = 0;

    CnnModel() = default;
    CnnModel(CnnModel&&) = default;
    CnnModel& operator=(CnnModel&&) = default;
    CnnModel(const CnnModel& other);
    CnnModel& operator=(const CnnModel& other);

    // conv(in->32,k5) relu pool2 conv(32->64,k5) relu pool2 conv(64->64,k3)
    // relu gap dense(64->32) relu dense(32->3), He-uniform init, zero biases.
    static CnnModel standard(std::size_t in_channels, std::uint64_t seed);
    static CnnModel from_spec(const std::string& spec, std::uint64_t seed);

    std::string spec_string() const;
    std::vector<ParamRef> params();
    void zero_grads();
    std::size_t n_outputs(std::size_t window_len) const;

    // Forward the batch through every layer; returns batch x out x 1.
    void forward(const Tensor& x, Tensor& y);

    // Forward plus mean-squared-error backward pass. `targets` is row-major
    // batch x n_outputs. Gradients are scaled by grad_scale and accumulated.
    double forward_backward(const Tensor& x, const std::vector<double>& targets,
                            double grad_scale = 1.0);
};

// Versioned plain-text checkpoint; values carry 17 significant digits so a
// save/load round trip is bit-exact.
void save_checkpoint(const std::string& path, const CnnModel& model);
CnnModel load_checkpoint(const std::string& path);

// Bias-corrected Adam.
struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

class AdamOptimizer {
public:
    explicit AdamOptimizer(AdamConfig cfg = {}) : cfg_(cfg) {}
    void step(const std::vector<ParamRef>& params);
    std::size_t step_count() const { return step_; }

private:
    AdamConfig cfg_;
    std::size_t step_ = 0;
    std::vector<std::vector<double>> m_, v_;
};

struct TrainConfig {
    std::size_t epochs = 60;
    std::size_t batch_size = 64;
    std::uint64_t seed = 1;
    double lr = 1e-3;
    std::size_t patience = 10;  // early stop on validation MAE
    void validate() const;
};

struct EpochStats {
    double train_mse = 0.0;
    double val_mse = 0.0;
    double val_mae = 0.0;
};

struct TrainResult {
    CnnModel model;  // best-validation checkpoint
    std::vector<EpochStats> history;
    std::size_t best_epoch = 0;
};

// Deterministic training loop over window sets: seeded init and shuffling,
// MSE loss, Adam, early stopping on validation MAE. Needs at least one
// training and one validation scan.
TrainResult train(const std::vector<ScanWindows>& train_scans,
                  const std::vector<ScanWindows>& val_scans, const TrainConfig& config);

struct PredictedRv {
    RvSeries rv;
    // true where a frame received no window estimate and was filled from its
    // nearest estimated neighbour
    std::vector<bool> extrapolated;
};

// Run the model over every window of a scan; each frame's value is the mean
// of all estimates that land on it (window offsets {first, middle, last}),
// clamped at zero. Uncovered frames are nearest-neighbour filled and flagged.
PredictedRv predict_series(CnnModel& model, const ScanWindows& windows);

// Convenience wrapper that assembles the windows from raw series first.
PredictedRv predict_series(CnnModel& model, const RoiSeries& roi, const MotionSeries* motion,
                           const ExperimentArm& arm, const WindowSpec& spec,
                           const std::string& scan_id);

}  // namespace rvrecon
