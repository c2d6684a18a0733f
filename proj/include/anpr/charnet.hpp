/********************************************************************************
* Copyright 2026 The anpr Authors. All Rights Reserved.
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*    http://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
********************************************************************************/

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "anpr/image.hpp"

namespace anpr {

inline constexpr int kNumClasses = 36;
/// Class index order.
inline constexpr std::string_view kAlphabet = "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZ";

/// Class index of a character in kAlphabet, or -1.
int class_index(char c) noexcept;

/// conv3x3(conv1) + ReLU, maxpool 2, conv3x3(conv2) + ReLU, maxpool 2,
/// dense(hidden) + ReLU, dense(36), softmax. Convolutions are padded by 1.
struct Architecture
{
    int input_side = 32;   ///< must be divisible by 4
    int conv1 = 16;
    int conv2 = 32;
    int hidden = 128;

    int flat() const noexcept { return conv2 * (input_side / 4) * (input_side / 4); }
    void validate() const;
    std::uint64_t hash() const noexcept;
    friend bool operator==(const Architecture&, const Architecture&) = default;
};

/// Parameter tensors in storage order. Dense weights are stored input-major
/// (in x out); convolution kernels filter-major (out x in*3*3).
enum class Param { conv1_w, conv1_b, conv2_w, conv2_b, fc1_w, fc1_b, fc2_w, fc2_b };
inline constexpr int kParamTensors = 8;

struct ParamLayout
{
    std::array<std::size_t, kParamTensors> offset{};
    std::array<std::size_t, kParamTensors> size{};
    std::array<std::size_t, kParamTensors> fan_in{};
    std::size_t total = 0;

    explicit ParamLayout(const Architecture& a);
};

class CharModel
{
public:
    /// All parameters zero.
    explicit CharModel(Architecture arch = {});

    /// He-scaled uniform weights U(-sqrt(6/fan_in), +sqrt(6/fan_in)), zero biases.
    static CharModel he_init(Architecture arch, std::uint64_t seed);

    const Architecture& arch() const noexcept { return arch_; }
    const ParamLayout& layout() const noexcept { return layout_; }

    std::span<double> params() noexcept { return params_; }
    std::span<const double> params() const noexcept { return params_; }
    std::span<double> tensor(Param p) noexcept;
    std::span<const double> tensor(Param p) const noexcept;

    friend bool operator==(const CharModel& a, const CharModel& b)
    {
        return a.arch_ == b.arch_ && a.params_ == b.params_;
    }

private:
    Architecture arch_;
    ParamLayout layout_;
    std::vector<double> params_;
};

struct LabeledSample
{
    UnitImage image;
    int label = 0;
};

struct Prediction
{
    char label = '0';
    int index = 0;
    std::array<double, kNumClasses> probs{};
    std::array<double, kNumClasses> logits{};
};

/// Stable softmax; argmax ties go to the smallest index.
std::array<double, kNumClasses> softmax(const std::array<double, kNumClasses>& logits);
int argmax(const std::array<double, kNumClasses>& v) noexcept;

Prediction model_forward(const CharModel& m, const UnitImage& x);

struct LossAndGradients
{
    double loss = 0;
    std::vector<double> grads;   ///< same layout as CharModel::params
    int correct = 0;             ///< argmax hits in the batch
};

/// Mean cross-entropy over the batch and its exact gradient.
LossAndGradients loss_and_gradients(const CharModel& m, std::span<const LabeledSample> batch);

/// v <- momentum * v - lr * g;  w <- w + v
void sgd_step(CharModel& m, std::span<const double> grads, std::vector<double>& velocity, double lr,
              double momentum);

struct EpochStats;

struct TrainConfig
{
    double learning_rate = 0.01;
    double momentum = 0.9;
    int epochs = 15;
    int batch_size = 32;
    std::uint64_t seed = 1;
    /// Re-draw the weights from `seed` before training.
    bool initialize = true;
    /// Called after every epoch; returning false ends training early.
    std::function<bool(const EpochStats&, const CharModel&)> on_epoch;

    void validate() const;
};

struct EpochStats
{
    int epoch = 0;
    double loss = 0;
    double accuracy = 0;
};

struct TrainResult
{
    CharModel model;
    std::vector<EpochStats> log;
};

/// Deterministic given cfg.seed: one generator draws the initial weights and
/// then every per-epoch shuffle.
TrainResult train(const CharModel& m, std::span<const LabeledSample> data, const TrainConfig& cfg);

/// Fraction of samples whose prediction matches the label.
double accuracy(const CharModel& m, std::span<const LabeledSample> data);

/// "epoch,loss,accuracy" CSV.
std::string format_training_log(const std::vector<EpochStats>& log);

inline constexpr std::string_view kModelMagic = "ANPRCNN1";

/// Little-endian: magic, architecture hash (u64), input_side, conv1, conv2,
/// hidden (i32 each), parameter count (u64), parameters as f32.
std::string save_model(const CharModel& m);
CharModel load_model(std::string_view bytes);

void write_model(const std::filesystem::path& path, const CharModel& m);
CharModel read_model(const std::filesystem::path& path);

}   // anpr
