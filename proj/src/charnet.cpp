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

#include "anpr/charnet.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <numeric>

#include "anpr/gemm.hpp"
#include "anpr/imageio.hpp"
#include "anpr/rng.hpp"

namespace anpr {

int class_index(char c) noexcept
{
    const auto p = kAlphabet.find(c);
    return p == std::string_view::npos ? -1 : static_cast<int>(p);
}

void Architecture::validate() const
{
    ANPR_CHECK(input_side >= 4 && input_side % 4 == 0, "input side must be a positive multiple of 4");
    ANPR_CHECK(conv1 >= 1 && conv2 >= 1 && hidden >= 1, "layer widths must be positive");
}

std::uint64_t Architecture::hash() const noexcept
{
    const std::string desc = "anpr-charnet:v1:side=" + std::to_string(input_side) +
                             ";conv1=" + std::to_string(conv1) + ";conv2=" + std::to_string(conv2) +
                             ";hidden=" + std::to_string(hidden) +
                             ";classes=" + std::to_string(kNumClasses);
    std::uint64_t h = 0xcbf29ce484222325ULL;   // FNV-1a
    for (unsigned char c : desc) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

ParamLayout::ParamLayout(const Architecture& a)
{
    a.validate();
    const std::array<std::size_t, kParamTensors> sizes = {
        std::size_t(a.conv1) * 9,           std::size_t(a.conv1),
        std::size_t(a.conv2) * a.conv1 * 9, std::size_t(a.conv2),
        std::size_t(a.flat()) * a.hidden,   std::size_t(a.hidden),
        std::size_t(a.hidden) * kNumClasses, std::size_t(kNumClasses)};
    fan_in = {9, 9, std::size_t(a.conv1) * 9, std::size_t(a.conv1) * 9,
              std::size_t(a.flat()), std::size_t(a.flat()), std::size_t(a.hidden),
              std::size_t(a.hidden)};
    for (int i = 0; i < kParamTensors; ++i) {
        offset[i] = total;
        size[i] = sizes[i];
        total += sizes[i];
    }
}

CharModel::CharModel(Architecture arch) : arch_(arch), layout_(arch), params_(layout_.total, 0.0) {}

std::span<double> CharModel::tensor(Param p) noexcept
{
    const auto i = static_cast<int>(p);
    return std::span<double>(params_).subspan(layout_.offset[i], layout_.size[i]);
}

std::span<const double> CharModel::tensor(Param p) const noexcept
{
    const auto i = static_cast<int>(p);
    return std::span<const double>(params_).subspan(layout_.offset[i], layout_.size[i]);
}

namespace {

void he_fill(CharModel& m, Rng& rng)
{
    const auto& lay = m.layout();
    for (int i = 0; i < kParamTensors; ++i) {
        auto t = m.tensor(static_cast<Param>(i));
        if (i % 2 == 1) {   // biases
            std::fill(t.begin(), t.end(), 0.0);
            continue;
        }
        const double limit = std::sqrt(6.0 / double(lay.fan_in[i]));
        for (auto& v : t) v = rng.uniform(-limit, limit);
    }
}

}   // namespace

CharModel CharModel::he_init(Architecture arch, std::uint64_t seed)
{
    CharModel m(arch);
    Rng rng(seed);
    he_fill(m, rng);
    return m;
}

std::array<double, kNumClasses> softmax(const std::array<double, kNumClasses>& z)
{
    const double mx = *std::max_element(z.begin(), z.end());
    std::array<double, kNumClasses> p{};
    double sum = 0;
    for (int k = 0; k < kNumClasses; ++k) sum += (p[k] = std::exp(z[k] - mx));
    for (auto& v : p) v /= sum;
    return p;
}

int argmax(const std::array<double, kNumClasses>& v) noexcept
{
    int best = 0;
    for (int k = 1; k < kNumClasses; ++k) {
        if (v[k] > v[best]) best = k;
    }
    return best;
}

namespace {

// Activations of a batch, kept for the backward pass.
struct Workspace
{
    int batch = 0;
    int s1 = 0, s2 = 0;    // spatial sizes (pixels) after conv1 / conv2
    int k1 = 9, k2 = 0;    // im2col rows
    std::vector<double> col1, z1, col2, z2;
    std::vector<int> idx1, idx2;
    std::vector<double> p1;
    std::vector<double> x, h, a, logits;

    Workspace(const Architecture& arch, int b) : batch(b)
    {
        const int side = arch.input_side;
        s1 = side * side;
        s2 = (side / 2) * (side / 2);
        k2 = arch.conv1 * 9;
        col1.resize(std::size_t(b) * k1 * s1);
        z1.resize(std::size_t(b) * arch.conv1 * s1);
        p1.resize(std::size_t(b) * arch.conv1 * s2);
        idx1.resize(p1.size());
        col2.resize(std::size_t(b) * k2 * s2);
        z2.resize(std::size_t(b) * arch.conv2 * s2);
        x.resize(std::size_t(b) * arch.flat());
        idx2.resize(x.size());
        h.resize(std::size_t(b) * arch.hidden);
        a.resize(h.size());
        logits.resize(std::size_t(b) * kNumClasses);
    }
};

// ReLU then 2x2/2 max pooling over a (channels x side x side) map. idx holds
// the flat source index of each pooled value (first maximum wins).
void relu_pool(const double* z, int channels, int side, double* out, int* idx)
{
    const int half = side / 2;
    for (int c = 0; c < channels; ++c) {
        const double* zc = z + std::size_t(c) * side * side;
        for (int py = 0; py < half; ++py) {
            for (int px = 0; px < half; ++px) {
                int best = (2 * py) * side + 2 * px;
                double bv = std::max(zc[best], 0.0);
                for (int k = 1; k < 4; ++k) {
                    const int j = (2 * py + k / 2) * side + 2 * px + k % 2;
                    const double v = std::max(zc[j], 0.0);
                    if (v > bv) {
                        bv = v;
                        best = j;
                    }
                }
                const std::size_t o = std::size_t(c) * half * half + py * half + px;
                out[o] = bv;
                idx[o] = c * side * side + best;
            }
        }
    }
}

void add_bias_rows(double* m, int rows, int cols, const double* bias)
{
    for (int r = 0; r < rows; ++r) {
        double* row = m + std::size_t(r) * cols;
        const double b = bias[r];
        for (int c = 0; c < cols; ++c) row[c] += b;
    }
}

void add_bias_cols(double* m, int rows, int cols, const double* bias)
{
    for (int r = 0; r < rows; ++r) {
        double* row = m + std::size_t(r) * cols;
        for (int c = 0; c < cols; ++c) row[c] += bias[c];
    }
}

void forward_batch(const CharModel& m, std::span<const UnitImage* const> inputs, Workspace& ws)
{
    const Architecture& ar = m.arch();
    const int side = ar.input_side, half = side / 2;
    const double* w1 = m.tensor(Param::conv1_w).data();
    const double* b1 = m.tensor(Param::conv1_b).data();
    const double* w2 = m.tensor(Param::conv2_w).data();
    const double* b2 = m.tensor(Param::conv2_b).data();

    for (int s = 0; s < ws.batch; ++s) {
        const UnitImage& img = *inputs[s];
        ANPR_CHECK(img.width() == side && img.height() == side,
                   "character raster must be " + std::to_string(side) + "x" + std::to_string(side));
        double* col1 = ws.col1.data() + std::size_t(s) * ws.k1 * ws.s1;
        double* z1 = ws.z1.data() + std::size_t(s) * ar.conv1 * ws.s1;
        double* p1 = ws.p1.data() + std::size_t(s) * ar.conv1 * ws.s2;
        double* col2 = ws.col2.data() + std::size_t(s) * ws.k2 * ws.s2;
        double* z2 = ws.z2.data() + std::size_t(s) * ar.conv2 * ws.s2;

        im2col(img.pixels().data(), 1, side, side, 3, 1, 1, col1);
        gemm_nn(ar.conv1, ws.s1, ws.k1, w1, col1, z1, false);
        add_bias_rows(z1, ar.conv1, ws.s1, b1);
        relu_pool(z1, ar.conv1, side, p1, ws.idx1.data() + std::size_t(s) * ar.conv1 * ws.s2);

        im2col(p1, ar.conv1, half, half, 3, 1, 1, col2);
        gemm_nn(ar.conv2, ws.s2, ws.k2, w2, col2, z2, false);
        add_bias_rows(z2, ar.conv2, ws.s2, b2);
        relu_pool(z2, ar.conv2, half, ws.x.data() + std::size_t(s) * ar.flat(),
                  ws.idx2.data() + std::size_t(s) * ar.flat());
    }

    gemm_nn(ws.batch, ar.hidden, ar.flat(), ws.x.data(), m.tensor(Param::fc1_w).data(), ws.h.data(),
            false);
    add_bias_cols(ws.h.data(), ws.batch, ar.hidden, m.tensor(Param::fc1_b).data());
    for (std::size_t i = 0; i < ws.h.size(); ++i) ws.a[i] = std::max(ws.h[i], 0.0);
    gemm_nn(ws.batch, kNumClasses, ar.hidden, ws.a.data(), m.tensor(Param::fc2_w).data(),
            ws.logits.data(), false);
    add_bias_cols(ws.logits.data(), ws.batch, kNumClasses, m.tensor(Param::fc2_b).data());
}

std::array<double, kNumClasses> logits_of(const Workspace& ws, int s)
{
    std::array<double, kNumClasses> z{};
    std::copy_n(ws.logits.begin() + std::size_t(s) * kNumClasses, kNumClasses, z.begin());
    return z;
}

std::vector<double> transpose(std::span<const double> m, int rows, int cols)
{
    std::vector<double> t(m.size());
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) t[std::size_t(c) * rows + r] = m[std::size_t(r) * cols + c];
    }
    return t;
}

// dW (out x k) += dz (out x n) * col^T (n x k), computed as col * dz^T to keep
// the inner loop contiguous.
void accumulate_kernel_grad(const double* dz, const double* col, int out, int n, int k, double* dw)
{
    const std::vector<double> dzt = transpose({dz, std::size_t(out) * n}, out, n);
    std::vector<double> g(std::size_t(k) * out);
    gemm_nn(k, out, n, col, dzt.data(), g.data(), false);
    for (int r = 0; r < k; ++r) {
        for (int c = 0; c < out; ++c) dw[std::size_t(c) * k + r] += g[std::size_t(r) * out + c];
    }
}

}   // namespace

Prediction model_forward(const CharModel& m, const UnitImage& x)
{
    Workspace ws(m.arch(), 1);
    const UnitImage* in[] = {&x};
    forward_batch(m, in, ws);
    Prediction p;
    p.logits = logits_of(ws, 0);
    p.probs = softmax(p.logits);
    p.index = argmax(p.probs);
    p.label = kAlphabet[p.index];
    return p;
}

LossAndGradients loss_and_gradients(const CharModel& m, std::span<const LabeledSample> batch)
{
    ANPR_CHECK(!batch.empty(), "batch must not be empty");
    const Architecture& ar = m.arch();
    const int b = static_cast<int>(batch.size());
    const int side = ar.input_side, half = side / 2;

    Workspace ws(ar, b);
    std::vector<const UnitImage*> inputs(b);
    for (int s = 0; s < b; ++s) {
        ANPR_CHECK(batch[s].label >= 0 && batch[s].label < kNumClasses, "sample label out of range");
        inputs[s] = &batch[s].image;
    }
    forward_batch(m, inputs, ws);

    LossAndGradients out;
    out.grads.assign(m.layout().total, 0.0);
    auto grad = [&](Param p) {
        const auto i = static_cast<int>(p);
        return out.grads.data() + m.layout().offset[i];
    };

    // Softmax cross-entropy: dlogits = (p - onehot) / batch
    std::vector<double> dlogits(std::size_t(b) * kNumClasses);
    for (int s = 0; s < b; ++s) {
        const auto z = logits_of(ws, s);
        const double mx = *std::max_element(z.begin(), z.end());
        double sum = 0;
        for (double v : z) sum += std::exp(v - mx);
        const double lse = mx + std::log(sum);
        out.loss += lse - z[batch[s].label];
        out.correct += argmax(z) == batch[s].label;
        for (int k = 0; k < kNumClasses; ++k) {
            const double p = std::exp(z[k] - lse);
            dlogits[std::size_t(s) * kNumClasses + k] = (p - (k == batch[s].label)) / b;
        }
    }
    out.loss /= b;

    // fc2
    gemm_tn(ar.hidden, kNumClasses, b, ws.a.data(), dlogits.data(), grad(Param::fc2_w), true);
    for (int s = 0; s < b; ++s) {
        for (int k = 0; k < kNumClasses; ++k) grad(Param::fc2_b)[k] += dlogits[std::size_t(s) * kNumClasses + k];
    }
    const auto w4t = transpose(m.tensor(Param::fc2_w), ar.hidden, kNumClasses);
    std::vector<double> dh(std::size_t(b) * ar.hidden);
    gemm_nn(b, ar.hidden, kNumClasses, dlogits.data(), w4t.data(), dh.data(), false);
    for (std::size_t i = 0; i < dh.size(); ++i) {
        if (ws.h[i] <= 0) dh[i] = 0;
    }

    // fc1
    gemm_tn(ar.flat(), ar.hidden, b, ws.x.data(), dh.data(), grad(Param::fc1_w), true);
    for (int s = 0; s < b; ++s) {
        for (int k = 0; k < ar.hidden; ++k) grad(Param::fc1_b)[k] += dh[std::size_t(s) * ar.hidden + k];
    }
    const auto w3t = transpose(m.tensor(Param::fc1_w), ar.flat(), ar.hidden);
    std::vector<double> dx(std::size_t(b) * ar.flat());
    gemm_nn(b, ar.flat(), ar.hidden, dh.data(), w3t.data(), dx.data(), false);

    // Convolutional stages, one sample at a time.
    std::vector<double> dz2(std::size_t(ar.conv2) * ws.s2), dcol2(std::size_t(ws.k2) * ws.s2);
    std::vector<double> dp1(std::size_t(ar.conv1) * ws.s2), dz1(std::size_t(ar.conv1) * ws.s1);
    const double* w2 = m.tensor(Param::conv2_w).data();
    for (int s = 0; s < b; ++s) {
        const double* z2 = ws.z2.data() + std::size_t(s) * ar.conv2 * ws.s2;
        const double* z1 = ws.z1.data() + std::size_t(s) * ar.conv1 * ws.s1;
        const double* col2 = ws.col2.data() + std::size_t(s) * ws.k2 * ws.s2;
        const double* col1 = ws.col1.data() + std::size_t(s) * ws.k1 * ws.s1;
        const int* idx2 = ws.idx2.data() + std::size_t(s) * ar.flat();
        const int* idx1 = ws.idx1.data() + std::size_t(s) * ar.conv1 * ws.s2;
        const double* dxs = dx.data() + std::size_t(s) * ar.flat();

        std::fill(dz2.begin(), dz2.end(), 0.0);
        for (int j = 0; j < ar.flat(); ++j) {
            if (z2[idx2[j]] > 0) dz2[idx2[j]] += dxs[j];
        }
        for (int c = 0; c < ar.conv2; ++c) {
            const double* row = dz2.data() + std::size_t(c) * ws.s2;
            grad(Param::conv2_b)[c] += std::accumulate(row, row + ws.s2, 0.0);
        }
        accumulate_kernel_grad(dz2.data(), col2, ar.conv2, ws.s2, ws.k2, grad(Param::conv2_w));

        gemm_tn(ws.k2, ws.s2, ar.conv2, w2, dz2.data(), dcol2.data(), false);
        std::fill(dp1.begin(), dp1.end(), 0.0);
        col2im(dcol2.data(), ar.conv1, half, half, 3, 1, 1, dp1.data());

        std::fill(dz1.begin(), dz1.end(), 0.0);
        for (std::size_t j = 0; j < dp1.size(); ++j) {
            if (z1[idx1[j]] > 0) dz1[idx1[j]] += dp1[j];
        }
        for (int c = 0; c < ar.conv1; ++c) {
            const double* row = dz1.data() + std::size_t(c) * ws.s1;
            grad(Param::conv1_b)[c] += std::accumulate(row, row + ws.s1, 0.0);
        }
        accumulate_kernel_grad(dz1.data(), col1, ar.conv1, ws.s1, ws.k1, grad(Param::conv1_w));
    }
    (void)side;
    return out;
}

void sgd_step(CharModel& m, std::span<const double> grads, std::vector<double>& velocity, double lr,
              double momentum)
{
    auto w = m.params();
    ANPR_CHECK(grads.size() == w.size(), "gradient shape does not match the model");
    if (velocity.empty()) velocity.assign(w.size(), 0.0);
    ANPR_CHECK(velocity.size() == w.size(), "velocity shape does not match the model");
    for (std::size_t i = 0; i < w.size(); ++i) {
        velocity[i] = momentum * velocity[i] - lr * grads[i];
        w[i] += velocity[i];
    }
}

void TrainConfig::validate() const
{
    ANPR_CHECK(learning_rate > 0, "learning rate must be positive");
    ANPR_CHECK(momentum >= 0 && momentum < 1, "momentum must lie in [0,1)");
    ANPR_CHECK(epochs >= 0, "epochs must be non-negative");
    ANPR_CHECK(batch_size >= 1, "batch size must be at least 1");
}

TrainResult train(const CharModel& m, std::span<const LabeledSample> data, const TrainConfig& cfg)
{
    cfg.validate();
    ANPR_CHECK(!data.empty(), "training data must not be empty");

    TrainResult r{m, {}};
    Rng rng(cfg.seed);
    if (cfg.initialize) he_fill(r.model, rng);

    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> velocity(r.model.params().size(), 0.0);
    std::vector<LabeledSample> batch;
    for (int e = 1; e <= cfg.epochs; ++e) {
        rng.shuffle(order.begin(), order.end());
        double loss = 0;
        std::size_t correct = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            batch.clear();
            for (std::size_t i = start; i < end; ++i) batch.push_back(data[order[i]]);
            const auto lg = loss_and_gradients(r.model, batch);
            loss += lg.loss * double(batch.size());
            correct += lg.correct;
            sgd_step(r.model, lg.grads, velocity, cfg.learning_rate, cfg.momentum);
        }
        r.log.push_back({e, loss / double(data.size()), double(correct) / double(data.size())});
        if (cfg.on_epoch && !cfg.on_epoch(r.log.back(), r.model)) break;
    }
    return r;
}

double accuracy(const CharModel& m, std::span<const LabeledSample> data)
{
    if (data.empty()) return 0.0;
    constexpr std::size_t kChunk = 64;
    std::size_t hits = 0;
    for (std::size_t start = 0; start < data.size(); start += kChunk) {
        const std::size_t end = std::min(data.size(), start + kChunk);
        Workspace ws(m.arch(), static_cast<int>(end - start));
        std::vector<const UnitImage*> in;
        for (std::size_t i = start; i < end; ++i) in.push_back(&data[i].image);
        forward_batch(m, in, ws);
        for (std::size_t i = start; i < end; ++i) {
            hits += argmax(logits_of(ws, static_cast<int>(i - start))) == data[i].label;
        }
    }
    return double(hits) / double(data.size());
}

std::string format_training_log(const std::vector<EpochStats>& log)
{
    std::string out = "epoch,loss,accuracy\n";
    char buf[96];
    for (const auto& e : log) {
        std::snprintf(buf, sizeof buf, "%d,%.6f,%.6f\n", e.epoch, e.loss, e.accuracy);
        out += buf;
    }
    return out;
}

namespace {

static_assert(std::endian::native == std::endian::little, "model format assumes little-endian");

template <typename T>
void put(std::string& out, T v)
{
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
}

template <typename T>
T take(std::string_view bytes, std::size_t& pos)
{
    ANPR_CHECK(bytes.size() - pos >= sizeof(T), "model stream is truncated");
    T v;
    std::memcpy(&v, bytes.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
}

}   // namespace

std::string save_model(const CharModel& m)
{
    std::string out(kModelMagic);
    const Architecture& a = m.arch();
    put<std::uint64_t>(out, a.hash());
    put<std::int32_t>(out, a.input_side);
    put<std::int32_t>(out, a.conv1);
    put<std::int32_t>(out, a.conv2);
    put<std::int32_t>(out, a.hidden);
    put<std::uint64_t>(out, m.params().size());
    for (double v : m.params()) put<float>(out, static_cast<float>(v));
    return out;
}

CharModel load_model(std::string_view bytes)
{
    ANPR_CHECK(bytes.size() >= kModelMagic.size() && bytes.substr(0, kModelMagic.size()) == kModelMagic,
               "not a character model (bad magic)");
    std::size_t pos = kModelMagic.size();
    const auto hash = take<std::uint64_t>(bytes, pos);
    Architecture a;
    a.input_side = take<std::int32_t>(bytes, pos);
    a.conv1 = take<std::int32_t>(bytes, pos);
    a.conv2 = take<std::int32_t>(bytes, pos);
    a.hidden = take<std::int32_t>(bytes, pos);
    ANPR_CHECK(a.input_side >= 4 && a.input_side % 4 == 0 && a.conv1 >= 1 && a.conv2 >= 1 &&
                   a.hidden >= 1 && a.input_side <= 4096 && a.conv1 <= 4096 && a.conv2 <= 4096 &&
                   a.hidden <= 65536,
               "model architecture fields are invalid");
    ANPR_CHECK(hash == a.hash(), "model architecture hash mismatch");
    const auto count = take<std::uint64_t>(bytes, pos);
    CharModel m(a);
    ANPR_CHECK(count == m.params().size(), "model parameter count does not match its architecture");
    ANPR_CHECK((bytes.size() - pos) / sizeof(float) >= count, "model stream is truncated");
    for (auto& v : m.params()) {
        v = take<float>(bytes, pos);
        ANPR_CHECK(std::isfinite(v), "model contains a non-finite parameter");
    }
    ANPR_CHECK(pos == bytes.size(), "model stream has trailing bytes");
    return m;
}

void write_model(const std::filesystem::path& path, const CharModel& m)
{
    write_file(path, save_model(m));
}

CharModel read_model(const std::filesystem::path& path)
{
    try {
        return load_model(read_file(path));
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

}   // anpr
