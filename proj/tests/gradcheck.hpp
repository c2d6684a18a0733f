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


// Central finite-difference check of loss_and_gradients, shared by the unit
// and acceptance tests.

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "anpr/charnet.hpp"
#include "anpr/rng.hpp"

namespace gradcheck {

struct Report
{
    /// Worst relative error per parameter tensor.
    std::array<double, anpr::kParamTensors> worst{};
    std::size_t checked = 0;
};

inline std::vector<anpr::LabeledSample> random_batch(anpr::Rng& rng, int side, int n)
{
    std::vector<anpr::LabeledSample> batch;
    for (int i = 0; i < n; ++i) {
        anpr::UnitImage img(side, side);
        for (auto& v : img.pixels()) v = rng.uniform(0, 1);
        batch.push_back({std::move(img), static_cast<int>(rng.below(anpr::kNumClasses))});
    }
    return batch;
}

/// Relative error |a - n| / max(|a|, |n|), with an absolute floor so that
/// coordinates whose true gradient is zero are compared absolutely.
inline double relative_error(double a, double n)
{
    return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-6});
}

inline Report run(const anpr::CharModel& base, const std::vector<anpr::LabeledSample>& batch, double h = 1e-4)
{
    const auto analytic = anpr::loss_and_gradients(base, batch).grads;
    anpr::CharModel m = base;
    Report r;
    for (int t = 0; t < anpr::kParamTensors; ++t) {
        const auto off = m.layout().offset[t];
        for (std::size_t i = 0; i < m.layout().size[t]; ++i) {
            double& w = m.params()[off + i];
            const double saved = w;
            w = saved + h;
            const double up = anpr::loss_and_gradients(m, batch).loss;
            w = saved - h;
            const double down = anpr::loss_and_gradients(m, batch).loss;
            w = saved;
            const double numeric = (up - down) / (2 * h);
            r.worst[t] = std::max(r.worst[t], relative_error(analytic[off + i], numeric));
            ++r.checked;
        }
    }
    return r;
}

}   // namespace gradcheck
