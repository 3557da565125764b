// Copyright 2026-present the zshash project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

namespace zshash::defaults {

// Label-mismatch penalty of the anchor clustering objective.
inline constexpr double kBeta = 0.9;

// Number of nearest anchors kept when embedding an instance.
inline constexpr int kTopS = 5;

// Base of the rank boost applied to the kept anchor weights.
inline constexpr double kOmega = 5.0;

// Hamming lookup radius used by the retrieval metrics.
inline constexpr int kRadius = 2;

inline constexpr int kKmeansMaxIter = 300;
inline constexpr double kKmeansTol = 1e-7;

// Diagonal loading factor for the local Gram systems in LLE,
// as a fraction of trace(G)/k.
inline constexpr double kLleRegularizer = 1e-3;

// Neighborhood size for the graph embedders, clamped to n - 1.
inline constexpr int kEmbedderNeighbors = 5;

struct ZslPreset {
    double gamma;
    double lambda;
};

inline constexpr ZslPreset kAwaPreset{10.0, 100.0};
inline constexpr ZslPreset kSunPreset{0.01, 1.0};

inline constexpr double kQueryFraction = 0.25;

}  // namespace zshash::defaults
