// Copyright 2026 The repstab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef REPSTAB_BLOSSOM_H
#define REPSTAB_BLOSSOM_H

#include <cstdint>
#include <vector>

namespace repstab {

struct WeightedEdge {
    int32_t u;
    int32_t v;
    int64_t w;
};

/// Maximum-weight matching on a general graph (Edmonds' blossom algorithm with
/// dual variables, O(n^3)). With `max_cardinality` the result is a
/// maximum-weight matching among the maximum-cardinality ones. Returns
/// mate[v], or -1 for unmatched vertices.
std::vector<int32_t> max_weight_matching(int32_t n_vertices, const std::vector<WeightedEdge> &edges,
                                         bool max_cardinality);

/// Minimum-weight perfect matching via max_weight_matching; throws
/// NumericError when no perfect matching exists.
std::vector<int32_t> min_weight_perfect_matching(int32_t n_vertices, const std::vector<WeightedEdge> &edges);

}  // namespace repstab

#endif  // REPSTAB_BLOSSOM_H
