/*
 * Copyright (c) 2026, The spandetect Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace spandetect::detail {

/// Row-major float vectors with precomputed L2 norms.
struct VectorTable {
  std::span<const float> data;
  std::span<const double> norms;
  std::size_t dim = 0;

  std::size_t size() const noexcept { return norms.size(); }
  std::span<const float> row(std::size_t i) const { return data.subspan(i * dim, dim); }
};

double dot(std::span<const double> query, std::span<const float> row) noexcept;

/// Cosine between a query (as doubles, with its norm) and table row `i`;
/// zero when either side is a zero vector.
double cosine_to_row(std::span<const double> query, double query_norm, const VectorTable& table,
                     std::size_t i) noexcept;

/// Single-layer navigable small world graph over cosine similarity.
/// Insertion order and neighbour selection are deterministic.
class NswGraph {
 public:
  NswGraph(const VectorTable& table, std::size_t max_degree, std::size_t ef_construction);

  /// Up to `ef` candidate rows, best first.
  std::vector<std::uint32_t> search(const VectorTable& table, std::span<const double> query,
                                    double query_norm, std::size_t ef) const;

  std::size_t size() const noexcept { return adjacency_.size(); }

 private:
  struct Scored {
    double sim;
    std::uint32_t id;
  };
  std::vector<Scored> beam(const VectorTable& table, std::span<const double> query, double query_norm,
                           std::size_t ef, std::size_t limit) const;

  std::vector<std::vector<std::uint32_t>> adjacency_;
  std::vector<std::uint32_t> entry_points_;
  std::size_t max_degree_;
};

}  // namespace spandetect::detail
