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

#include "nsw_index.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace spandetect::detail {

double dot(std::span<const double> query, std::span<const float> row) noexcept {
  // Four fixed partial sums: a defined summation order that still pipelines.
  double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
  const std::size_t n = query.size();
  std::size_t d = 0;
  for (; d + 4 <= n; d += 4) {
    a0 += query[d] * row[d];
    a1 += query[d + 1] * row[d + 1];
    a2 += query[d + 2] * row[d + 2];
    a3 += query[d + 3] * row[d + 3];
  }
  for (; d < n; ++d) a0 += query[d] * row[d];
  return (a0 + a1) + (a2 + a3);
}

double cosine_to_row(std::span<const double> query, double query_norm, const VectorTable& table,
                     std::size_t i) noexcept {
  const double norm = table.norms[i];
  if (query_norm == 0.0 || norm == 0.0) return 0.0;
  return std::clamp(dot(query, table.row(i)) / (query_norm * norm), -1.0, 1.0);
}

namespace {

struct Better {
  template <typename T>
  bool operator()(const T& a, const T& b) const {
    return a.sim > b.sim || (a.sim == b.sim && a.id < b.id);
  }
};
struct Worse {
  template <typename T>
  bool operator()(const T& a, const T& b) const {
    return Better{}(b, a);
  }
};

}  // namespace

std::vector<NswGraph::Scored> NswGraph::beam(const VectorTable& table, std::span<const double> query,
                                             double query_norm, std::size_t ef,
                                             std::size_t limit) const {
  std::vector<char> visited(limit, 0);
  // `frontier` pops the best candidate; `found` keeps the ef best, worst on top.
  std::priority_queue<Scored, std::vector<Scored>, Worse> frontier;
  std::priority_queue<Scored, std::vector<Scored>, Better> found;

  auto consider = [&](std::uint32_t id) {
    if (id >= limit || visited[id]) return;
    visited[id] = 1;
    const Scored s{cosine_to_row(query, query_norm, table, id), id};
    if (found.size() < ef || Better{}(s, found.top())) {
      frontier.push(s);
      found.push(s);
      if (found.size() > ef) found.pop();
    }
  };

  if (limit == 0) return {};
  consider(0);
  for (std::uint32_t e : entry_points_) consider(e);

  while (!frontier.empty()) {
    const Scored cur = frontier.top();
    frontier.pop();
    if (found.size() >= ef && Better{}(found.top(), cur)) break;
    for (std::uint32_t next : adjacency_[cur.id]) consider(next);
  }

  std::vector<Scored> out;
  out.reserve(found.size());
  while (!found.empty()) {
    out.push_back(found.top());
    found.pop();
  }
  std::reverse(out.begin(), out.end());
  return out;
}

NswGraph::NswGraph(const VectorTable& table, std::size_t max_degree, std::size_t ef_construction)
    : adjacency_(table.size()), max_degree_(std::max<std::size_t>(max_degree, 1)) {
  const std::size_t n = table.size();
  const std::size_t max_list = 2 * max_degree_;
  std::vector<double> q(table.dim);
  for (std::size_t i = 1; i < n; ++i) {
    const auto row = table.row(i);
    std::copy(row.begin(), row.end(), q.begin());
    const auto near = beam(table, q, table.norms[i], std::max(ef_construction, max_degree_), i);
    const std::size_t links = std::min(max_degree_, near.size());
    for (std::size_t j = 0; j < links; ++j) {
      const std::uint32_t other = near[j].id;
      adjacency_[i].push_back(other);
      auto& back = adjacency_[other];
      back.push_back(static_cast<std::uint32_t>(i));
      if (back.size() > max_list) {
        // Keep the closest links of `other`.
        const auto orow = table.row(other);
        std::vector<double> oq(orow.begin(), orow.end());
        std::vector<Scored> scored;
        scored.reserve(back.size());
        for (std::uint32_t b : back) scored.push_back({cosine_to_row(oq, table.norms[other], table, b), b});
        std::sort(scored.begin(), scored.end(), Better{});
        back.clear();
        for (std::size_t k = 0; k < max_list; ++k) back.push_back(scored[k].id);
      }
    }
  }
  for (std::size_t part = 1; part < 4; ++part) {
    const std::size_t e = part * n / 4;
    if (e > 0 && e < n) entry_points_.push_back(static_cast<std::uint32_t>(e));
  }
}

std::vector<std::uint32_t> NswGraph::search(const VectorTable& table, std::span<const double> query,
                                            double query_norm, std::size_t ef) const {
  const auto scored = beam(table, query, query_norm, std::max<std::size_t>(ef, 1), adjacency_.size());
  std::vector<std::uint32_t> ids;
  ids.reserve(scored.size());
  for (const auto& s : scored) ids.push_back(s.id);
  return ids;
}

}  // namespace spandetect::detail
