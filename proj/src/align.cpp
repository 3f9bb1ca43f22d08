// Copyright (c) 2026 patcorrect-cpp authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "patc/align.hpp"

#include <algorithm>
#include <stdexcept>

namespace patc::align {

template <typename Seq>
EditPath edit_path(const Seq& src, const Seq& tgt) {
  const int n = static_cast<int>(src.size());
  const int m = static_cast<int>(tgt.size());
  if (n == 0) {
    throw std::invalid_argument("edit_path: source sequence is empty");
  }
  std::vector<std::vector<int>> dist(n + 1, std::vector<int>(m + 1, 0));
  for (int i = 0; i <= n; ++i) dist[i][0] = i;
  for (int j = 0; j <= m; ++j) dist[0][j] = j;
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= m; ++j) {
      const int sub = dist[i - 1][j - 1] + (src[i - 1] == tgt[j - 1] ? 0 : 1);
      const int ins = dist[i][j - 1] + 1;
      const int del = dist[i - 1][j] + 1;
      dist[i][j] = std::min({sub, ins, del});
    }
  }
  EditPath path;
  path.total_cost = dist[n][m];
  std::vector<EditStep> rev;
  int i = n, j = m;
  // KEEP > SUB > INS > DEL
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && src[i - 1] == tgt[j - 1] &&
        dist[i][j] == dist[i - 1][j - 1]) {
      rev.push_back({EditOp::KEEP, i - 1, j - 1});
      --i, --j;
    } else if (i > 0 && j > 0 && dist[i][j] == dist[i - 1][j - 1] + 1) {
      rev.push_back({EditOp::SUB, i - 1, j - 1});
      --i, --j;
    } else if (j > 0 && dist[i][j] == dist[i][j - 1] + 1) {
      rev.push_back({EditOp::INS, -1, j - 1});
      --j;
    } else {
      rev.push_back({EditOp::DEL, i - 1, -1});
      --i;
    }
  }
  path.steps.assign(rev.rbegin(), rev.rend());
  return path;
}

template EditPath edit_path(const std::vector<int>&, const std::vector<int>&);
template EditPath edit_path(const std::vector<std::string>&,
                            const std::vector<std::string>&);

template <typename Seq>
int edit_distance(const Seq& a, const Seq& b) {
  const int n = static_cast<int>(a.size());
  const int m = static_cast<int>(b.size());
  std::vector<int> prev(m + 1), cur(m + 1);
  for (int j = 0; j <= m; ++j) prev[j] = j;
  for (int i = 1; i <= n; ++i) {
    cur[0] = i;
    for (int j = 1; j <= m; ++j) {
      cur[j] = std::min({prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1),
                         cur[j - 1] + 1, prev[j] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

template int edit_distance(const std::vector<int>&, const std::vector<int>&);
template int edit_distance(const std::vector<std::string>&,
                           const std::vector<std::string>&);

std::vector<std::vector<int>> aligned_targets(const EditPath& path, int n) {
  std::vector<std::vector<int>> targets(n);
  std::vector<bool> deleted(n, false);
  int covered = 0;
  for (const auto& s : path.steps) {
    if (s.op == EditOp::DEL) {
      if (s.source_index < 0 || s.source_index >= n) {
        throw std::logic_error("aligned_targets: path source index out of range");
      }
      deleted[s.source_index] = true;
      ++covered;
    } else if (s.op != EditOp::INS) {
      ++covered;
    }
  }
  if (covered != n) {
    throw std::logic_error("aligned_targets: path covers " +
                           std::to_string(covered) + " source tokens, expected " +
                           std::to_string(n));
  }
  int first_survivor = -1;
  for (int i = 0; i < n; ++i) {
    if (!deleted[i]) {
      first_survivor = i;
      break;
    }
  }
  int anchor = -1;
  for (const auto& s : path.steps) {
    switch (s.op) {
      case EditOp::KEEP:
      case EditOp::SUB:
        targets[s.source_index].push_back(s.target_index);
        anchor = s.source_index;
        break;
      case EditOp::INS: {
        const int at = anchor >= 0 ? anchor : first_survivor;
        if (at < 0) {
          throw std::logic_error(
              "aligned_targets: insertion with no surviving source token");
        }
        targets[at].push_back(s.target_index);
        break;
      }
      case EditOp::DEL:
        break;
    }
  }
  for (auto& t : targets) std::sort(t.begin(), t.end());
  return targets;
}

TagSeq path_to_tags(const EditPath& path, int n) {
  auto targets = aligned_targets(path, n);
  std::vector<bool> kept(n, false);
  int target_len = 0;
  for (const auto& s : path.steps) {
    if (s.op == EditOp::KEEP) kept[s.source_index] = true;
    if (s.op != EditOp::DEL) ++target_len;
  }
  TagSeq out;
  out.target_len = target_len;
  out.tags.resize(n);
  for (int i = 0; i < n; ++i) {
    const int k = static_cast<int>(targets[i].size());
    if (k == 0) {
      out.tags[i] = 0;
    } else if (k == 1 && kept[i]) {
      out.tags[i] = 1;
    } else {
      out.tags[i] = -k;
    }
  }
  return out;
}

template <typename Seq>
Seq adjust_source(const Seq& src, const TagSeq& tags) {
  if (src.size() != tags.tags.size()) {
    throw std::invalid_argument("adjust_source: " + std::to_string(src.size()) +
                                " tokens vs " + std::to_string(tags.tags.size()) +
                                " tags");
  }
  std::vector<int> t = tags.tags;
  const bool all_zero = std::all_of(t.begin(), t.end(), [](int v) { return v == 0; });
  if (all_zero && !t.empty()) t[0] = 1;
  Seq out;
  for (size_t i = 0; i < src.size(); ++i) {
    const int reps = std::abs(t[i]);
    for (int r = 0; r < reps; ++r) out.push_back(src[i]);
  }
  return out;
}

template std::vector<int> adjust_source(const std::vector<int>&, const TagSeq&);
template std::vector<std::string> adjust_source(const std::vector<std::string>&,
                                                const TagSeq&);

}  // namespace patc::align
