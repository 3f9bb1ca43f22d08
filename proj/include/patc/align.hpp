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

#ifndef PATC_ALIGN_HPP
#define PATC_ALIGN_HPP

#include <string>
#include <vector>

namespace patc::align {

enum class EditOp { KEEP, SUB, DEL, INS };

struct EditStep {
  EditOp op;
  int source_index;  // -1 for INS
  int target_index;  // -1 for DEL
};

// Minimal unit-cost edit script from source to target. Backtrace tie-break
// order is KEEP > SUB > INS > DEL, so paths are deterministic.
struct EditPath {
  std::vector<EditStep> steps;
  int total_cost = 0;
};

// Per-source-token signed edit tags.
//   1   keep the token
//   0   delete the token
//  -k   the token maps to k target tokens (k=1 substitution, k>=2 with
//       adjacent insertions attached)
// Invariant: sum of |tags| equals target_len.
struct TagSeq {
  std::vector<int> tags;
  int target_len = 0;
};

template <typename Seq>
EditPath edit_path(const Seq& src, const Seq& tgt);

extern template EditPath edit_path(const std::vector<int>&,
                                   const std::vector<int>&);
extern template EditPath edit_path(const std::vector<std::string>&,
                                   const std::vector<std::string>&);

// Unit-cost edit distance tolerant of empty sequences (used by metrics).
template <typename Seq>
int edit_distance(const Seq& a, const Seq& b);

extern template int edit_distance(const std::vector<int>&,
                                  const std::vector<int>&);
extern template int edit_distance(const std::vector<std::string>&,
                                  const std::vector<std::string>&);

// Which target indices each source token maps to. INS steps attach to the
// nearest preceding non-deleted source token (or the first non-deleted one
// for leading insertions).
std::vector<std::vector<int>> aligned_targets(const EditPath& path, int n);

TagSeq path_to_tags(const EditPath& path, int n);

// Drop / keep / duplicate source tokens per their tags. If every tag is 0 the
// first position is forced to 1 so the decoder input is never empty.
template <typename Seq>
Seq adjust_source(const Seq& src, const TagSeq& tags);

extern template std::vector<int> adjust_source(const std::vector<int>&,
                                               const TagSeq&);
extern template std::vector<std::string> adjust_source(
    const std::vector<std::string>&, const TagSeq&);

}  // namespace patc::align

#endif  // PATC_ALIGN_HPP
