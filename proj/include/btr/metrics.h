// Copyright 2026 The btr Authors.
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

#ifndef BTR_METRICS_H_
#define BTR_METRICS_H_

#include <map>
#include <span>
#include <string>
#include <vector>

#include "btr/belief.h"
#include "btr/rubric.h"
#include "json.hpp"

namespace btr::metrics {

// Fixed latent level assignment, one 1-based level per rubric dimension.
struct ArchetypeProfile {
  std::string id;
  std::vector<int> levels;

  bool operator==(const ArchetypeProfile&) const = default;
};

// Delta_1..Delta_T for one profile. Element 0 is Delta_1.
using ShiftSeries = std::vector<double>;

// Total variation distance: 0.5 * sum_l |p(l) - q(l)|.
double tv(std::span<const double> p, std::span<const double> q);

// Mean per-dimension TV between successive belief states. Requires
// next.turn == prev.turn + 1 and matching shapes.
double mean_shift(const BeliefState& prev, const BeliefState& next);

// Shift series for a belief log ordered by turn.
ShiftSeries shift_series(std::span<const BeliefState> log);

// Cumulative TV at turn t (1-based) averaged over profiles.
double ctv(std::span<const ShiftSeries> series, int t);

// CTV_1..CTV_T, where T is the shortest series length.
std::vector<double> ctv_curve(std::span<const ShiftSeries> series);

// Per-dimension argmax; ties go to the lower level. Levels are 1-based.
std::vector<int> map_profile(const BeliefState& belief);

// Number of dimensions on which two level vectors disagree.
int hamming(std::span<const int> a, std::span<const int> b);

// Nearest archetype by one-hot Frobenius distance (== sqrt(2 * Hamming));
// ties broken by lexicographically smallest id.
const ArchetypeProfile& recover_archetype(std::span<const int> map_levels,
                                          std::span<const ArchetypeProfile> archetypes);

struct RecoveryReport {
  std::map<std::string, std::string> predictions;  // profile id -> archetype id
  double recovery_rate = 0.0;
  std::vector<std::string> confusion_labels;
  // confusion[i][j]: profiles with true archetype labels[i] predicted labels[j].
  std::vector<std::vector<long>> confusion;
  // level_misclassification[a][b]: (profile, dimension) pairs with true level
  // a+1 and MAP level b+1.
  std::vector<std::vector<long>> level_misclassification;
  long correct = 0;
  long total = 0;
};

// Keys of final_beliefs and truths must match exactly.
RecoveryReport recovery_report(const std::map<std::string, BeliefState>& final_beliefs,
                               const std::map<std::string, ArchetypeProfile>& truths,
                               std::span<const ArchetypeProfile> archetypes);

// Concatenates per-group reports (e.g. one per rubric). Confusion labels are
// qualified "<group>:<archetype>" and the matrix is block diagonal. All groups
// must share L.
RecoveryReport pool_reports(const std::map<std::string, RecoveryReport>& groups);

nlohmann::ordered_json recovery_report_to_json(const RecoveryReport& report);

// Normalised MAP-level frequencies across all (belief, dimension) pairs.
std::vector<double> level_frequency(std::span<const BeliefState> beliefs);

// Figures measured against one proprietary model over 180 profiles x 12
// turns. Live-backend references only; nothing offline asserts against them.
namespace reference {
inline constexpr double kMeanShiftFirstTurn = 0.0621;
inline constexpr double kMeanShiftLastTurn = 0.0205;
inline constexpr double kRecoveryFinal = 0.761;
inline constexpr double kRecoveryResumeOnly = 0.167;
inline constexpr double kResumeOnlyLevelFrequency[3] = {0.39, 0.58, 0.04};
inline constexpr int kProfiles = 180;
inline constexpr int kTurns = 12;
}  // namespace reference

}  // namespace btr::metrics

#endif  // BTR_METRICS_H_
