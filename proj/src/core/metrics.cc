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

#include "btr/metrics.h"

#include <algorithm>
#include <cmath>

#include "btr/error.h"

namespace btr::metrics {

double tv(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "tv: length mismatch " + std::to_string(p.size()) + " vs " +
                    std::to_string(q.size()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) sum += std::abs(p[i] - q[i]);
  return 0.5 * sum;
}

double mean_shift(const BeliefState& prev, const BeliefState& next) {
  if (prev.posteriors.size() != next.posteriors.size() || prev.posteriors.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "mean_shift: belief states do not share a rubric");
  }
  if (next.turn != prev.turn + 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "mean_shift: non-consecutive turns " + std::to_string(prev.turn) +
                    " -> " + std::to_string(next.turn));
  }
  double sum = 0.0;
  for (std::size_t d = 0; d < prev.posteriors.size(); ++d) {
    sum += tv(next.posteriors[d], prev.posteriors[d]);
  }
  return sum / static_cast<double>(prev.posteriors.size());
}

ShiftSeries shift_series(std::span<const BeliefState> log) {
  ShiftSeries out;
  for (std::size_t t = 1; t < log.size(); ++t) {
    out.push_back(mean_shift(log[t - 1], log[t]));
  }
  return out;
}

double ctv(std::span<const ShiftSeries> series, int t) {
  if (series.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "ctv: empty profile set");
  }
  if (t < 1) throw Error(ErrorCode::kOutOfRange, "ctv: turn must be >= 1");
  double total = 0.0;
  for (const auto& s : series) {
    if (s.size() < static_cast<std::size_t>(t)) {
      throw Error(ErrorCode::kOutOfRange,
                  "ctv: series of length " + std::to_string(s.size()) +
                      " shorter than t=" + std::to_string(t));
    }
    // Same accumulation order as ctv_curve, so both agree bit for bit and
    // the result is monotone in t under floating-point rounding.
    double running = 0.0;
    for (int u = 0; u < t; ++u) running += s[static_cast<std::size_t>(u)];
    total += running;
  }
  return total / static_cast<double>(series.size());
}

std::vector<double> ctv_curve(std::span<const ShiftSeries> series) {
  if (series.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "ctv: empty profile set");
  }
  std::size_t horizon = series.front().size();
  for (const auto& s : series) horizon = std::min(horizon, s.size());
  // Running sums keep the curve exactly non-decreasing.
  std::vector<double> curve(horizon, 0.0);
  for (const auto& s : series) {
    double running = 0.0;
    for (std::size_t u = 0; u < horizon; ++u) {
      running += s[u];
      curve[u] += running;
    }
  }
  for (auto& v : curve) v /= static_cast<double>(series.size());
  return curve;
}

std::vector<int> map_profile(const BeliefState& belief) {
  std::vector<int> levels;
  levels.reserve(belief.posteriors.size());
  for (const auto& p : belief.posteriors) {
    // max_element returns the first maximum, i.e. the lowest level on ties.
    const auto it = std::max_element(p.begin(), p.end());
    levels.push_back(static_cast<int>(it - p.begin()) + 1);
  }
  return levels;
}

int hamming(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kInvalidArgument, "level vectors differ in length");
  }
  int n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) n += a[i] != b[i];
  return n;
}

const ArchetypeProfile& recover_archetype(std::span<const int> map_levels,
                                          std::span<const ArchetypeProfile> archetypes) {
  if (archetypes.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "recover_archetype: empty archetype set");
  }
  const ArchetypeProfile* best = nullptr;
  int best_distance = 0;
  for (const auto& a : archetypes) {
    const int dist = hamming(map_levels, a.levels);
    if (!best || dist < best_distance ||
        (dist == best_distance && a.id < best->id)) {
      best = &a;
      best_distance = dist;
    }
  }
  return *best;
}

RecoveryReport recovery_report(const std::map<std::string, BeliefState>& final_beliefs,
                               const std::map<std::string, ArchetypeProfile>& truths,
                               std::span<const ArchetypeProfile> archetypes) {
  if (final_beliefs.size() != truths.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "recovery_report: " + std::to_string(final_beliefs.size()) +
                    " beliefs vs " + std::to_string(truths.size()) + " truths");
  }
  if (archetypes.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "recovery_report: empty archetype set");
  }

  RecoveryReport report;
  std::vector<const ArchetypeProfile*> sorted;
  for (const auto& a : archetypes) sorted.push_back(&a);
  std::sort(sorted.begin(), sorted.end(),
            [](const auto* x, const auto* y) { return x->id < y->id; });
  std::map<std::string, std::size_t> label_index;
  for (const auto* a : sorted) {
    label_index.emplace(a->id, report.confusion_labels.size());
    report.confusion_labels.push_back(a->id);
  }
  const auto n = report.confusion_labels.size();
  report.confusion.assign(n, std::vector<long>(n, 0));

  std::size_t levels = 0;
  for (const auto& [profile_id, belief] : final_beliefs) {
    const auto truth_it = truths.find(profile_id);
    if (truth_it == truths.end()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "recovery_report: no truth for profile " + profile_id);
    }
    const auto& truth = truth_it->second;
    const auto true_row = label_index.find(truth.id);
    if (true_row == label_index.end()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "recovery_report: true archetype " + truth.id +
                      " is not in the archetype set");
    }
    if (levels == 0 && !belief.posteriors.empty()) {
      levels = belief.posteriors.front().size();
      report.level_misclassification.assign(levels, std::vector<long>(levels, 0));
    }
    const auto map_levels = map_profile(belief);
    const auto& predicted = recover_archetype(map_levels, archetypes);
    report.predictions[profile_id] = predicted.id;
    report.confusion[true_row->second][label_index.at(predicted.id)] += 1;
    report.total += 1;
    if (predicted.id == truth.id) report.correct += 1;

    if (truth.levels.size() != map_levels.size()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "recovery_report: truth/belief dimension mismatch for " + profile_id);
    }
    for (std::size_t d = 0; d < map_levels.size(); ++d) {
      const auto a = static_cast<std::size_t>(truth.levels[d] - 1);
      const auto b = static_cast<std::size_t>(map_levels[d] - 1);
      if (a >= levels || b >= levels) {
        throw Error(ErrorCode::kInvalidArgument,
                    "recovery_report: level out of range for " + profile_id);
      }
      report.level_misclassification[a][b] += 1;
    }
  }
  report.recovery_rate =
      report.total ? static_cast<double>(report.correct) / static_cast<double>(report.total)
                   : 0.0;
  return report;
}

RecoveryReport pool_reports(const std::map<std::string, RecoveryReport>& groups) {
  RecoveryReport pooled;
  std::size_t offset = 0;
  std::size_t total_labels = 0;
  for (const auto& [_, r] : groups) total_labels += r.confusion_labels.size();
  pooled.confusion.assign(total_labels, std::vector<long>(total_labels, 0));
  for (const auto& [group, r] : groups) {
    for (const auto& label : r.confusion_labels) {
      pooled.confusion_labels.push_back(group + ":" + label);
    }
    for (std::size_t i = 0; i < r.confusion.size(); ++i) {
      for (std::size_t j = 0; j < r.confusion[i].size(); ++j) {
        pooled.confusion[offset + i][offset + j] = r.confusion[i][j];
      }
    }
    offset += r.confusion_labels.size();
    for (const auto& [profile, predicted] : r.predictions) {
      pooled.predictions[profile] = group + ":" + predicted;
    }
    if (!r.level_misclassification.empty()) {
      if (pooled.level_misclassification.empty()) {
        pooled.level_misclassification = r.level_misclassification;
      } else if (pooled.level_misclassification.size() !=
                 r.level_misclassification.size()) {
        throw Error(ErrorCode::kInvalidArgument,
                    "pool_reports: groups have different level counts");
      } else {
        for (std::size_t a = 0; a < r.level_misclassification.size(); ++a) {
          for (std::size_t b = 0; b < r.level_misclassification[a].size(); ++b) {
            pooled.level_misclassification[a][b] += r.level_misclassification[a][b];
          }
        }
      }
    }
    pooled.correct += r.correct;
    pooled.total += r.total;
  }
  pooled.recovery_rate =
      pooled.total ? static_cast<double>(pooled.correct) / static_cast<double>(pooled.total)
                   : 0.0;
  return pooled;
}

nlohmann::ordered_json recovery_report_to_json(const RecoveryReport& report) {
  nlohmann::ordered_json j;
  j["recovery_rate"] = report.recovery_rate;
  j["predictions"] = nlohmann::ordered_json::object();
  for (const auto& [profile, predicted] : report.predictions) {
    j["predictions"][profile] = predicted;
  }
  j["confusion"] = report.confusion;
  j["confusion_labels"] = report.confusion_labels;
  j["level_misclassification"] = report.level_misclassification;
  return j;
}

std::vector<double> level_frequency(std::span<const BeliefState> beliefs) {
  if (beliefs.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "level_frequency: empty input");
  }
  std::vector<double> counts;
  double total = 0.0;
  for (const auto& belief : beliefs) {
    for (const auto& p : belief.posteriors) {
      if (counts.empty()) counts.assign(p.size(), 0.0);
      if (p.size() != counts.size()) {
        throw Error(ErrorCode::kInvalidArgument,
                    "level_frequency: mixed level counts");
      }
    }
    for (int level : map_profile(belief)) {
      counts[static_cast<std::size_t>(level - 1)] += 1.0;
      total += 1.0;
    }
  }
  if (total == 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "level_frequency: no dimensions");
  }
  for (auto& c : counts) c /= total;
  return counts;
}

}  // namespace btr::metrics
