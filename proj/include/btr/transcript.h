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

#ifndef BTR_TRANSCRIPT_H_
#define BTR_TRANSCRIPT_H_

#include <cstddef>
#include <string>
#include <vector>

#include "json.hpp"

namespace btr {

struct TurnPair {
  int index = 0;  // 1-based
  std::string interviewer_message;
  std::string applicant_message;

  bool operator==(const TurnPair&) const = default;
};

// Resume (x0) plus the interview turns x1..xt, contiguously indexed from 1.
class Transcript {
 public:
  Transcript() = default;
  explicit Transcript(std::string resume_text);
  // Throws Error(kInvalidArgument) on gaps, out-of-order indices or empty
  // messages.
  Transcript(std::string resume_text, std::vector<TurnPair> turns);

  const std::string& resume_text() const { return resume_text_; }
  const std::vector<TurnPair>& turns() const { return turns_; }
  std::size_t size() const { return turns_.size(); }

  // Appends the next turn, assigning index size()+1.
  void append(std::string interviewer_message, std::string applicant_message);

  // The first n turns (same resume).
  Transcript prefix(std::size_t n) const;

  bool operator==(const Transcript&) const = default;

 private:
  std::string resume_text_;
  std::vector<TurnPair> turns_;
};

// {"resume": string, "turns": [{"index", "interviewer", "applicant"}]}
nlohmann::ordered_json transcript_to_json(const Transcript& transcript);
Transcript transcript_from_json(const nlohmann::json& j);

nlohmann::ordered_json turn_to_json(const TurnPair& turn);
TurnPair turn_from_json(const nlohmann::json& j);

// "Interviewer: ...\nApplicant: ..." blocks with turn headers; "(none)" when
// the range is empty. Renders turns [first, last) by 0-based position.
std::string render_turns(const Transcript& transcript, std::size_t first,
                         std::size_t last);

}  // namespace btr

#endif  // BTR_TRANSCRIPT_H_
