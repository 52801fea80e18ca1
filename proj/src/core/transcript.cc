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

#include "btr/transcript.h"

#include <sstream>

#include "btr/error.h"

namespace btr {
namespace {

void check_turn(const TurnPair& turn, int expected_index) {
  if (turn.index != expected_index) {
    throw Error(ErrorCode::kInvalidArgument,
                "turn index " + std::to_string(turn.index) + ", expected " +
                    std::to_string(expected_index));
  }
  if (turn.interviewer_message.empty() || turn.applicant_message.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "turn " + std::to_string(turn.index) + " has an empty message");
  }
}

}  // namespace

Transcript::Transcript(std::string resume_text)
    : resume_text_(std::move(resume_text)) {}

Transcript::Transcript(std::string resume_text, std::vector<TurnPair> turns)
    : resume_text_(std::move(resume_text)), turns_(std::move(turns)) {
  for (std::size_t i = 0; i < turns_.size(); ++i) {
    check_turn(turns_[i], static_cast<int>(i) + 1);
  }
}

void Transcript::append(std::string interviewer_message,
                        std::string applicant_message) {
  TurnPair turn{static_cast<int>(turns_.size()) + 1,
                std::move(interviewer_message), std::move(applicant_message)};
  check_turn(turn, turn.index);
  turns_.push_back(std::move(turn));
}

Transcript Transcript::prefix(std::size_t n) const {
  if (n > turns_.size()) {
    throw Error(ErrorCode::kOutOfRange,
                "prefix of " + std::to_string(n) + " turns from a transcript of " +
                    std::to_string(turns_.size()));
  }
  return Transcript(resume_text_,
                    std::vector<TurnPair>(turns_.begin(),
                                          turns_.begin() + static_cast<long>(n)));
}

nlohmann::ordered_json turn_to_json(const TurnPair& turn) {
  nlohmann::ordered_json j;
  j["index"] = turn.index;
  j["interviewer"] = turn.interviewer_message;
  j["applicant"] = turn.applicant_message;
  return j;
}

TurnPair turn_from_json(const nlohmann::json& j) {
  try {
    return TurnPair{j.at("index").get<int>(),
                    j.at("interviewer").get<std::string>(),
                    j.at("applicant").get<std::string>()};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("turn: ") + e.what());
  }
}

nlohmann::ordered_json transcript_to_json(const Transcript& transcript) {
  nlohmann::ordered_json j;
  j["resume"] = transcript.resume_text();
  j["turns"] = nlohmann::ordered_json::array();
  for (const auto& turn : transcript.turns()) j["turns"].push_back(turn_to_json(turn));
  return j;
}

Transcript transcript_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("resume") || !j.at("resume").is_string()) {
    throw Error(ErrorCode::kParse, "transcript: missing \"resume\"");
  }
  std::vector<TurnPair> turns;
  if (j.contains("turns")) {
    if (!j.at("turns").is_array()) {
      throw Error(ErrorCode::kParse, "transcript: \"turns\" is not an array");
    }
    for (const auto& t : j.at("turns")) turns.push_back(turn_from_json(t));
  }
  return Transcript(j.at("resume").get<std::string>(), std::move(turns));
}

std::string render_turns(const Transcript& transcript, std::size_t first,
                         std::size_t last) {
  if (first >= last || first >= transcript.size()) return "(none)\n";
  std::ostringstream out;
  for (std::size_t i = first; i < last && i < transcript.size(); ++i) {
    const auto& turn = transcript.turns()[i];
    out << "[Turn " << turn.index << "]\n"
        << "Interviewer: " << turn.interviewer_message << "\n"
        << "Applicant: " << turn.applicant_message << "\n";
  }
  return out.str();
}

}  // namespace btr
