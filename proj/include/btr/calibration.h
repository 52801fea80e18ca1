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

// Metamorphic calibration of a judge: inject one controlled interview turn
// and check that the belief moves (or stays) the way the turn warrants.

#ifndef BTR_CALIBRATION_H_
#define BTR_CALIBRATION_H_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "btr/belief.h"
#include "btr/judge.h"
#include "btr/llm/backends.h"
#include "btr/rubric.h"
#include "btr/transcript.h"
#include "json.hpp"

namespace btr::calibration {

enum class Regimen { kResumeOnly, kResumePlusStub };

enum class TestClass {
  kAggrandising,
  kIrrelevance,
  kRepetition,
  kLowAdd,
  kMediumAdd,
  kHighAdd,
  kLowDebase,
  kMediumDebase,
  kHighDebase,
};

enum class DebasementType {
  kContextInvalidation,
  kNegativeInferenceClarification,
  kRigourDowngrade,
  kScopeDowngrade,
};

// invariant:  max_{d,l} |delta_d(l)| <= eps
// increase:   delta_{d*}(l*) >  eps
// decrease:   delta_{d*}(l*) < -eps
// uniform:    ||p_inj - uniform||_inf <= eps
enum class Relation { kInvariant, kIncrease, kDecrease, kUniformLinf };

std::string_view regimen_name(Regimen r);
Regimen parse_regimen(std::string_view name);
std::string_view test_class_name(TestClass c);
TestClass parse_test_class(std::string_view name);
std::string_view debasement_name(DebasementType t);
DebasementType parse_debasement(std::string_view name);
std::string_view relation_name(Relation r);

const std::vector<TestClass>& all_test_classes();
Relation relation_for(TestClass c);
bool is_targeted(TestClass c);
// Level a targeted class must point at: low 1, medium (L+1)/2, high L; 0 for
// invariant classes.
int class_level(TestClass c, int num_levels);
bool is_debase(TestClass c);

struct Target {
  std::string dimension;
  int level = 1;  // 1-based

  bool operator==(const Target&) const = default;
};

struct MetamorphicCase {
  std::string id;
  std::string resume_id;
  std::string rubric_id;
  Regimen regimen = Regimen::kResumeOnly;
  std::optional<std::vector<TurnPair>> stub;
  // Its index is rewritten to stub length + 1 when the case runs.
  TurnPair injected_turn;
  TestClass test_class = TestClass::kIrrelevance;
  std::optional<Target> target;
  std::optional<DebasementType> debasement_type;
};

// Throws Error(kInvalidArgument) naming the first broken invariant.
void validate_case(const MetamorphicCase& c);

nlohmann::ordered_json case_to_json(const MetamorphicCase& c);
MetamorphicCase case_from_json(const nlohmann::json& j);

struct UniformPriorCase {
  std::string id;
  std::string resume_id;
  std::string rubric_id;
  std::string source_rubric_id;
  Dimension injected_dimension;
};

nlohmann::ordered_json uniform_case_to_json(const UniformPriorCase& c);
UniformPriorCase uniform_case_from_json(const nlohmann::json& j);

struct CaseResult {
  std::string case_id;
  bool pass = false;
  Relation relation = Relation::kInvariant;
  // delta[d][l] = p+ - p-; for uniform-prior cases, the deviation of the
  // injected dimension from uniform (a single row).
  std::vector<Distribution> observed_delta;
  // max |delta| for invariant/uniform relations, delta at the target otherwise.
  double statistic = 0.0;
};

// Pure relation check over two belief states. target is required for
// increase/decrease classes (0-based dimension index, 1-based level).
struct TargetIndex {
  std::size_t dimension = 0;
  int level = 1;
};

CaseResult evaluate_relation(const std::vector<Distribution>& p_minus,
                             const std::vector<Distribution>& p_plus, TestClass test_class,
                             std::optional<TargetIndex> target, double epsilon);

// ||p - uniform||_inf <= epsilon over the given distribution.
CaseResult evaluate_uniform(const Distribution& p, double epsilon);

// Everything needed to run cases: rubrics and resume texts by id.
struct CorpusIndex {
  std::map<std::string, Rubric> rubrics;
  std::map<std::string, std::string> resumes;  // resume id -> text
};

class Harness {
 public:
  Harness(const judge::Judge& judge, const CorpusIndex& corpus)
      : judge_(judge), corpus_(corpus) {}

  // Computes p- on resume [+ stub] and p+ after appending the injected turn.
  CaseResult run_case(const MetamorphicCase& c, judge::PolicyKind policy,
                      double epsilon) const;

  CaseResult run_uniform_prior_case(const UniformPriorCase& c, judge::PolicyKind policy,
                                    double epsilon) const;

 private:
  const judge::Judge& judge_;
  const CorpusIndex& corpus_;
};

// Authored source for one resume: its text, interview stub and one injected
// turn per test class.
struct ResumeSource {
  std::string id;
  std::string rubric_id;
  std::string resume;
  std::vector<TurnPair> stub;
  struct Injection {
    TurnPair turn;
    std::optional<Target> target;
    std::optional<DebasementType> debasement_type;
  };
  std::map<TestClass, Injection> injections;
};

ResumeSource resume_source_from_json(const nlohmann::json& j);
nlohmann::ordered_json resume_source_to_json(const ResumeSource& source);

// One case per (resume, regimen, class): |resumes| x 2 x 9.
std::vector<MetamorphicCase> generate_cases(const std::vector<ResumeSource>& sources);

// One uniform-prior case per resume; the injected dimension comes from the
// first rubric (by id) of a different domain, picked by resume position.
std::vector<UniformPriorCase> generate_uniform_cases(
    const std::vector<ResumeSource>& sources, const std::map<std::string, Rubric>& rubrics);

// Corpus directory:
//   rubrics/*.json      rubric documents
//   resumes/*.json      ResumeSource documents
//   cases/*.json        optional pre-generated MetamorphicCase files
//   uniform/*.json      optional pre-generated UniformPriorCase files
struct Corpus {
  CorpusIndex index;
  std::vector<ResumeSource> sources;
  std::vector<MetamorphicCase> cases;
  std::vector<UniformPriorCase> uniform_cases;
};

// Generates cases from resumes/ when cases/ (or uniform/) is absent.
Corpus load_corpus(const std::filesystem::path& dir);
void write_generated_cases(const Corpus& corpus, const std::filesystem::path& dir);

struct SuiteRow {
  std::string judge;
  std::string test_class;  // class name or "uniform_prior"
  std::string stratum;     // "all", "regimen=...", "domain=...", "debasement=..."
  long passes = 0;
  long total = 0;

  double rate() const { return total ? static_cast<double>(passes) / static_cast<double>(total) : 0.0; }
};

struct SuiteReport {
  std::vector<SuiteRow> rows;
  std::vector<std::pair<std::string, CaseResult>> results;  // (judge, result)
  long errored = 0;
  std::vector<std::string> errors;
};

struct SuiteOptions {
  double epsilon = judge::kDefaultEpsilon;
  int max_parallel = 4;
};

// Runs every case under every policy and aggregates pass rates per (judge,
// class) and per stratum. Cases whose judge call fails are counted in
// `errored` and excluded from the rates.
SuiteReport run_suite(const Harness& harness, const Corpus& corpus,
                      const std::vector<judge::PolicyKind>& policies,
                      const SuiteOptions& options);

// "judge,class,stratum,passes,total,rate" with the exact fraction as rate.
std::string report_csv(const SuiteReport& report);
// Pass rates in rounded percent, one row per class and stratum.
std::string render_report_table(const SuiteReport& report,
                                 const std::vector<judge::PolicyKind>& policies);

// Scripted judge responses that satisfy every relation by construction. Each
// resume gets a fixed belief centred on the middle level; the injected turn
// moves `shift` mass onto (increase) or off (decrease) the target level and
// leaves invariant cases untouched. Uniform-prior cases get an exactly
// uniform injected dimension. Intended for demos and harness tests.
std::shared_ptr<llm::ScriptedBackend> build_ideal_judge_script(const Corpus& corpus,
                                                               double shift = 0.2);

}  // namespace btr::calibration

#endif  // BTR_CALIBRATION_H_
