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

#include "btr/calibration.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "btr/error.h"
#include "btr/io.h"

namespace btr::calibration {
namespace {

[[noreturn]] void invalid(const std::string& message) {
  throw Error(ErrorCode::kInvalidArgument, message);
}

template <typename Enum, std::size_t N>
Enum parse_enum(std::string_view name, const std::pair<Enum, std::string_view> (&table)[N],
                const char* what) {
  for (const auto& [value, label] : table) {
    if (label == name) return value;
  }
  throw Error(ErrorCode::kParse,
              std::string("unknown ") + what + " \"" + std::string(name) + "\"");
}

template <typename Enum, std::size_t N>
std::string_view enum_name(Enum value, const std::pair<Enum, std::string_view> (&table)[N]) {
  for (const auto& [v, label] : table) {
    if (v == value) return label;
  }
  return "unknown";
}

constexpr std::pair<Regimen, std::string_view> kRegimens[] = {
    {Regimen::kResumeOnly, "resume_only"},
    {Regimen::kResumePlusStub, "resume_plus_stub"},
};

constexpr std::pair<TestClass, std::string_view> kClasses[] = {
    {TestClass::kAggrandising, "aggrandising"}, {TestClass::kIrrelevance, "irrelevance"},
    {TestClass::kRepetition, "repetition"},     {TestClass::kLowAdd, "low_add"},
    {TestClass::kMediumAdd, "medium_add"},      {TestClass::kHighAdd, "high_add"},
    {TestClass::kLowDebase, "low_debase"},      {TestClass::kMediumDebase, "medium_debase"},
    {TestClass::kHighDebase, "high_debase"},
};

constexpr std::pair<DebasementType, std::string_view> kDebasements[] = {
    {DebasementType::kContextInvalidation, "context_invalidation"},
    {DebasementType::kNegativeInferenceClarification, "negative_inference_clarification"},
    {DebasementType::kRigourDowngrade, "rigour_downgrade"},
    {DebasementType::kScopeDowngrade, "scope_downgrade"},
};

constexpr std::pair<Relation, std::string_view> kRelations[] = {
    {Relation::kInvariant, "invariant"},
    {Relation::kIncrease, "increase"},
    {Relation::kDecrease, "decrease"},
    {Relation::kUniformLinf, "uniform_linf"},
};

constexpr std::string_view kUniformPriorClass = "uniform_prior";

nlohmann::ordered_json target_to_json(const std::optional<Target>& t) {
  if (!t) return nullptr;
  nlohmann::ordered_json j;
  j["dimension"] = t->dimension;
  j["level"] = t->level;
  return j;
}

std::optional<Target> target_from_json(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  const auto& t = j.at(key);
  return Target{t.at("dimension").get<std::string>(), t.at("level").get<int>()};
}

std::optional<DebasementType> debasement_from_json(const nlohmann::json& j) {
  if (!j.contains("debasement_type") || j.at("debasement_type").is_null()) {
    return std::nullopt;
  }
  return parse_debasement(j.at("debasement_type").get<std::string>());
}

std::string file_stem_for(const std::string& id) {
  std::string out;
  for (char c : id) out += (c == '/' ? '_' : c);
  return out;
}

std::vector<std::filesystem::path> json_files(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> out;
  if (!std::filesystem::is_directory(dir)) return out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::string_view regimen_name(Regimen r) { return enum_name(r, kRegimens); }
Regimen parse_regimen(std::string_view name) { return parse_enum(name, kRegimens, "regimen"); }
std::string_view test_class_name(TestClass c) { return enum_name(c, kClasses); }
TestClass parse_test_class(std::string_view name) {
  return parse_enum(name, kClasses, "test class");
}
std::string_view debasement_name(DebasementType t) { return enum_name(t, kDebasements); }
DebasementType parse_debasement(std::string_view name) {
  return parse_enum(name, kDebasements, "debasement type");
}
std::string_view relation_name(Relation r) { return enum_name(r, kRelations); }

const std::vector<TestClass>& all_test_classes() {
  static const std::vector<TestClass> classes = [] {
    std::vector<TestClass> out;
    for (const auto& [c, _] : kClasses) out.push_back(c);
    return out;
  }();
  return classes;
}

Relation relation_for(TestClass c) {
  switch (c) {
    case TestClass::kAggrandising:
    case TestClass::kIrrelevance:
    case TestClass::kRepetition: return Relation::kInvariant;
    case TestClass::kLowAdd:
    case TestClass::kMediumAdd:
    case TestClass::kHighAdd: return Relation::kIncrease;
    case TestClass::kLowDebase:
    case TestClass::kMediumDebase:
    case TestClass::kHighDebase: return Relation::kDecrease;
  }
  return Relation::kInvariant;
}

int class_level(TestClass c, int num_levels) {
  switch (c) {
    case TestClass::kLowAdd:
    case TestClass::kLowDebase: return 1;
    case TestClass::kMediumAdd:
    case TestClass::kMediumDebase: return (num_levels + 1) / 2;
    case TestClass::kHighAdd:
    case TestClass::kHighDebase: return num_levels;
    default: return 0;
  }
}

bool is_targeted(TestClass c) { return relation_for(c) != Relation::kInvariant; }
bool is_debase(TestClass c) { return relation_for(c) == Relation::kDecrease; }

void validate_case(const MetamorphicCase& c) {
  if (c.id.empty()) invalid("case without an id");
  const bool has_stub = c.stub.has_value();
  if (has_stub != (c.regimen == Regimen::kResumePlusStub)) {
    invalid("case " + c.id + ": stub must be present exactly for resume_plus_stub");
  }
  if (has_stub && (c.stub->size() < 2 || c.stub->size() > 5)) {
    invalid("case " + c.id + ": stub has " + std::to_string(c.stub->size()) +
            " turns, expected 2..5");
  }
  if (c.target.has_value() != is_targeted(c.test_class)) {
    invalid("case " + c.id + ": target must be present exactly for add/debase classes");
  }
  if (c.debasement_type.has_value() != is_debase(c.test_class)) {
    invalid("case " + c.id + ": debasement_type must be present exactly for debase classes");
  }
  if (c.injected_turn.interviewer_message.empty() || c.injected_turn.applicant_message.empty()) {
    invalid("case " + c.id + ": injected turn has an empty message");
  }
}

nlohmann::ordered_json case_to_json(const MetamorphicCase& c) {
  nlohmann::ordered_json j;
  j["id"] = c.id;
  j["resume_id"] = c.resume_id;
  j["rubric_id"] = c.rubric_id;
  j["regimen"] = std::string(regimen_name(c.regimen));
  if (c.stub) {
    j["stub"] = nlohmann::ordered_json::array();
    for (const auto& t : *c.stub) j["stub"].push_back(turn_to_json(t));
  } else {
    j["stub"] = nullptr;
  }
  j["injected_turn"] = turn_to_json(c.injected_turn);
  j["test_class"] = std::string(test_class_name(c.test_class));
  j["target"] = target_to_json(c.target);
  j["debasement_type"] =
      c.debasement_type ? nlohmann::ordered_json(std::string(debasement_name(*c.debasement_type)))
                        : nlohmann::ordered_json(nullptr);
  return j;
}

MetamorphicCase case_from_json(const nlohmann::json& j) {
  try {
    MetamorphicCase c;
    c.id = j.at("id").get<std::string>();
    c.resume_id = j.at("resume_id").get<std::string>();
    c.rubric_id = j.at("rubric_id").get<std::string>();
    c.regimen = parse_regimen(j.at("regimen").get<std::string>());
    if (j.contains("stub") && !j.at("stub").is_null()) {
      std::vector<TurnPair> stub;
      for (const auto& t : j.at("stub")) stub.push_back(turn_from_json(t));
      c.stub = std::move(stub);
    }
    c.injected_turn = turn_from_json(j.at("injected_turn"));
    c.test_class = parse_test_class(j.at("test_class").get<std::string>());
    c.target = target_from_json(j, "target");
    c.debasement_type = debasement_from_json(j);
    validate_case(c);
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("metamorphic case: ") + e.what());
  }
}

nlohmann::ordered_json uniform_case_to_json(const UniformPriorCase& c) {
  nlohmann::ordered_json j;
  j["id"] = c.id;
  j["resume_id"] = c.resume_id;
  j["rubric_id"] = c.rubric_id;
  j["source_rubric_id"] = c.source_rubric_id;
  j["injected_dimension"] = {{"name", c.injected_dimension.name},
                             {"anchors", c.injected_dimension.anchors}};
  return j;
}

UniformPriorCase uniform_case_from_json(const nlohmann::json& j) {
  try {
    UniformPriorCase c;
    c.id = j.at("id").get<std::string>();
    c.resume_id = j.at("resume_id").get<std::string>();
    c.rubric_id = j.at("rubric_id").get<std::string>();
    c.source_rubric_id = j.at("source_rubric_id").get<std::string>();
    c.injected_dimension.name = j.at("injected_dimension").at("name").get<std::string>();
    c.injected_dimension.anchors =
        j.at("injected_dimension").at("anchors").get<std::vector<std::string>>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("uniform-prior case: ") + e.what());
  }
}

CaseResult evaluate_relation(const std::vector<Distribution>& p_minus,
                             const std::vector<Distribution>& p_plus, TestClass test_class,
                             std::optional<TargetIndex> target, double epsilon) {
  if (p_minus.size() != p_plus.size()) {
    invalid("relation: belief states differ in dimension count");
  }
  CaseResult result;
  result.relation = relation_for(test_class);
  result.observed_delta.resize(p_minus.size());
  double max_abs = 0.0;
  for (std::size_t d = 0; d < p_minus.size(); ++d) {
    if (p_minus[d].size() != p_plus[d].size()) {
      invalid("relation: distributions differ in level count");
    }
    auto& row = result.observed_delta[d];
    row.resize(p_minus[d].size());
    for (std::size_t l = 0; l < row.size(); ++l) {
      row[l] = p_plus[d][l] - p_minus[d][l];
      max_abs = std::max(max_abs, std::abs(row[l]));
    }
  }

  if (result.relation == Relation::kInvariant) {
    result.statistic = max_abs;
    result.pass = max_abs <= epsilon;
    return result;
  }
  if (!target) invalid("relation: " + std::string(test_class_name(test_class)) + " needs a target");
  if (target->dimension >= result.observed_delta.size() || target->level < 1 ||
      static_cast<std::size_t>(target->level) > result.observed_delta[target->dimension].size()) {
    invalid("relation: target out of range");
  }
  result.statistic =
      result.observed_delta[target->dimension][static_cast<std::size_t>(target->level - 1)];
  result.pass = result.relation == Relation::kIncrease ? result.statistic > epsilon
                                                       : result.statistic < -epsilon;
  return result;
}

CaseResult evaluate_uniform(const Distribution& p, double epsilon) {
  if (p.empty()) invalid("uniform check on an empty distribution");
  CaseResult result;
  result.relation = Relation::kUniformLinf;
  const double u = 1.0 / static_cast<double>(p.size());
  Distribution dev(p.size());
  for (std::size_t l = 0; l < p.size(); ++l) {
    dev[l] = p[l] - u;
    result.statistic = std::max(result.statistic, std::abs(dev[l]));
  }
  result.observed_delta.push_back(std::move(dev));
  result.pass = result.statistic <= epsilon;
  return result;
}

CaseResult Harness::run_case(const MetamorphicCase& c, judge::PolicyKind policy,
                             double epsilon) const {
  validate_case(c);
  const auto rubric_it = corpus_.rubrics.find(c.rubric_id);
  if (rubric_it == corpus_.rubrics.end()) {
    throw Error(ErrorCode::kNotFound, "case " + c.id + ": unknown rubric " + c.rubric_id);
  }
  const auto resume_it = corpus_.resumes.find(c.resume_id);
  if (resume_it == corpus_.resumes.end()) {
    throw Error(ErrorCode::kNotFound, "case " + c.id + ": unknown resume " + c.resume_id);
  }
  const Rubric& rubric = rubric_it->second;

  std::optional<TargetIndex> target;
  if (c.target) {
    const auto d = rubric.dimension_index(c.target->dimension);
    if (!d) invalid("case " + c.id + ": target dimension \"" + c.target->dimension + "\" not in rubric");
    if (c.target->level < 1 || c.target->level > rubric.num_levels()) {
      invalid("case " + c.id + ": target level out of range");
    }
    const int expected = class_level(c.test_class, rubric.num_levels());
    if (c.target->level != expected) {
      invalid("case " + c.id + ": " + std::string(test_class_name(c.test_class)) +
              " must target level " + std::to_string(expected));
    }
    target = TargetIndex{*d, c.target->level};
  }

  std::vector<TurnPair> turns = c.stub.value_or(std::vector<TurnPair>{});
  const std::size_t n = turns.size();
  TurnPair tau = c.injected_turn;
  tau.index = static_cast<int>(n) + 1;
  turns.push_back(tau);
  const Transcript full(resume_it->second, std::move(turns));

  BeliefState p_minus;
  BeliefState p_plus;
  if (policy == judge::PolicyKind::kPba) {
    auto state = judge_.initialize(rubric, full.resume_text(), policy, c.id);
    for (std::size_t k = 1; k <= n; ++k) {
      state = judge_.update(rubric, full.prefix(k), state.belief, policy, c.id);
    }
    p_minus = state.belief;
    p_plus = judge_.update(rubric, full, p_minus, policy, c.id).belief;
  } else {
    // The independent judge never sees the previous belief; a uniform
    // placeholder only carries turn numbering.
    if (n == 0) {
      p_minus = judge_.initialize(rubric, full.resume_text(), policy, c.id).belief;
    } else {
      auto placeholder = uniform_belief(rubric);
      placeholder.turn = static_cast<int>(n) - 1;
      p_minus = judge_.update(rubric, full.prefix(n), placeholder, policy, c.id).belief;
    }
    auto placeholder = uniform_belief(rubric);
    placeholder.turn = static_cast<int>(n);
    p_plus = judge_.update(rubric, full, placeholder, policy, c.id).belief;
  }

  auto result = evaluate_relation(p_minus.posteriors, p_plus.posteriors, c.test_class,
                                  target, epsilon);
  result.case_id = c.id;
  return result;
}

CaseResult Harness::run_uniform_prior_case(const UniformPriorCase& c,
                                           judge::PolicyKind policy, double epsilon) const {
  const auto rubric_it = corpus_.rubrics.find(c.rubric_id);
  if (rubric_it == corpus_.rubrics.end()) {
    throw Error(ErrorCode::kNotFound, "case " + c.id + ": unknown rubric " + c.rubric_id);
  }
  const auto resume_it = corpus_.resumes.find(c.resume_id);
  if (resume_it == corpus_.resumes.end()) {
    throw Error(ErrorCode::kNotFound, "case " + c.id + ": unknown resume " + c.resume_id);
  }
  if (c.source_rubric_id == c.rubric_id) {
    invalid("case " + c.id + ": injected dimension must come from a different rubric");
  }
  if (rubric_it->second.dimension_index(c.injected_dimension.name)) {
    invalid("case " + c.id + ": injected dimension \"" + c.injected_dimension.name +
            "\" collides with a host dimension");
  }
  const Rubric augmented = rubric_it->second.with_dimension(c.injected_dimension);
  const auto state = judge_.initialize(augmented, resume_it->second, policy, c.id);
  auto result = evaluate_uniform(state.belief.posteriors.back(), epsilon);
  result.case_id = c.id;
  return result;
}

ResumeSource resume_source_from_json(const nlohmann::json& j) {
  try {
    ResumeSource s;
    s.id = j.at("id").get<std::string>();
    s.rubric_id = j.at("rubric_id").get<std::string>();
    s.resume = j.at("resume").get<std::string>();
    for (const auto& t : j.at("stub")) s.stub.push_back(turn_from_json(t));
    for (const auto& [name, inj] : j.at("injections").items()) {
      ResumeSource::Injection injection;
      injection.turn.index = 1;
      injection.turn.interviewer_message = inj.at("interviewer").get<std::string>();
      injection.turn.applicant_message = inj.at("applicant").get<std::string>();
      injection.target = target_from_json(inj, "target");
      injection.debasement_type = debasement_from_json(inj);
      s.injections[parse_test_class(name)] = std::move(injection);
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("resume source: ") + e.what());
  }
}

nlohmann::ordered_json resume_source_to_json(const ResumeSource& source) {
  nlohmann::ordered_json j;
  j["id"] = source.id;
  j["rubric_id"] = source.rubric_id;
  j["resume"] = source.resume;
  j["stub"] = nlohmann::ordered_json::array();
  for (const auto& t : source.stub) j["stub"].push_back(turn_to_json(t));
  j["injections"] = nlohmann::ordered_json::object();
  for (const auto& [cls, inj] : source.injections) {
    nlohmann::ordered_json i;
    i["interviewer"] = inj.turn.interviewer_message;
    i["applicant"] = inj.turn.applicant_message;
    if (inj.target) i["target"] = target_to_json(inj.target);
    if (inj.debasement_type) i["debasement_type"] = std::string(debasement_name(*inj.debasement_type));
    j["injections"][std::string(test_class_name(cls))] = std::move(i);
  }
  return j;
}

std::vector<MetamorphicCase> generate_cases(const std::vector<ResumeSource>& sources) {
  std::vector<MetamorphicCase> cases;
  std::set<std::string> ids;
  for (const auto& source : sources) {
    if (!ids.insert(source.id).second) invalid("duplicate resume id " + source.id);
    for (auto regimen : {Regimen::kResumeOnly, Regimen::kResumePlusStub}) {
      for (auto cls : all_test_classes()) {
        const auto it = source.injections.find(cls);
        if (it == source.injections.end()) {
          invalid("resume " + source.id + " has no injected turn for class " +
                  std::string(test_class_name(cls)));
        }
        MetamorphicCase c;
        c.id = source.id + "/" + std::string(regimen_name(regimen)) + "/" +
               std::string(test_class_name(cls));
        c.resume_id = source.id;
        c.rubric_id = source.rubric_id;
        c.regimen = regimen;
        if (regimen == Regimen::kResumePlusStub) c.stub = source.stub;
        c.injected_turn = it->second.turn;
        c.injected_turn.index =
            regimen == Regimen::kResumePlusStub ? static_cast<int>(source.stub.size()) + 1 : 1;
        c.test_class = cls;
        c.target = it->second.target;
        c.debasement_type = it->second.debasement_type;
        validate_case(c);
        cases.push_back(std::move(c));
      }
    }
  }
  return cases;
}

std::vector<UniformPriorCase> generate_uniform_cases(
    const std::vector<ResumeSource>& sources, const std::map<std::string, Rubric>& rubrics) {
  std::vector<UniformPriorCase> out;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const auto& source = sources[i];
    const auto host_it = rubrics.find(source.rubric_id);
    if (host_it == rubrics.end()) {
      throw Error(ErrorCode::kNotFound,
                  "resume " + source.id + " uses unknown rubric " + source.rubric_id);
    }
    const Rubric& host = host_it->second;
    const Rubric* foreign = nullptr;
    for (const auto& [id, r] : rubrics) {
      if (id != host.id() && r.domain_name() != host.domain_name() &&
          r.num_levels() == host.num_levels()) {
        foreign = &r;
        break;
      }
    }
    if (!foreign) {
      invalid("resume " + source.id + ": no rubric from another domain to inject from");
    }
    const auto dims = foreign->num_dimensions();
    const Dimension* pick = nullptr;
    for (std::size_t k = 0; k < dims && !pick; ++k) {
      const auto& candidate = foreign->dimensions()[(i + k) % dims];
      if (!host.dimension_index(candidate.name)) pick = &candidate;
    }
    if (!pick) invalid("resume " + source.id + ": every foreign dimension name collides");
    out.push_back(UniformPriorCase{source.id + "/uniform_prior", source.id, host.id(),
                                   foreign->id(), *pick});
  }
  return out;
}

Corpus load_corpus(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::kIo, "corpus directory " + dir.string() + " not found");
  }
  Corpus corpus;
  for (const auto& path : json_files(dir / "rubrics")) {
    auto rubric = load_rubric(read_text_file(path));
    const auto id = rubric.id();
    if (!corpus.index.rubrics.emplace(id, std::move(rubric)).second) {
      invalid("duplicate rubric id " + id);
    }
  }
  for (const auto& path : json_files(dir / "resumes")) {
    auto source = resume_source_from_json(read_json_file(path));
    corpus.index.resumes[source.id] = source.resume;
    corpus.sources.push_back(std::move(source));
  }
  const auto case_files = json_files(dir / "cases");
  if (case_files.empty()) {
    corpus.cases = generate_cases(corpus.sources);
  } else {
    for (const auto& path : case_files) {
      corpus.cases.push_back(case_from_json(read_json_file(path)));
    }
  }
  const auto uniform_files = json_files(dir / "uniform");
  if (uniform_files.empty()) {
    corpus.uniform_cases = generate_uniform_cases(corpus.sources, corpus.index.rubrics);
  } else {
    for (const auto& path : uniform_files) {
      corpus.uniform_cases.push_back(uniform_case_from_json(read_json_file(path)));
    }
  }
  return corpus;
}

void write_generated_cases(const Corpus& corpus, const std::filesystem::path& dir) {
  for (const auto& c : corpus.cases) {
    write_text_file(dir / "cases" / (file_stem_for(c.id) + ".json"),
                    dump_pretty(case_to_json(c)));
  }
  for (const auto& c : corpus.uniform_cases) {
    write_text_file(dir / "uniform" / (file_stem_for(c.id) + ".json"),
                    dump_pretty(uniform_case_to_json(c)));
  }
}

SuiteReport run_suite(const Harness& harness, const Corpus& corpus,
                      const std::vector<judge::PolicyKind>& policies,
                      const SuiteOptions& options) {
  struct Job {
    judge::PolicyKind policy;
    const MetamorphicCase* metamorphic = nullptr;
    const UniformPriorCase* uniform = nullptr;
  };
  std::vector<Job> jobs;
  for (auto policy : policies) {
    for (const auto& c : corpus.cases) jobs.push_back({policy, &c, nullptr});
    for (const auto& c : corpus.uniform_cases) jobs.push_back({policy, nullptr, &c});
  }

  std::vector<std::optional<CaseResult>> results(jobs.size());
  std::vector<std::string> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const auto& job = jobs[i];
      try {
        results[i] = job.metamorphic
                         ? harness.run_case(*job.metamorphic, job.policy, options.epsilon)
                         : harness.run_uniform_prior_case(*job.uniform, job.policy,
                                                          options.epsilon);
      } catch (const Error& e) {
        errors[i] = e.what();
      }
    }
  };
  const auto threads = static_cast<std::size_t>(std::max(1, options.max_parallel));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < std::min(threads, jobs.size()); ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  // Deterministic aggregation in job order.
  using Key = std::tuple<std::string, std::string, std::string>;
  std::map<Key, SuiteRow> cells;
  std::vector<Key> order;
  const auto bump = [&](const std::string& judge_name, const std::string& cls,
                        const std::string& stratum, bool pass) {
    Key key{judge_name, cls, stratum};
    auto [it, inserted] = cells.try_emplace(key, SuiteRow{judge_name, cls, stratum, 0, 0});
    if (inserted) order.push_back(key);
    it->second.total += 1;
    if (pass) it->second.passes += 1;
  };

  SuiteReport report;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto& job = jobs[i];
    const std::string judge_name(judge::policy_name(job.policy));
    if (!results[i]) {
      report.errored += 1;
      report.errors.push_back(judge_name + " " +
                              (job.metamorphic ? job.metamorphic->id : job.uniform->id) +
                              ": " + errors[i]);
      continue;
    }
    const auto& result = *results[i];
    report.results.emplace_back(judge_name, result);
    const std::string& rubric_id =
        job.metamorphic ? job.metamorphic->rubric_id : job.uniform->rubric_id;
    const auto& domain = corpus.index.rubrics.at(rubric_id).domain_name();
    if (job.metamorphic) {
      const auto& c = *job.metamorphic;
      const std::string cls(test_class_name(c.test_class));
      bump(judge_name, cls, "all", result.pass);
      bump(judge_name, cls, "regimen=" + std::string(regimen_name(c.regimen)), result.pass);
      bump(judge_name, cls, "domain=" + domain, result.pass);
      if (c.debasement_type) {
        bump(judge_name, cls,
             "debasement=" + std::string(debasement_name(*c.debasement_type)), result.pass);
      }
    } else {
      bump(judge_name, std::string(kUniformPriorClass), "all", result.pass);
      bump(judge_name, std::string(kUniformPriorClass), "domain=" + domain, result.pass);
    }
  }

  // Rows: judge order, then class order, then "all" before sorted strata.
  std::map<std::string, int> class_rank;
  int rank = 0;
  for (auto cls : all_test_classes()) class_rank[std::string(test_class_name(cls))] = rank++;
  class_rank[std::string(kUniformPriorClass)] = rank;
  std::map<std::string, int> judge_rank;
  for (std::size_t p = 0; p < policies.size(); ++p) {
    judge_rank.emplace(std::string(judge::policy_name(policies[p])), static_cast<int>(p));
  }
  std::sort(order.begin(), order.end(), [&](const Key& a, const Key& b) {
    const auto ka = std::make_tuple(judge_rank[std::get<0>(a)], class_rank[std::get<1>(a)],
                                    std::get<2>(a) != "all", std::get<2>(a));
    const auto kb = std::make_tuple(judge_rank[std::get<0>(b)], class_rank[std::get<1>(b)],
                                    std::get<2>(b) != "all", std::get<2>(b));
    return ka < kb;
  });
  for (const auto& key : order) report.rows.push_back(cells.at(key));
  return report;
}

std::string report_csv(const SuiteReport& report) {
  std::ostringstream out;
  out << "judge,class,stratum,passes,total,rate\n";
  out << std::setprecision(17);
  for (const auto& row : report.rows) {
    out << row.judge << ',' << row.test_class << ',' << row.stratum << ',' << row.passes
        << ',' << row.total << ',' << row.rate() << '\n';
  }
  return out.str();
}

std::string render_report_table(const SuiteReport& report,
                                const std::vector<judge::PolicyKind>& policies) {
  std::vector<std::string> judges;
  for (auto p : policies) judges.emplace_back(judge::policy_name(p));

  // (class, stratum) rows in first-seen order, cells per judge.
  std::vector<std::pair<std::string, std::string>> row_keys;
  std::map<std::pair<std::string, std::string>, std::map<std::string, const SuiteRow*>> cells;
  for (const auto& row : report.rows) {
    const auto key = std::make_pair(row.test_class, row.stratum);
    if (!cells.contains(key)) row_keys.push_back(key);
    cells[key][row.judge] = &row;
  }
  // Judge-major row order interleaves classes; regroup by first judge order.
  std::stable_sort(row_keys.begin(), row_keys.end(), [&](const auto& a, const auto& b) {
    int ra = 0, rb = 0, r = 0;
    for (auto cls : all_test_classes()) {
      if (test_class_name(cls) == a.first) ra = r;
      if (test_class_name(cls) == b.first) rb = r;
      ++r;
    }
    if (a.first == kUniformPriorClass) ra = r;
    if (b.first == kUniformPriorClass) rb = r;
    return std::make_tuple(ra, a.second != "all", a.second) <
           std::make_tuple(rb, b.second != "all", b.second);
  });

  std::ostringstream out;
  out << "Pass rate by judge (rounded %)\n";
  if (report.errored) out << "errored cases excluded: " << report.errored << "\n";
  out << std::left << std::setw(52) << "test";
  for (const auto& j : judges) out << std::right << std::setw(14) << j;
  out << "\n";
  for (const auto& key : row_keys) {
    const std::string label =
        key.second == "all" ? key.first : "  " + key.second;
    out << std::left << std::setw(52) << label;
    for (const auto& j : judges) {
      const auto it = cells[key].find(j);
      if (it == cells[key].end()) {
        out << std::right << std::setw(14) << "-";
      } else {
        std::ostringstream cell;
        cell << std::lround(it->second->rate() * 100.0) << " (" << it->second->passes << "/"
             << it->second->total << ")";
        out << std::right << std::setw(14) << cell.str();
      }
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace btr::calibration

namespace btr::calibration {
namespace {

std::vector<Distribution> centred_belief(const Rubric& rubric) {
  const int l = rubric.num_levels();
  const int middle = (l + 1) / 2;
  Distribution p(static_cast<std::size_t>(l), 0.5 / (l - 1));
  p[static_cast<std::size_t>(middle - 1)] = 0.5;
  return std::vector<Distribution>(rubric.num_dimensions(), p);
}

// Moves mass onto (sign > 0) or off (sign < 0) one level, rescaling the rest
// proportionally so the distribution still sums to one.
Distribution move_mass(const Distribution& p, std::size_t level, double shift, int sign) {
  Distribution out = p;
  const double amount = sign > 0 ? std::min(shift, 0.9 * (1.0 - p[level]))
                                 : -std::min(shift, 0.9 * p[level]);
  const double rest_before = 1.0 - p[level];
  const double rest_after = rest_before - amount;
  out[level] = p[level] + amount;
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (k != level) out[k] = p[k] * rest_after / rest_before;
  }
  return out;
}

}  // namespace

std::shared_ptr<llm::ScriptedBackend> build_ideal_judge_script(const Corpus& corpus,
                                                               double shift) {
  auto script = std::make_shared<llm::ScriptedBackend>();
  const auto schema = std::string(llm::kBeliefPosteriorsSchema);
  for (const auto& c : corpus.cases) {
    const Rubric& rubric = corpus.index.rubrics.at(c.rubric_id);
    const auto base = centred_belief(rubric);
    const int n = c.stub ? static_cast<int>(c.stub->size()) : 0;
    const std::vector<std::string> steady(rubric.num_dimensions(),
                                          "Consistent with the evidence so far.");
    for (int t = 0; t <= n; ++t) {
      script->add(schema, judge::judge_tag(c.id, t),
                  judge::make_judge_response(rubric, base, steady));
    }
    auto after = base;
    std::vector<std::string> why = steady;
    if (c.target) {
      const auto d = *rubric.dimension_index(c.target->dimension);
      const int sign = relation_for(c.test_class) == Relation::kIncrease ? 1 : -1;
      after[d] = move_mass(base[d], static_cast<std::size_t>(c.target->level - 1), shift, sign);
      why[d] = sign > 0 ? "The new turn adds direct evidence for this level."
                        : "The new turn weakens earlier evidence for this level.";
    }
    script->add(schema, judge::judge_tag(c.id, n + 1),
                judge::make_judge_response(rubric, after, why));
  }
  for (const auto& c : corpus.uniform_cases) {
    const Rubric augmented =
        corpus.index.rubrics.at(c.rubric_id).with_dimension(c.injected_dimension);
    auto belief = centred_belief(augmented);
    belief.back().assign(belief.back().size(), 1.0 / static_cast<double>(belief.back().size()));
    std::vector<std::string> why(augmented.num_dimensions(), "Read from the resume.");
    why.back() = "The resume says nothing about this dimension.";
    script->add(schema, judge::judge_tag(c.id, 0),
                judge::make_judge_response(augmented, belief, why));
  }
  return script;
}

}  // namespace btr::calibration
