// Copyright 2026 The CDLM Workbench Authors
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

#include "cdlm/crb/crbgen.h"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>

namespace cdlm::crb {

namespace {

namespace fs = std::filesystem;

constexpr const char* kScopeApproximation = "function+module+builtins";
constexpr const char* kBooleanPolicy = "identifier_and_literal";
constexpr std::uint64_t kCategoryStream = 0;

bool IsAttribute(const std::vector<ClassifiedToken>& tokens, std::size_t i) {
  return i > 0 && tokens[i - 1].text == ".";
}

bool IsReceiverName(const std::string& text) {
  return text == "self" || text == "cls";
}

bool IsBoolean(const ClassifiedToken& t) {
  return t.literal_kind == LiteralKind::kBoolean;
}

// Category match allowing an identifier slot to hold True/False.
bool SameClass(const ClassifiedToken& original,
               const ClassifiedToken& replacement) {
  if (original.category == replacement.category) return true;
  return original.category == TokenCategory::kIdentifier && IsBoolean(replacement);
}

std::vector<std::string> DigitVariants(const std::string& text) {
  std::vector<std::string> out;
  for (std::size_t d = 0; d < text.size(); ++d) {
    if (!std::isdigit(static_cast<unsigned char>(text[d]))) continue;
    for (char c = '0'; c <= '9'; ++c) {
      if (c == text[d]) continue;
      std::string s = text;
      s[d] = c;
      const std::string int_part = s.substr(0, s.find('.'));
      if (int_part.size() > 1 && int_part[0] == '0') continue;
      out.push_back(std::move(s));
    }
  }
  return out;
}

bool LexesAsSingle(const std::string& text, const ClassifiedToken& original) {
  try {
    const auto toks = TokenizeClassify(text);
    return toks.size() == 1 && toks[0].text == text &&
           SameClass(original, toks[0]);
  } catch (const LexError&) {
    return false;
  }
}

std::string SubstitutionName(const ClassifiedToken& original,
                             const std::string& replacement) {
  switch (original.category) {
    case TokenCategory::kOperator:
      return "operator";
    case TokenCategory::kIdentifier:
      return replacement == "True" || replacement == "False"
                 ? "identifier_boolean"
                 : "identifier";
    case TokenCategory::kLiteral:
      return IsBoolean(original) ? "boolean" : "numeric";
    case TokenCategory::kOther:
      break;
  }
  return "other";
}

PositionSet SampleWithoutReplacement(const std::vector<int>& pool, int n,
                                     Rng& rng) {
  std::vector<int> items = pool;
  for (int i = 0; i < n; ++i) {
    const auto remaining = static_cast<std::uint32_t>(items.size() - i);
    const std::size_t j = i + rng.UniformInt(remaining);
    std::swap(items[static_cast<std::size_t>(i)], items[j]);
  }
  PositionSet out(items.begin(), items.begin() + n);
  std::sort(out.begin(), out.end());
  return out;
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

GradeRequest MakeRequest(const std::string& id, const std::string& code,
                         const BenchmarkInstance& inst, double timeout_s) {
  return GradeRequest{id, code, inst.tests, inst.entry_point, timeout_s};
}

void RecordVerdicts(BenchmarkInstance& inst, const GradeVerdict& original,
                    const GradeVerdict& corrupted) {
  inst.original_status = original.status;
  inst.corrupted_status = corrupted.status;
  inst.corrupted_wall_ms = corrupted.wall_ms;
  inst.corrupted_stderr_tail = corrupted.stderr_tail;
}

}  // namespace

nlohmann::json SourceTask::ToJson() const {
  return {{"id", id},
          {"source_dataset", source_dataset},
          {"code", code},
          {"tests", tests},
          {"entry_point", entry_point}};
}

SourceTask SourceTask::FromJson(const nlohmann::json& j,
                                const std::string& default_id,
                                const std::string& default_dataset) {
  SourceTask t;
  t.id = j.value("id", default_id);
  t.source_dataset = j.value("source_dataset", default_dataset);
  t.code = j.at("code").get<std::string>();
  t.tests = j.at("tests").get<std::string>();
  t.entry_point = j.at("entry_point").get<std::string>();
  if (t.id.empty()) throw std::invalid_argument("task id is empty");
  return t;
}

std::vector<SourceTask> LoadCorpus(const std::string& dir,
                                   const std::string& dataset_tag) {
  if (!fs::is_directory(dir)) {
    throw std::runtime_error("corpus directory not found: " + dir);
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<SourceTask> tasks;
  std::set<std::string> ids;
  for (const fs::path& p : files) {
    try {
      tasks.push_back(SourceTask::FromJson(
          nlohmann::json::parse(ReadFile(p.string())), p.stem().string(),
          dataset_tag));
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error(p.string() + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error(p.string() + ": " + e.what());
    }
    if (!ids.insert(tasks.back().id).second) {
      throw std::runtime_error(p.string() + ": duplicate task id '" +
                               tasks.back().id + "'");
    }
  }
  return tasks;
}

std::vector<std::string> CandidateReplacements(
    const std::vector<ClassifiedToken>& tokens, std::size_t index) {
  const ClassifiedToken& tok = tokens.at(index);
  std::set<std::string> pool;
  switch (tok.category) {
    case TokenCategory::kOperator:
      for (const std::string& op : OperatorSet()) pool.insert(op);
      break;
    case TokenCategory::kIdentifier:
      if (IsReceiverName(tok.text) || IsAttribute(tokens, index)) break;
      for (std::size_t j = 0; j < tokens.size(); ++j) {
        const ClassifiedToken& t = tokens[j];
        if (IsBoolean(t)) {
          pool.insert(t.text);
          continue;
        }
        if (t.category != TokenCategory::kIdentifier || IsAttribute(tokens, j) ||
            IsReceiverName(t.text)) {
          continue;
        }
        if (t.scope_id == tok.scope_id || t.scope_id == kModuleScope ||
            IsBuiltinName(t.text)) {
          pool.insert(t.text);
        }
      }
      break;
    case TokenCategory::kLiteral:
      if (tok.literal_kind == LiteralKind::kBoolean) {
        pool.insert(tok.text == "True" ? "False" : "True");
      } else if (tok.literal_kind == LiteralKind::kDecimal) {
        for (std::string& s : DigitVariants(tok.text)) pool.insert(std::move(s));
      }
      break;
    case TokenCategory::kOther:
      break;
  }
  pool.erase(tok.text);
  std::vector<std::string> out;
  for (const std::string& s : pool) {
    if (LexesAsSingle(s, tok)) out.push_back(s);
  }
  return out;
}

std::string CorruptionModeName(CorruptionMode m) {
  return m == CorruptionMode::kMixed ? "mixed" : "single";
}

CorruptionMode ParseCorruptionMode(const std::string& s) {
  if (s == "mixed") return CorruptionMode::kMixed;
  if (s == "single") return CorruptionMode::kSingleType;
  throw std::invalid_argument("unknown corruption mode '" + s +
                              "' (expected mixed or single)");
}

void CorruptionConfig::Validate() const {
  if (n_replace < 1) throw std::invalid_argument("n_replace must be >= 1");
  if (allowed_types.empty()) {
    throw std::invalid_argument("allowed_types is empty");
  }
  if (allowed_types.count(TokenCategory::kOther) > 0) {
    throw std::invalid_argument("category 'other' cannot be corrupted");
  }
  if (alignment_attempts < 1) {
    throw std::invalid_argument("alignment_attempts must be >= 1");
  }
}

std::string BenchmarkInstance::ErrorTypeLabel() const {
  if (error_types.empty()) return "none";
  for (TokenCategory c : error_types) {
    if (c != error_types.front()) return "mixed";
  }
  return CategoryName(error_types.front());
}

nlohmann::json BenchmarkInstance::ToJson() const {
  nlohmann::json types = nlohmann::json::array();
  for (TokenCategory c : error_types) types.push_back(CategoryName(c));
  nlohmann::json reps = nlohmann::json::array();
  for (const Replacement& r : replacements) {
    reps.push_back({{"index", r.index},
                    {"original", r.original},
                    {"replacement", r.replacement},
                    {"category", CategoryName(r.category)},
                    {"substitution", r.substitution}});
  }
  return {{"id", id},
          {"task_id", task_id},
          {"source_dataset", source_dataset},
          {"original_code", original_code},
          {"corrupted_code", corrupted_code},
          {"error_set", error_set},
          {"error_types", types},
          {"n_replace", n_replace},
          {"tests", tests},
          {"entry_point", entry_point},
          {"replacements", reps},
          {"mode", CorruptionModeName(mode)},
          {"token_count", token_count},
          {"identifier_scope", kScopeApproximation},
          {"boolean_policy", kBooleanPolicy},
          {"verdict",
           {{"original", GradeStatusName(original_status)},
            {"corrupted", GradeStatusName(corrupted_status)},
            {"corrupted_wall_ms", corrupted_wall_ms},
            {"corrupted_stderr_tail", corrupted_stderr_tail}}}};
}

BenchmarkInstance BenchmarkInstance::FromJson(const nlohmann::json& j) {
  BenchmarkInstance b;
  b.id = j.at("id").get<std::string>();
  b.task_id = j.value("task_id", std::string());
  b.source_dataset = j.value("source_dataset", std::string());
  b.original_code = j.at("original_code").get<std::string>();
  b.corrupted_code = j.at("corrupted_code").get<std::string>();
  b.error_set = j.at("error_set").get<PositionSet>();
  for (const auto& t : j.at("error_types")) {
    b.error_types.push_back(ParseCategory(t.get<std::string>()));
  }
  b.n_replace = j.at("n_replace").get<int>();
  b.tests = j.at("tests").get<std::string>();
  b.entry_point = j.at("entry_point").get<std::string>();
  for (const auto& r : j.value("replacements", nlohmann::json::array())) {
    b.replacements.push_back({r.at("index").get<int>(),
                              r.at("original").get<std::string>(),
                              r.at("replacement").get<std::string>(),
                              ParseCategory(r.at("category").get<std::string>()),
                              r.value("substitution", std::string())});
  }
  b.mode = ParseCorruptionMode(j.value("mode", std::string("mixed")));
  b.token_count = j.value("token_count", 0);
  if (j.contains("verdict")) {
    const auto& v = j.at("verdict");
    b.original_status = ParseGradeStatus(v.at("original").get<std::string>());
    b.corrupted_status = ParseGradeStatus(v.at("corrupted").get<std::string>());
    b.corrupted_wall_ms = v.value("corrupted_wall_ms", 0.0);
    b.corrupted_stderr_tail = v.value("corrupted_stderr_tail", std::string());
  }
  return b;
}

std::string InstancesToJsonl(const std::vector<BenchmarkInstance>& items) {
  std::string out;
  for (const BenchmarkInstance& b : items) {
    out += b.ToJson().dump();
    out += '\n';
  }
  return out;
}

std::vector<BenchmarkInstance> InstancesFromJsonl(const std::string& text) {
  std::vector<BenchmarkInstance> out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(BenchmarkInstance::FromJson(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw std::runtime_error("instance line " + std::to_string(line_no) +
                               ": " + e.what());
    }
  }
  return out;
}

std::vector<BenchmarkInstance> ReadInstances(const std::string& path) {
  return InstancesFromJsonl(ReadFile(path));
}

void WriteInstances(const std::string& path,
                    const std::vector<BenchmarkInstance>& items) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << InstancesToJsonl(items);
    if (!out) throw std::runtime_error("write failed: " + tmp);
  }
  fs::rename(tmp, path);
}

CorruptionResult CorruptProgram(const SourceTask& task,
                                const CorruptionConfig& cfg, Rng rng) {
  cfg.Validate();
  const std::vector<ClassifiedToken> tokens = TokenizeClassify(task.code);
  std::map<TokenCategory, std::vector<int>> usable;
  std::vector<std::vector<std::string>> cands(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (cfg.allowed_types.count(tokens[i].category) == 0) continue;
    cands[i] = CandidateReplacements(tokens, i);
    if (!cands[i].empty()) {
      usable[tokens[i].category].push_back(static_cast<int>(i));
    }
  }
  const int n = cfg.n_replace;
  std::vector<int> pool;
  if (cfg.mode == CorruptionMode::kMixed) {
    for (const auto& [cat, positions] : usable) {
      pool.insert(pool.end(), positions.begin(), positions.end());
    }
    std::sort(pool.begin(), pool.end());
    if (static_cast<int>(pool.size()) < n) {
      return {std::nullopt, std::to_string(pool.size()) +
                                " usable positions, need " + std::to_string(n)};
    }
  } else {
    std::vector<TokenCategory> eligible;
    for (const auto& [cat, positions] : usable) {
      if (static_cast<int>(positions.size()) >= n) eligible.push_back(cat);
    }
    if (eligible.empty()) {
      return {std::nullopt, "no single category has " + std::to_string(n) +
                                " usable positions"};
    }
    Rng pick = rng.Split(kCategoryStream);
    pool = usable[eligible[pick.UniformInt(
        static_cast<std::uint32_t>(eligible.size()))]];
  }

  for (int attempt = 0; attempt < cfg.alignment_attempts; ++attempt) {
    Rng r = rng.Split(static_cast<std::uint64_t>(attempt) + 1);
    BenchmarkInstance inst;
    inst.task_id = task.id;
    inst.source_dataset = task.source_dataset;
    inst.original_code = task.code;
    inst.tests = task.tests;
    inst.entry_point = task.entry_point;
    inst.n_replace = n;
    inst.mode = cfg.mode;
    inst.token_count = static_cast<int>(tokens.size());
    inst.error_set = SampleWithoutReplacement(pool, n, r);
    std::vector<std::string> texts;
    texts.reserve(tokens.size());
    for (const ClassifiedToken& t : tokens) texts.push_back(t.text);
    for (int i : inst.error_set) {
      const auto& c = cands[static_cast<std::size_t>(i)];
      const std::string& pick =
          c[r.UniformInt(static_cast<std::uint32_t>(c.size()))];
      const ClassifiedToken& orig = tokens[static_cast<std::size_t>(i)];
      texts[static_cast<std::size_t>(i)] = pick;
      inst.error_types.push_back(orig.category);
      inst.replacements.push_back(
          {i, orig.text, pick, orig.category, SubstitutionName(orig, pick)});
    }
    inst.corrupted_code = Splice(task.code, tokens, texts);
    if (CheckInstance(inst).empty()) return {std::move(inst), ""};
  }
  return {std::nullopt, "token alignment lost in every attempt"};
}

std::vector<std::string> CheckInstance(const BenchmarkInstance& inst) {
  std::vector<std::string> problems;
  std::vector<ClassifiedToken> orig;
  std::vector<ClassifiedToken> corr;
  try {
    orig = TokenizeClassify(inst.original_code);
  } catch (const LexError& e) {
    problems.push_back(std::string("original does not lex: ") + e.what());
    return problems;
  }
  try {
    corr = TokenizeClassify(inst.corrupted_code);
  } catch (const LexError& e) {
    problems.push_back(std::string("corrupted does not lex: ") + e.what());
    return problems;
  }
  if (orig.size() != corr.size()) {
    problems.push_back("token counts differ: " + std::to_string(orig.size()) +
                       " vs " + std::to_string(corr.size()));
    return problems;
  }
  if (inst.token_count != 0 &&
      inst.token_count != static_cast<int>(orig.size())) {
    problems.push_back("recorded token_count does not match the source");
  }
  if (!IsSortedUnique(inst.error_set) || inst.error_set.empty()) {
    problems.push_back("error set empty or not sorted/unique");
    return problems;
  }
  if (static_cast<int>(inst.error_set.size()) != inst.n_replace) {
    problems.push_back("n_replace does not match |E|");
  }
  if (inst.error_types.size() != inst.error_set.size()) {
    problems.push_back("error_types not aligned with error set");
  }
  std::size_t e = 0;
  for (std::size_t i = 0; i < orig.size(); ++i) {
    const bool in_e = e < inst.error_set.size() &&
                      inst.error_set[e] == static_cast<int>(i);
    if (in_e) {
      if (orig[i].text == corr[i].text) {
        problems.push_back("position " + std::to_string(i) +
                           " in E is unchanged");
      }
      if (!SameClass(orig[i], corr[i])) {
        problems.push_back("position " + std::to_string(i) + " changed category");
      }
      if (e < inst.error_types.size() &&
          inst.error_types[e] != orig[i].category) {
        problems.push_back("error type at " + std::to_string(i) +
                           " does not match the original token");
      }
      ++e;
    } else if (orig[i].text != corr[i].text ||
               orig[i].category != corr[i].category) {
      problems.push_back("position " + std::to_string(i) +
                         " outside E differs");
    }
  }
  if (e != inst.error_set.size()) problems.push_back("error set out of range");
  return problems;
}

std::string ValidationOutcomeName(ValidationOutcome o) {
  switch (o) {
    case ValidationOutcome::kAccepted:
      return "accepted";
    case ValidationOutcome::kDiscarded:
      return "discarded";
    case ValidationOutcome::kSourceRejected:
      return "source_rejected";
  }
  return "discarded";
}

ValidationResult ValidateAndEmit(const BenchmarkInstance& candidate,
                                 GradingInterface& grader, double timeout_s) {
  const std::vector<GradeVerdict> v = grader.GradeBatch(
      {MakeRequest(candidate.id + "/original", candidate.original_code,
                   candidate, timeout_s),
       MakeRequest(candidate.id + "/corrupted", candidate.corrupted_code,
                   candidate, timeout_s)});
  if (v.size() != 2) {
    throw GraderUnavailableError("grader returned " + std::to_string(v.size()) +
                                 " verdicts for 2 requests");
  }
  ValidationResult out;
  out.original = v[0];
  out.corrupted = v[1];
  out.instance = candidate;
  RecordVerdicts(out.instance, v[0], v[1]);
  if (!v[0].passed()) {
    out.outcome = ValidationOutcome::kSourceRejected;
  } else if (v[1].passed()) {
    out.outcome = ValidationOutcome::kDiscarded;
  } else {
    out.outcome = ValidationOutcome::kAccepted;
  }
  return out;
}

RevalidationResult Revalidate(const BenchmarkInstance& inst,
                              GradingInterface& grader, double timeout_s) {
  RevalidationResult out;
  out.problems = CheckInstance(inst);
  const ValidationResult v = ValidateAndEmit(inst, grader, timeout_s);
  out.original = v.original.status;
  out.corrupted = v.corrupted.status;
  if (v.outcome != ValidationOutcome::kAccepted) {
    out.problems.push_back("grader verdicts no longer accept the instance (" +
                           ValidationOutcomeName(v.outcome) + ")");
  }
  if (out.original != inst.original_status ||
      out.corrupted != inst.corrupted_status) {
    out.problems.push_back("verdicts differ from the recorded ones");
  }
  out.consistent = out.problems.empty();
  return out;
}

void GenerationConfig::Validate() const {
  if (n_replace.empty()) throw std::invalid_argument("n_replace list is empty");
  for (int n : n_replace) {
    if (n < 1) throw std::invalid_argument("n_replace values must be >= 1");
  }
  if (samples_per_n < 1 || samples_per_n > 999) {
    throw std::invalid_argument("samples_per_n must lie in [1, 999]");
  }
  if (max_attempts < 1) throw std::invalid_argument("max_attempts must be >= 1");
  if (!(timeout_s > 0.0)) throw std::invalid_argument("timeout_s must be > 0");
  CorruptionConfig probe;
  probe.allowed_types = allowed_types;
  probe.Validate();
}

nlohmann::json GenerationConfig::ToJson() const {
  nlohmann::json types = nlohmann::json::array();
  for (TokenCategory c : allowed_types) types.push_back(CategoryName(c));
  return {{"n_replace", n_replace},   {"samples_per_n", samples_per_n},
          {"max_attempts", max_attempts}, {"allowed_types", types},
          {"mode", CorruptionModeName(mode)}, {"timeout_s", timeout_s},
          {"seed", seed}};
}

nlohmann::json GenerationStats::ToJson() const {
  return {{"tasks", tasks},
          {"tasks_resumed", tasks_resumed},
          {"sources_rejected", sources_rejected},
          {"accepted", accepted},
          {"discarded", discarded},
          {"skipped", skipped}};
}

std::string InstanceId(const std::string& task_id, int n_replace, int sample) {
  std::ostringstream ss;
  ss << task_id << "/n" << n_replace << "/s" << std::setw(3)
     << std::setfill('0') << sample;
  return ss.str();
}

GenerationResult GenerateBenchmark(const std::vector<SourceTask>& tasks,
                                   const GenerationConfig& cfg,
                                   GradingInterface& grader,
                                   const std::set<std::string>& done,
                                   const TaskDoneFn& on_task_done) {
  cfg.Validate();
  GenerationResult result;
  GenerationStats& st = result.stats;
  const Rng root(cfg.seed);
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    const SourceTask& task = tasks[k];
    if (done.count(task.id) > 0) {
      ++st.tasks_resumed;
      continue;
    }
    ++st.tasks;
    std::vector<BenchmarkInstance> accepted;
    auto finish = [&] {
      std::sort(accepted.begin(), accepted.end(),
                [](const auto& a, const auto& b) { return a.id < b.id; });
      if (on_task_done) on_task_done(task.id, accepted);
      result.instances.insert(result.instances.end(), accepted.begin(),
                              accepted.end());
    };
    try {
      (void)TokenizeClassify(task.code);
    } catch (const LexError& e) {
      ++st.sources_rejected;
      st.log.push_back(task.id + ": source rejected, " + e.what());
      finish();
      continue;
    }
    const GradeVerdict original = grader.Grade(
        {task.id + "/original", task.code, task.tests, task.entry_point,
         cfg.timeout_s});
    if (!original.passed()) {
      ++st.sources_rejected;
      st.log.push_back(task.id + ": source rejected, original graded " +
                       GradeStatusName(original.status));
      finish();
      continue;
    }
    const Rng task_rng = root.Split(k);
    for (int n : cfg.n_replace) {
      CorruptionConfig ccfg;
      ccfg.n_replace = n;
      ccfg.allowed_types = cfg.allowed_types;
      ccfg.mode = cfg.mode;
      for (int s = 0; s < cfg.samples_per_n; ++s) {
        const std::string id = InstanceId(task.id, n, s);
        bool placed = false;
        for (int a = 0; a < cfg.max_attempts && !placed; ++a) {
          const Rng r = task_rng.Split(static_cast<std::uint64_t>(n))
                            .Split(static_cast<std::uint64_t>(s))
                            .Split(static_cast<std::uint64_t>(a));
          CorruptionResult cr = CorruptProgram(task, ccfg, r);
          if (!cr.instance) {
            ++st.skipped;
            st.log.push_back(id + ": skipped, " + cr.skip_reason);
            break;
          }
          BenchmarkInstance inst = std::move(*cr.instance);
          inst.id = id;
          const GradeVerdict corrupted = grader.Grade(
              {id + "/corrupted", inst.corrupted_code, inst.tests,
               inst.entry_point, cfg.timeout_s});
          if (corrupted.passed()) {
            ++st.discarded;
            continue;
          }
          RecordVerdicts(inst, original, corrupted);
          accepted.push_back(std::move(inst));
          ++st.accepted;
          placed = true;
        }
        if (!placed && (st.log.empty() || st.log.back().rfind(id, 0) != 0)) {
          st.log.push_back(id + ": every attempt passed the tests");
        }
      }
    }
    finish();
  }
  std::sort(result.instances.begin(), result.instances.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  return result;
}

}  // namespace cdlm::crb
