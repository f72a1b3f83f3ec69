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

#include "cdlm/crb/evaluation.h"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <utility>

namespace cdlm::crb {

namespace {

constexpr const char* kMaskText = "<mask>";
constexpr const char* kUnknownText = "<unk>";

void RequireVocab(const DenoiserInterface& model, const CodeVocab& vocab) {
  if (model.vocab().size() != vocab.size() ||
      model.vocab().mask_id() != CodeVocab::kMaskId) {
    throw std::invalid_argument(
        "model vocabulary (" + std::to_string(model.vocab().size()) +
        " symbols) does not match the code vocabulary (" +
        std::to_string(vocab.size()) + ")");
  }
}

std::vector<int> SortedSteps(std::vector<int> steps) {
  if (steps.empty()) throw std::invalid_argument("step list is empty");
  std::sort(steps.begin(), steps.end());
  steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
  if (steps.front() < 1) throw std::invalid_argument("steps must be >= 1");
  return steps;
}

std::map<std::string, std::string> Keys(const std::string& experiment, int n,
                                        const std::string& type) {
  return {{"experiment", experiment},
          {"n_replace", std::to_string(n)},
          {"error_type", type}};
}

// Refines `z0` to max(steps) and returns the filled sequence after each
// requested step count.
std::vector<TokenSequence> RefineAndFill(DenoiserInterface& model,
                                         const TokenSequence& z0, double tau,
                                         const std::vector<int>& steps) {
  RefinementConfig rc;
  rc.tau = tau;
  rc.steps = steps.back();
  const RefinementResult r = Refine(model, z0, rc);
  std::vector<TokenSequence> states;
  for (int t : steps) states.push_back(r.trace.steps[t - 1].output);
  return FillMasksBatch(model, states);
}

void AddPassRows(Report& report, const std::string& experiment, int n,
                 int t, const PassAtOneResult& p) {
  auto keys = Keys(experiment, n, "all");
  keys["T"] = std::to_string(t);
  report.Add(keys, "pass_at_1", p.rate, p.n);
  report.Add(keys, "timeouts", p.timeouts, p.n);
  report.Add(keys, "grader_errors", p.errors + p.grader_failures, p.n);
}

}  // namespace

CodeVocab::CodeVocab(std::vector<std::string> texts) {
  std::sort(texts.begin(), texts.end());
  texts.erase(std::unique(texts.begin(), texts.end()), texts.end());
  texts_ = {kMaskText, kUnknownText};
  for (std::string& t : texts) {
    if (t == kMaskText || t == kUnknownText) {
      throw std::invalid_argument("reserved text '" + t + "' in vocabulary");
    }
    texts_.push_back(std::move(t));
  }
  for (std::size_t i = 0; i < texts_.size(); ++i) {
    ids_.emplace(texts_[i], static_cast<Token>(i));
  }
}

CodeVocab CodeVocab::FromInstances(const std::vector<BenchmarkInstance>& items) {
  std::vector<std::string> texts;
  for (const BenchmarkInstance& b : items) {
    for (const std::string* code : {&b.original_code, &b.corrupted_code}) {
      for (const ClassifiedToken& t : TokenizeClassify(*code)) {
        texts.push_back(t.text);
      }
    }
  }
  return CodeVocab(std::move(texts));
}

CodeVocab CodeVocab::FromTasks(const std::vector<SourceTask>& tasks) {
  std::vector<std::string> texts;
  for (const SourceTask& task : tasks) {
    const auto tokens = TokenizeClassify(task.code);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      texts.push_back(tokens[i].text);
      for (std::string& c : CandidateReplacements(tokens, i)) {
        texts.push_back(std::move(c));
      }
    }
  }
  return CodeVocab(std::move(texts));
}

Vocabulary CodeVocab::vocabulary() const {
  return Vocabulary(size(), kMaskId);
}

Token CodeVocab::Id(const std::string& text) const {
  auto it = ids_.find(text);
  return it == ids_.end() || it->second == kMaskId ? kUnknownId : it->second;
}

const std::string& CodeVocab::Text(Token id) const {
  if (id < 0 || id >= size()) {
    throw std::out_of_range("code token id " + std::to_string(id));
  }
  return texts_[static_cast<std::size_t>(id)];
}

TokenSequence CodeVocab::Encode(
    const std::vector<ClassifiedToken>& tokens) const {
  std::vector<Token> ids;
  ids.reserve(tokens.size());
  for (const ClassifiedToken& t : tokens) ids.push_back(Id(t.text));
  return TokenSequence(std::move(ids), vocabulary());
}

std::string CodeVocab::Decode(std::string_view source,
                              const std::vector<ClassifiedToken>& layout,
                              const TokenSequence& z) const {
  if (static_cast<std::size_t>(z.size()) != layout.size()) {
    throw std::invalid_argument("Decode: sequence length does not match layout");
  }
  std::vector<std::string> texts;
  texts.reserve(layout.size());
  for (int i = 0; i < z.size(); ++i) texts.push_back(Text(z[i]));
  return Splice(source, layout, texts);
}

nlohmann::json CodeVocab::ToJson() const {
  return {{"mask_id", kMaskId}, {"unknown_id", kUnknownId}, {"texts", texts_}};
}

CodeVocab CodeVocab::FromJson(const nlohmann::json& j) {
  auto texts = j.at("texts").get<std::vector<std::string>>();
  if (texts.size() < 2 || texts[0] != kMaskText || texts[1] != kUnknownText) {
    throw std::invalid_argument("code vocabulary must start with mask, unk");
  }
  CodeVocab v(std::vector<std::string>(texts.begin() + 2, texts.end()));
  if (v.texts_ != texts) {
    throw std::invalid_argument("code vocabulary texts are not sorted/unique");
  }
  return v;
}

PositionSet BodyPositions(const std::vector<ClassifiedToken>& tokens,
                          const std::string& entry_point) {
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
    if (tokens[i].text != "def" || tokens[i + 1].text != entry_point ||
        tokens[i + 1].scope_id != kModuleScope) {
      continue;
    }
    int depth = 0;
    std::size_t j = i + 2;
    for (; j < tokens.size(); ++j) {
      const std::string& t = tokens[j].text;
      if (t == "(" || t == "[" || t == "{") ++depth;
      if (t == ")" || t == "]" || t == "}") --depth;
      if (depth == 0 && t == ":") break;
    }
    PositionSet body;
    const std::string nested = entry_point + ".";
    for (std::size_t k = j + 1; k < tokens.size(); ++k) {
      const std::string& s = tokens[k].scope_id;
      if (s != entry_point && s.rfind(nested, 0) != 0) break;
      body.push_back(static_cast<int>(k));
    }
    return body;
  }
  return {};
}

CrbEvalResult RunLocalizationEval(DenoiserInterface& model,
                                  const CodeVocab& vocab,
                                  const std::vector<BenchmarkInstance>& items,
                                  const std::vector<int>& ks) {
  RequireVocab(model, vocab);
  for (int k : ks) {
    if (k < 1) throw std::invalid_argument("K must be >= 1");
  }
  struct Group {
    std::vector<LocalizationRecord> observed;
    std::vector<LocalizationRecord> maxprob;
  };
  std::map<std::pair<int, std::string>, Group> groups;
  CrbEvalResult out;
  int evaluated = 0;
  for (const BenchmarkInstance& inst : items) {
    try {
      const auto tokens = TokenizeClassify(inst.corrupted_code);
      const TokenSequence z = vocab.Encode(tokens);
      const Distribution d = model.Predict(z);
      LocalizationRecord obs{ObservedTokenProbabilities(d, z), inst.error_set};
      LocalizationRecord mp{
          ConfidenceFromDistribution(d, model.vocab(), false).confidences,
          inst.error_set};
      obs.Validate();
      mp.Validate();
      for (const std::string& type : {std::string("all"), inst.ErrorTypeLabel()}) {
        Group& g = groups[{inst.n_replace, type}];
        g.observed.push_back(obs);
        g.maxprob.push_back(mp);
      }
      ++evaluated;
    } catch (const std::exception& e) {
      out.skipped.push_back(inst.id);
      out.log.push_back(inst.id + ": skipped, " + e.what());
    }
  }
  for (const auto& [key, g] : groups) {
    const auto keys = Keys("localization", key.first, key.second);
    const auto count = static_cast<long long>(g.observed.size());
    out.report.Add(keys, "gap", MeanConfidenceGap(g.observed), count);
    out.report.Add(keys, "gap_maxprob", MeanConfidenceGap(g.maxprob), count);
    const RatioResult ratio = CleanNoiseRatio(g.observed);
    out.report.Add(keys, "confidence_ratio", ratio.ratio, count);
    for (int k : ks) {
      auto kkeys = keys;
      kkeys["K"] = std::to_string(k);
      out.report.Add(kkeys, "hit_rate", HitRate(g.observed, k), count);
      out.report.Add(kkeys, "hit_rate_maxprob", HitRate(g.maxprob, k), count);
    }
  }
  out.summary = {{"instances", items.size()},
                 {"evaluated", evaluated},
                 {"skipped", out.skipped.size()}};
  return out;
}

CrbEvalResult RunRefinementEval(DenoiserInterface& model,
                                const CodeVocab& vocab,
                                const std::vector<BenchmarkInstance>& items,
                                double tau, const std::vector<int>& steps,
                                GradingInterface& grader, double timeout_s) {
  RequireVocab(model, vocab);
  const std::vector<int> ts = SortedSteps(steps);
  // (n_replace, T) -> graded programs
  std::map<std::pair<int, int>, std::vector<GradeRequest>> finals;
  CrbEvalResult out;
  for (const BenchmarkInstance& inst : items) {
    std::vector<TokenSequence> states;
    std::vector<ClassifiedToken> tokens;
    try {
      tokens = TokenizeClassify(inst.corrupted_code);
      states = RefineAndFill(model, vocab.Encode(tokens), tau, ts);
    } catch (const std::exception& e) {
      out.skipped.push_back(inst.id);
      out.log.push_back(inst.id + ": skipped, " + e.what());
      continue;
    }
    for (std::size_t s = 0; s < ts.size(); ++s) {
      finals[{inst.n_replace, ts[s]}].push_back(
          {inst.id + "/T" + std::to_string(ts[s]),
           vocab.Decode(inst.corrupted_code, tokens, states[s]), inst.tests,
           inst.entry_point, timeout_s});
    }
  }
  for (const auto& [key, requests] : finals) {
    const PassAtOneResult p = PassAtOne(requests, grader);
    if (p.grader_failures > 0) {
      out.log.push_back("n_replace " + std::to_string(key.first) + " T " +
                        std::to_string(key.second) + ": " +
                        std::to_string(p.grader_failures) +
                        " grading failures counted as fail");
    }
    AddPassRows(out.report, "refinement", key.first, key.second, p);
  }
  out.summary = {{"instances", items.size()},
                 {"skipped", out.skipped.size()},
                 {"tau", tau},
                 {"steps", ts}};
  return out;
}

void SelfRevisionConfig::Validate() const {
  generation.Validate();
  if (!(tau > 0.0 && tau < 1.0)) {
    throw std::invalid_argument("tau must lie in (0, 1)");
  }
  SortedSteps(steps);
  if (max_attempts < 1) throw std::invalid_argument("max_attempts must be >= 1");
  if (!(timeout_s > 0.0)) throw std::invalid_argument("timeout_s must be > 0");
}

nlohmann::json SelfRevisionConfig::ToJson() const {
  return {{"generation_steps", generation.steps},
          {"remask_budget", generation.remask_budget},
          {"confidence_mode", generation.confidence_mode == ConfidenceMode::kLive
                                  ? "live"
                                  : "frozen"},
          {"tau", tau},
          {"steps", steps},
          {"max_attempts", max_attempts},
          {"timeout_s", timeout_s},
          {"seed", seed}};
}

CrbEvalResult RunSelfRevision(DenoiserInterface& model, const CodeVocab& vocab,
                              const std::vector<SourceTask>& prompts,
                              GradingInterface& grader,
                              const SelfRevisionConfig& cfg) {
  cfg.Validate();
  RequireVocab(model, vocab);
  const std::vector<int> ts = SortedSteps(cfg.steps);
  const Rng root(cfg.seed);
  CrbEvalResult out;
  int generated = 0;
  int generated_pass = 0;
  int discarded = 0;
  std::map<int, std::vector<GradeRequest>> finals;
  for (std::size_t k = 0; k < prompts.size(); ++k) {
    const SourceTask& task = prompts[k];
    std::string code;
    try {
      const auto tokens = TokenizeClassify(task.code);
      const PositionSet body = BodyPositions(tokens, task.entry_point);
      if (body.empty()) {
        out.log.push_back(task.id + ": no body found for " + task.entry_point);
        continue;
      }
      TokenSequence prompt = vocab.Encode(tokens);
      for (int i : body) prompt.Set(i, CodeVocab::kMaskId);
      const RefinementResult gen = DecodeCompletion(model, prompt, cfg.generation);
      code = vocab.Decode(task.code, tokens, gen.final);
    } catch (const std::exception& e) {
      out.skipped.push_back(task.id);
      out.log.push_back(task.id + ": generation failed, " + e.what());
      continue;
    }
    ++generated;
    const GradeVerdict gv = grader.Grade({task.id + "/generated", code,
                                          task.tests, task.entry_point,
                                          cfg.timeout_s});
    if (!gv.passed()) continue;
    ++generated_pass;

    SourceTask gen_task = task;
    gen_task.code = code;
    CorruptionConfig cc;
    cc.n_replace = 1;
    std::optional<BenchmarkInstance> inst;
    try {
      for (int a = 0; a < cfg.max_attempts && !inst; ++a) {
        CorruptionResult cr = CorruptProgram(gen_task, cc, root.Split(k).Split(a));
        if (!cr.instance) {
          out.log.push_back(task.id + ": no corruption, " + cr.skip_reason);
          break;
        }
        cr.instance->id = task.id + "/self";
        const GradeVerdict cv = grader.Grade(
            {cr.instance->id + "/corrupted", cr.instance->corrupted_code,
             task.tests, task.entry_point, cfg.timeout_s});
        if (!cv.passed()) inst = std::move(cr.instance);
      }
    } catch (const LexError& e) {
      out.log.push_back(task.id + ": generated program does not lex, " +
                        e.what());
    }
    if (!inst) {
      ++discarded;
      continue;
    }
    try {
      const auto tokens = TokenizeClassify(inst->corrupted_code);
      const auto states =
          RefineAndFill(model, vocab.Encode(tokens), cfg.tau, ts);
      for (std::size_t s = 0; s < ts.size(); ++s) {
        finals[ts[s]].push_back(
            {inst->id + "/T" + std::to_string(ts[s]),
             vocab.Decode(inst->corrupted_code, tokens, states[s]), task.tests,
             task.entry_point, cfg.timeout_s});
      }
    } catch (const std::exception& e) {
      out.skipped.push_back(task.id);
      out.log.push_back(task.id + ": refinement failed, " + e.what());
    }
  }
  if (generated_pass == 0) {
    out.log.push_back("no generated program passed its tests; report is empty");
  }
  for (const auto& [t, requests] : finals) {
    AddPassRows(out.report, "self_revision", 1, t, PassAtOne(requests, grader));
  }
  out.summary = {{"prompts", prompts.size()},
                 {"generated", generated},
                 {"generated_pass", generated_pass},
                 {"corruption_discarded", discarded},
                 {"skipped", out.skipped.size()}};
  return out;
}

}  // namespace cdlm::crb
