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

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "cdlm/bridge.h"
#include "cdlm/crb/crbgen.h"
#include "cdlm/crb/evaluation.h"
#include "cdlm/crb/grading.h"
#include "cdlm/stub_models.h"
#include "cli/cli.h"

namespace cdlm::cli {

namespace {

namespace fs = std::filesystem;

struct Canonical {
  std::string code;
  std::string tests;
  std::string entry_point;
};

struct GraderArgs {
  std::string kind = "stub";
  std::string command;
  double timeout_s = 10.0;
};

void AddGraderOptions(CLI::App* sub, GraderArgs& g) {
  sub->add_option("--grader", g.kind,
                  "stub (passes exactly the reference programs) | external")
      ->check(CLI::IsMember({"stub", "external"}));
  sub->add_option("--grader-cmd", g.command,
                  std::string("External grader command (default $") +
                      crb::kGraderEnv + ")");
  sub->add_option("--timeout", g.timeout_s, "Per-program timeout in seconds")
      ->check(CLI::PositiveNumber);
}

nlohmann::json GraderConfig(const GraderArgs& g) {
  return {{"kind", g.kind}, {"command", g.command}, {"timeout_s", g.timeout_s}};
}

std::unique_ptr<crb::GradingInterface> MakeGrader(
    GraderArgs& g, const std::vector<Canonical>& references) {
  if (g.kind == "stub") {
    auto stub = std::make_unique<crb::StubGrader>();
    for (const Canonical& c : references) {
      stub->AddCanonical(c.code, c.tests, c.entry_point);
    }
    return stub;
  }
  if (g.command.empty()) {
    const char* env = std::getenv(crb::kGraderEnv);
    if (env != nullptr) g.command = env;
  }
  if (g.command.empty()) {
    throw UsageError(std::string("--grader external needs --grader-cmd or $") +
                     crb::kGraderEnv);
  }
  return std::make_unique<crb::ExternalGrader>(g.command);
}

struct ModelArgs {
  std::string kind = "oracle";
  std::string bridge_cmd;
  std::string vocab_path;
};

void AddModelOptions(CLI::App* sub, ModelArgs& m) {
  sub->add_option("--model", m.kind,
                  "oracle | identity | uniform (in-process stubs) or bridge")
      ->check(CLI::IsMember({"oracle", "identity", "uniform", "bridge"}));
  sub->add_option("--bridge-cmd", m.bridge_cmd,
                  "Command serving the model bridge protocol on stdin/stdout");
  sub->add_option("--vocab", m.vocab_path,
                  "Code vocabulary JSON (default: built from the inputs)")
      ->check(CLI::ExistingFile);
}

nlohmann::json ModelConfigJson(const ModelArgs& m) {
  return {{"kind", m.kind}, {"bridge_cmd", m.bridge_cmd}, {"vocab", m.vocab_path}};
}

std::unique_ptr<DenoiserInterface> MakeCodeModel(
    const ModelArgs& m, const crb::CodeVocab& vocab,
    const std::vector<std::string>& reference_codes) {
  const Vocabulary v = vocab.vocabulary();
  if (m.kind == "bridge") {
    if (m.bridge_cmd.empty()) throw UsageError("--model bridge needs --bridge-cmd");
    return std::make_unique<SubprocessBridge>(v, m.bridge_cmd);
  }
  if (m.kind == "identity") return std::make_unique<IdentityDenoiser>(v);
  if (m.kind == "uniform") return std::make_unique<UniformDenoiser>(v);
  std::vector<TokenSequence> targets;
  for (const std::string& code : reference_codes) {
    targets.push_back(vocab.Encode(crb::TokenizeClassify(code)));
  }
  return std::make_unique<CorrectiveOracleDenoiser>(v, std::move(targets));
}

std::string ReadText(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

crb::CodeVocab LoadOrBuildVocab(const ModelArgs& m,
                                const std::function<crb::CodeVocab()>& build,
                                RunManifest& manifest) {
  crb::CodeVocab vocab = m.vocab_path.empty()
                             ? build()
                             : crb::CodeVocab::FromJson(
                                   nlohmann::json::parse(ReadText(m.vocab_path)));
  const std::string path = manifest.Path("vocab.json");
  std::ofstream(path) << vocab.ToJson().dump() << '\n';
  manifest.AddOutput("vocab", path);
  return vocab;
}

void WriteLines(const std::string& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::trunc);
  for (const std::string& l : lines) out << l << '\n';
}

void WriteEvalOutputs(RunManifest& manifest, const crb::CrbEvalResult& r) {
  const std::string csv = manifest.Path("metrics.csv");
  const std::string json = manifest.Path("metrics.json");
  const std::string log = manifest.Path("log.txt");
  r.report.WriteCsv(csv);
  r.report.WriteJson(json);
  WriteLines(log, r.log);
  manifest.AddOutput("metrics_csv", csv);
  manifest.AddOutput("metrics_json", json);
  manifest.AddOutput("log", log);
  manifest.Set("summary", r.summary);
  std::cout << r.report.ToCsv();
  for (const std::string& l : r.log) std::cerr << l << '\n';
}

std::set<crb::TokenCategory> ParseTypes(const std::vector<std::string>& names) {
  std::set<crb::TokenCategory> out;
  for (const std::string& n : names) out.insert(crb::ParseCategory(n));
  return out;
}

std::vector<int> IntRange(int lo, int hi) {
  std::vector<int> out;
  for (int i = lo; i <= hi; ++i) out.push_back(i);
  return out;
}

struct CrbGenArgs {
  std::string corpus;
  std::string dataset;
  std::string out = "runs/crb";
  std::uint64_t seed = 0;
  std::vector<int> n_replace = IntRange(1, 5);
  int samples = 1;
  int max_attempts = 8;
  std::vector<std::string> types = {"operator", "identifier", "literal"};
  std::string mode = "mixed";
  bool resume = false;
  GraderArgs grader;
};

struct CrbEvalArgs {
  std::string instances;
  std::string out = "runs/crb_eval";
  std::vector<std::string> protocols = {"localization", "refinement"};
  std::vector<int> ks = IntRange(1, 6);
  double tau = 0.9;
  std::vector<int> steps = {1, 2, 4};
  ModelArgs model;
  GraderArgs grader;
};

struct SelfReviseArgs {
  std::string corpus;
  std::string dataset;
  std::string out = "runs/self_revise";
  std::uint64_t seed = 0;
  int gen_steps = 4;
  int remask_budget = 0;
  std::string confidence_mode = "live";
  double tau = 0.9;
  std::vector<int> steps = IntRange(1, 4);
  int max_attempts = 8;
  ModelArgs model;
  GraderArgs grader;
};

}  // namespace

Runner RegisterCrbGen(CLI::App& app) {
  auto args = std::make_shared<CrbGenArgs>();
  CLI::App* sub = app.add_subcommand(
      "crb-gen", "Build code revision instances from a task corpus");
  sub->add_option("--corpus", args->corpus,
                  "Directory of task JSON files {code, tests, entry_point}")
      ->required()
      ->check(CLI::ExistingDirectory);
  sub->add_option("--dataset", args->dataset,
                  "Source dataset tag (default: corpus directory name)");
  sub->add_option("--out", args->out, "Output directory");
  sub->add_option("--seed", args->seed, "Run seed");
  sub->add_option("--n-replace", args->n_replace, "Corrupted positions per instance")
      ->check(CLI::PositiveNumber);
  sub->add_option("--samples", args->samples, "Instances per task and n_replace")
      ->check(CLI::Range(1, 999));
  sub->add_option("--max-attempts", args->max_attempts,
                  "Corruptions tried while the tests keep passing")
      ->check(CLI::PositiveNumber);
  sub->add_option("--types", args->types, "Token categories to corrupt")
      ->check(CLI::IsMember({"operator", "identifier", "literal"}));
  sub->add_option("--mode", args->mode, "mixed | single (one category per instance)")
      ->check(CLI::IsMember({"mixed", "single"}));
  sub->add_flag("--resume", args->resume,
                "Continue an interrupted run in the same output directory");
  AddGraderOptions(sub, args->grader);

  return [args, sub]() {
    if (!sub->parsed()) return;
    CrbGenArgs& a = *args;
    if (a.dataset.empty()) a.dataset = fs::path(a.corpus).filename().string();
    crb::GenerationConfig gen;
    gen.n_replace = a.n_replace;
    gen.samples_per_n = a.samples;
    gen.max_attempts = a.max_attempts;
    gen.allowed_types = ParseTypes(a.types);
    gen.mode = crb::ParseCorruptionMode(a.mode);
    gen.timeout_s = a.grader.timeout_s;
    gen.seed = a.seed;
    RunManifest manifest(a.out, "crb-gen",
                         {{"corpus", a.corpus},
                          {"dataset", a.dataset},
                          {"generation", gen.ToJson()},
                          {"grader", GraderConfig(a.grader)}});
    RunRecorded(manifest, [&] {
      const auto tasks = crb::LoadCorpus(a.corpus, a.dataset);
      std::vector<Canonical> refs;
      for (const auto& t : tasks) refs.push_back({t.code, t.tests, t.entry_point});
      auto grader = MakeGrader(a.grader, refs);

      const std::string partial = manifest.Path("instances.partial.jsonl");
      const std::string done_path = manifest.Path("done.txt");
      std::set<std::string> done;
      std::vector<crb::BenchmarkInstance> prior;
      if (a.resume && fs::exists(done_path)) {
        std::ifstream in(done_path);
        for (std::string line; std::getline(in, line);) {
          if (!line.empty()) done.insert(line);
        }
        if (fs::exists(partial)) prior = crb::ReadInstances(partial);
      } else {
        fs::remove(partial);
        fs::remove(done_path);
      }
      auto on_done = [&](const std::string& task_id,
                         const std::vector<crb::BenchmarkInstance>& items) {
        std::ofstream p(partial, std::ios::app | std::ios::binary);
        p << crb::InstancesToJsonl(items);
        p.flush();
        std::ofstream d(done_path, std::ios::app);
        d << task_id << '\n';
      };
      crb::GenerationResult r =
          crb::GenerateBenchmark(tasks, gen, *grader, done, on_done);
      std::vector<crb::BenchmarkInstance> all = prior;
      all.insert(all.end(), r.instances.begin(), r.instances.end());
      std::sort(all.begin(), all.end(),
                [](const auto& x, const auto& y) { return x.id < y.id; });
      const std::string out_path = manifest.Path("instances.jsonl");
      crb::WriteInstances(out_path, all);
      fs::remove(partial);
      fs::remove(done_path);
      const std::string log = manifest.Path("log.txt");
      WriteLines(log, r.stats.log);
      manifest.AddOutput("instances", out_path);
      manifest.AddOutput("log", log);
      nlohmann::json stats = r.stats.ToJson();
      stats["instances_total"] = all.size();
      manifest.Set("stats", stats);
      std::cerr << "accepted " << r.stats.accepted << ", discarded "
                << r.stats.discarded << ", skipped " << r.stats.skipped
                << ", sources rejected " << r.stats.sources_rejected << "; "
                << all.size() << " instances in " << out_path << '\n';
    });
  };
}

Runner RegisterCrbEval(CLI::App& app) {
  auto args = std::make_shared<CrbEvalArgs>();
  CLI::App* sub = app.add_subcommand(
      "crb-eval", "Error localization and refinement on code revision instances");
  sub->add_option("--instances", args->instances, "instances.jsonl from crb-gen")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--out", args->out, "Output directory");
  sub->add_option("--protocol", args->protocols, "localization and/or refinement")
      ->check(CLI::IsMember({"localization", "refinement"}));
  sub->add_option("--K", args->ks, "Hit@K cut-offs")->check(CLI::PositiveNumber);
  sub->add_option("--tau", args->tau, "Remasking threshold")
      ->check(CLI::Range(0.0, 1.0));
  sub->add_option("--T", args->steps, "Refinement step counts")
      ->check(CLI::PositiveNumber);
  AddModelOptions(sub, args->model);
  AddGraderOptions(sub, args->grader);

  return [args, sub]() {
    if (!sub->parsed()) return;
    CrbEvalArgs& a = *args;
    RunManifest manifest(a.out, "crb-eval",
                         {{"instances", a.instances},
                          {"protocols", a.protocols},
                          {"K", a.ks},
                          {"tau", a.tau},
                          {"T", a.steps},
                          {"model", ModelConfigJson(a.model)},
                          {"grader", GraderConfig(a.grader)}});
    RunRecorded(manifest, [&] {
      const auto items = crb::ReadInstances(a.instances);
      const crb::CodeVocab vocab = LoadOrBuildVocab(
          a.model, [&] { return crb::CodeVocab::FromInstances(items); },
          manifest);
      std::vector<std::string> originals;
      std::vector<Canonical> refs;
      for (const auto& it : items) {
        originals.push_back(it.original_code);
        refs.push_back({it.original_code, it.tests, it.entry_point});
      }
      auto model = MakeCodeModel(a.model, vocab, originals);
      crb::CrbEvalResult all;
      auto wants = [&](const std::string& p) {
        return std::find(a.protocols.begin(), a.protocols.end(), p) !=
               a.protocols.end();
      };
      if (wants("localization")) {
        crb::CrbEvalResult r =
            crb::RunLocalizationEval(*model, vocab, items, a.ks);
        all.report.Merge(r.report);
        all.log.insert(all.log.end(), r.log.begin(), r.log.end());
        all.summary["localization"] = r.summary;
      }
      if (wants("refinement")) {
        auto grader = MakeGrader(a.grader, refs);
        crb::CrbEvalResult r = crb::RunRefinementEval(
            *model, vocab, items, a.tau, a.steps, *grader, a.grader.timeout_s);
        all.report.Merge(r.report);
        all.log.insert(all.log.end(), r.log.begin(), r.log.end());
        all.summary["refinement"] = r.summary;
      }
      WriteEvalOutputs(manifest, all);
    });
  };
}

Runner RegisterSelfRevise(CLI::App& app) {
  auto args = std::make_shared<SelfReviseArgs>();
  CLI::App* sub = app.add_subcommand(
      "self-revise", "Generate, corrupt one token, refine and grade");
  sub->add_option("--corpus", args->corpus, "Task corpus directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  sub->add_option("--dataset", args->dataset, "Source dataset tag");
  sub->add_option("--out", args->out, "Output directory");
  sub->add_option("--seed", args->seed, "Run seed");
  sub->add_option("--gen-steps", args->gen_steps, "Completion steps")
      ->check(CLI::PositiveNumber);
  sub->add_option("--remask-budget", args->remask_budget,
                  "Initial remask count k0 of the completion schedule")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--confidence-mode", args->confidence_mode, "live | frozen")
      ->check(CLI::IsMember({"live", "frozen"}));
  sub->add_option("--tau", args->tau, "Remasking threshold")
      ->check(CLI::Range(0.0, 1.0));
  sub->add_option("--T", args->steps, "Refinement step counts")
      ->check(CLI::PositiveNumber);
  sub->add_option("--max-attempts", args->max_attempts,
                  "Corruptions tried while the tests keep passing")
      ->check(CLI::PositiveNumber);
  AddModelOptions(sub, args->model);
  AddGraderOptions(sub, args->grader);

  return [args, sub]() {
    if (!sub->parsed()) return;
    SelfReviseArgs& a = *args;
    if (a.dataset.empty()) a.dataset = fs::path(a.corpus).filename().string();
    crb::SelfRevisionConfig cfg;
    cfg.generation.steps = a.gen_steps;
    cfg.generation.remask_budget = a.remask_budget;
    cfg.generation.confidence_mode = a.confidence_mode == "live"
                                         ? ConfidenceMode::kLive
                                         : ConfidenceMode::kFrozen;
    cfg.tau = a.tau;
    cfg.steps = a.steps;
    cfg.max_attempts = a.max_attempts;
    cfg.timeout_s = a.grader.timeout_s;
    cfg.seed = a.seed;
    RunManifest manifest(a.out, "self-revise",
                         {{"corpus", a.corpus},
                          {"dataset", a.dataset},
                          {"self_revision", cfg.ToJson()},
                          {"model", ModelConfigJson(a.model)},
                          {"grader", GraderConfig(a.grader)}});
    RunRecorded(manifest, [&] {
      const auto tasks = crb::LoadCorpus(a.corpus, a.dataset);
      const crb::CodeVocab vocab = LoadOrBuildVocab(
          a.model, [&] { return crb::CodeVocab::FromTasks(tasks); }, manifest);
      std::vector<std::string> originals;
      std::vector<Canonical> refs;
      for (const auto& t : tasks) {
        originals.push_back(t.code);
        refs.push_back({t.code, t.tests, t.entry_point});
      }
      auto model = MakeCodeModel(a.model, vocab, originals);
      auto grader = MakeGrader(a.grader, refs);
      WriteEvalOutputs(manifest,
                       crb::RunSelfRevision(*model, vocab, tasks, *grader, cfg));
    });
  };
}

}  // namespace cdlm::cli
