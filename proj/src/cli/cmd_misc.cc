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

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "cdlm/bridge.h"
#include "cdlm/checkpoint.h"
#include "cdlm/corruption.h"
#include "cdlm/denoiser.h"
#include "cdlm/grad_check.h"
#include "cdlm/metrics.h"
#include "cli/cli.h"

namespace cdlm::cli {

namespace {

namespace fs = std::filesystem;

struct GradCheckArgs {
  int layers = 2;
  int hidden = 16;
  int heads = 2;
  int seq_len = 8;
  int vocab = 6;
  int batch = 2;
  int samples = 256;
  double epsilon = 1e-4;
  double alpha = 0.1;
  double lambda_noise = 1.0;
  double perturb = 0.1;
  double tolerance = 1e-3;
  std::uint64_t seed = 0;
  std::string out = "runs/grad_check";
};

struct ReportArgs {
  std::vector<std::string> inputs;
  std::vector<std::string> labels;
  std::string out = "runs/report";
};

struct BridgeServeArgs {
  std::string checkpoint;
  int max_batch = 64;
};

std::string ReadText(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string ResolveMetrics(const std::string& input) {
  if (fs::is_directory(input)) return (fs::path(input) / "metrics.csv").string();
  return input;
}

std::string DefaultLabel(const std::string& input) {
  const fs::path p(input);
  if (fs::is_directory(p)) return p.filename().string();
  return p.parent_path().filename().string();
}

}  // namespace

Runner RegisterGradCheck(CLI::App& app) {
  auto args = std::make_shared<GradCheckArgs>();
  CLI::App* sub = app.add_subcommand(
      "grad-check", "Finite-difference check of the analytic gradients");
  sub->add_option("--layers", args->layers, "Transformer blocks")
      ->check(CLI::PositiveNumber);
  sub->add_option("--hidden", args->hidden, "Model width")
      ->check(CLI::PositiveNumber);
  sub->add_option("--heads", args->heads, "Attention heads")
      ->check(CLI::PositiveNumber);
  sub->add_option("--seq-len", args->seq_len, "Sequence length")
      ->check(CLI::PositiveNumber);
  sub->add_option("--vocab", args->vocab, "Vocabulary size including the mask")
      ->check(CLI::Range(3, 1 << 16));
  sub->add_option("--batch", args->batch, "Sequences in the loss batch")
      ->check(CLI::PositiveNumber);
  sub->add_option("--samples", args->samples, "Parameters checked")
      ->check(CLI::PositiveNumber);
  sub->add_option("--epsilon", args->epsilon, "Central-difference step")
      ->check(CLI::PositiveNumber);
  sub->add_option("--alpha", args->alpha, "Uniform replacement probability")
      ->check(CLI::Range(0.0, 1.0));
  sub->add_option("--lambda-noise", args->lambda_noise, "Replaced-term weight")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--perturb", args->perturb,
                  "Std of Gaussian noise added to the initial parameters")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--tolerance", args->tolerance,
                  "Maximum accepted relative error")
      ->check(CLI::PositiveNumber);
  sub->add_option("--seed", args->seed, "Run seed");
  sub->add_option("--out", args->out, "Output directory");

  return [args, sub]() {
    if (!sub->parsed()) return;
    const GradCheckArgs& a = *args;
    ModelConfig mc;
    mc.layers = a.layers;
    mc.hidden = a.hidden;
    mc.heads = a.heads;
    mc.mlp_ratio = 4;
    mc.dropout = 0.0;
    mc.seq_len = a.seq_len;
    mc.vocab = Vocabulary(a.vocab, 0);
    RunManifest manifest(a.out, "grad-check",
                         {{"model", mc.ToJson()},
                          {"batch", a.batch},
                          {"samples", a.samples},
                          {"epsilon", a.epsilon},
                          {"alpha", a.alpha},
                          {"lambda_noise", a.lambda_noise},
                          {"perturb", a.perturb},
                          {"tolerance", a.tolerance},
                          {"seed", a.seed}});
    RunRecorded(manifest, [&] {
      mc.Validate();
      const Rng root(a.seed);
      Transformer<double> model(mc);
      model.InitParams(root.Split(0));
      Rng noise = root.Split(1);
      for (double& p : model.params()) p += a.perturb * noise.Normal();
      MixtureConfig mix;
      mix.alpha = a.alpha;
      mix.lambda_noise = a.lambda_noise;
      std::vector<GradCheckExample> batch;
      Rng data = root.Split(2);
      for (int b = 0; b < a.batch; ++b) {
        std::vector<Token> tokens;
        for (int i = 0; i < a.seq_len; ++i) {
          tokens.push_back(1 + static_cast<Token>(
                                   data.UniformInt(static_cast<std::uint32_t>(a.vocab - 1))));
        }
        TokenSequence clean(tokens, mc.vocab);
        batch.push_back({clean, MixtureCorrupt(clean, mix,
                                               root.Split(3).Split(
                                                   static_cast<std::uint64_t>(b)))});
      }
      GradCheckOptions opt;
      opt.epsilon = a.epsilon;
      opt.num_samples = a.samples;
      opt.lambda_noise = a.lambda_noise;
      opt.seed = a.seed;
      const GradCheckResult r = GradCheck(model, batch, opt);
      const bool ok = r.max_rel_error < a.tolerance;
      const nlohmann::json result = {{"max_rel_error", r.max_rel_error},
                                     {"worst_param", r.worst_param},
                                     {"worst_analytic", r.worst_analytic},
                                     {"worst_numeric", r.worst_numeric},
                                     {"num_checked", r.num_checked},
                                     {"passed", ok}};
      const std::string path = manifest.Path("grad_check.json");
      std::ofstream(path) << result.dump(2) << '\n';
      manifest.AddOutput("result", path);
      manifest.Set("result", result);
      std::cout << result.dump() << '\n';
      if (!ok) {
        throw std::runtime_error("relative error " +
                                 FormatNumber(r.max_rel_error) +
                                 " exceeds tolerance " +
                                 FormatNumber(a.tolerance));
      }
    });
  };
}

Runner RegisterReport(CLI::App& app) {
  auto args = std::make_shared<ReportArgs>();
  CLI::App* sub = app.add_subcommand(
      "report", "Stack metric tables of several runs into one CSV");
  sub->add_option("--inputs", args->inputs,
                  "Run directories or metrics.csv files")
      ->required();
  sub->add_option("--labels", args->labels,
                  "Run labels (default: run directory names)");
  sub->add_option("--out", args->out, "Output directory");

  return [args, sub]() {
    if (!sub->parsed()) return;
    ReportArgs& a = *args;
    if (!a.labels.empty() && a.labels.size() != a.inputs.size()) {
      throw UsageError("--labels needs one label per input");
    }
    RunManifest manifest(a.out, "report",
                         {{"inputs", a.inputs}, {"labels", a.labels}});
    RunRecorded(manifest, [&] {
      std::string header;
      std::ostringstream body;
      nlohmann::json runs = nlohmann::json::array();
      for (std::size_t i = 0; i < a.inputs.size(); ++i) {
        const std::string path = ResolveMetrics(a.inputs[i]);
        const std::string label =
            a.labels.empty() ? DefaultLabel(a.inputs[i]) : a.labels[i];
        if (label.find_first_of(",\"\n") != std::string::npos) {
          throw UsageError("label '" + label + "' needs CSV quoting");
        }
        const std::string text = ReadText(path);
        const Report parsed = Report::FromCsv(text);
        runs.push_back({{"label", label}, {"path", path}, {"report", parsed.ToJson()}});
        std::istringstream lines(text);
        std::string line;
        std::getline(lines, line);
        if (header.empty()) {
          header = line;
        } else if (line != header) {
          throw UsageError(path + " has columns '" + line + "', expected '" +
                           header + "'");
        }
        while (std::getline(lines, line)) {
          if (!line.empty()) body << label << ',' << line << '\n';
        }
      }
      const std::string csv = manifest.Path("combined.csv");
      const std::string json = manifest.Path("combined.json");
      std::ofstream(csv, std::ios::binary) << "run," << header << '\n'
                                           << body.str();
      std::ofstream(json) << runs.dump(2) << '\n';
      manifest.AddOutput("combined_csv", csv);
      manifest.AddOutput("combined_json", json);
      std::cout << "run," << header << '\n' << body.str();
    });
  };
}

Runner RegisterBridgeServe(CLI::App& app) {
  auto args = std::make_shared<BridgeServeArgs>();
  CLI::App* sub = app.add_subcommand(
      "bridge-serve",
      "Answer model bridge requests on stdin/stdout from a checkpoint");
  sub->add_option("--checkpoint", args->checkpoint, "Model checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--batch", args->max_batch, "Maximum batch per forward pass")
      ->check(CLI::PositiveNumber);

  return [args, sub]() {
    if (!sub->parsed()) return;
    const Checkpoint ckpt = LoadCheckpoint(args->checkpoint);
    auto model =
        std::make_shared<const Transformer<float>>(ModelFromCheckpoint(ckpt));
    TransformerDenoiser denoiser(model, args->max_batch);
    const long long served = ServeBridge(denoiser, std::cin, std::cout);
    std::cerr << "served " << served << " requests\n";
  };
}

}  // namespace cdlm::cli
