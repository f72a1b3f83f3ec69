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
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>

#include "cli/cli.h"

#ifndef CDLM_GIT_DESCRIBE
#define CDLM_GIT_DESCRIBE "unknown"
#endif

namespace cdlm::cli {

namespace {

std::string UtcNow() {
  const std::time_t t =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string VersionStamp() { return CDLM_GIT_DESCRIBE; }

RunManifest::RunManifest(std::string out_dir, std::string subcommand,
                         nlohmann::json config)
    : out_dir_(std::move(out_dir)) {
  doc_["subcommand"] = std::move(subcommand);
  doc_["config"] = std::move(config);
  doc_["version"] = VersionStamp();
  doc_["outputs"] = nlohmann::json::object();
}

std::string RunManifest::Path(const std::string& file) const {
  return (std::filesystem::path(out_dir_) / file).string();
}

void RunManifest::Begin() {
  std::filesystem::create_directories(out_dir_);
  doc_["status"] = "incomplete";
  doc_["started_at"] = UtcNow();
  Write();
}

void RunManifest::AddOutput(const std::string& name, const std::string& path) {
  doc_["outputs"][name] = path;
}

void RunManifest::Set(const std::string& key, nlohmann::json value) {
  doc_[key] = std::move(value);
}

void RunManifest::Complete() {
  doc_["status"] = "complete";
  doc_["finished_at"] = UtcNow();
  Write();
}

void RunManifest::Fail(const std::string& error) {
  doc_["status"] = "incomplete";
  doc_["error"] = error;
  Write();
}

void RunRecorded(RunManifest& manifest, const std::function<void()>& body) {
  manifest.Begin();
  try {
    body();
  } catch (const std::exception& e) {
    manifest.Fail(e.what());
    throw;
  }
  manifest.Complete();
}

void RunManifest::Write() const {
  const std::string path = Path("manifest.json");
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << doc_.dump(2) << '\n';
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace cdlm::cli
