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
#include "cdlm/bridge.h"

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace cdlm {

nlohmann::json MakeBridgeRequest(long long id, const TokenSequence& z) {
  return {{"id", id}, {"tokens", z.tokens()}};
}

Distribution ParseBridgeResponse(const nlohmann::json& j, long long expected_id,
                                 int positions, int vocab) {
  try {
    const long long id = j.at("id").get<long long>();
    if (id != expected_id) {
      throw BridgeError("bridge response id " + std::to_string(id) +
                        " where " + std::to_string(expected_id) + " expected");
    }
    if (j.contains("error")) {
      throw BridgeError("bridge peer error for id " + std::to_string(id) +
                        ": " + j["error"].get<std::string>());
    }
    const auto& rows = j.at("probs");
    if (!rows.is_array() || static_cast<int>(rows.size()) != positions) {
      throw BridgeError("bridge response has the wrong number of positions");
    }
    Distribution d{positions, vocab, {}};
    d.probs.reserve(static_cast<std::size_t>(positions) * vocab);
    for (const auto& row : rows) {
      if (!row.is_array() || static_cast<int>(row.size()) != vocab) {
        throw BridgeError("bridge response row has the wrong width");
      }
      for (const auto& p : row) d.probs.push_back(p.get<double>());
    }
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw BridgeError(std::string("malformed bridge response: ") + e.what());
  }
}

BridgeDenoiser::BridgeDenoiser(Vocabulary vocab, std::ostream& to_peer,
                               std::istream& from_peer)
    : vocab_(vocab), out_(to_peer), in_(from_peer) {}

std::vector<Distribution> BridgeDenoiser::PredictBatch(
    const std::vector<TokenSequence>& inputs) {
  const long long first = next_id_;
  for (const TokenSequence& z : inputs) {
    out_ << MakeBridgeRequest(next_id_++, z).dump() << '\n';
  }
  out_.flush();
  std::vector<Distribution> result;
  result.reserve(inputs.size());
  std::string line;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (!std::getline(in_, line)) throw BridgeError("bridge peer closed the stream");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw BridgeError(std::string("malformed bridge response: ") + e.what());
    }
    result.push_back(ParseBridgeResponse(j, first + static_cast<long long>(i),
                                         inputs[i].size(), vocab_.size()));
  }
  return result;
}

SubprocessBridge::SubprocessBridge(Vocabulary vocab, const std::string& command)
    : vocab_(vocab) {
  int to_child[2];
  int from_child[2];
  if (pipe(to_child) != 0) throw BridgeError(std::strerror(errno));
  if (pipe(from_child) != 0) {
    close(to_child[0]);
    close(to_child[1]);
    throw BridgeError(std::strerror(errno));
  }
  pid_ = fork();
  if (pid_ < 0) throw BridgeError(std::string("fork: ") + std::strerror(errno));
  if (pid_ == 0) {
    dup2(to_child[0], STDIN_FILENO);
    dup2(from_child[1], STDOUT_FILENO);
    close(to_child[0]);
    close(to_child[1]);
    close(from_child[0]);
    close(from_child[1]);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(to_child[0]);
  close(from_child[1]);
  to_child_ = fdopen(to_child[1], "w");
  from_child_ = fdopen(from_child[0], "r");
  if (to_child_ == nullptr || from_child_ == nullptr) {
    throw BridgeError("fdopen failed");
  }
  signal(SIGPIPE, SIG_IGN);
}

SubprocessBridge::~SubprocessBridge() {
  if (to_child_ != nullptr) std::fclose(to_child_);
  if (from_child_ != nullptr) std::fclose(from_child_);
  if (pid_ > 0) {
    int status = 0;
    waitpid(pid_, &status, 0);
  }
}

std::string SubprocessBridge::ReadLine() {
  std::string line;
  int ch;
  while ((ch = std::fgetc(from_child_)) != EOF) {
    if (ch == '\n') return line;
    line.push_back(static_cast<char>(ch));
  }
  throw BridgeError("bridge subprocess closed its output");
}

std::vector<Distribution> SubprocessBridge::PredictBatch(
    const std::vector<TokenSequence>& inputs) {
  const long long first = next_id_;
  for (const TokenSequence& z : inputs) {
    const std::string line = MakeBridgeRequest(next_id_++, z).dump() + "\n";
    if (std::fwrite(line.data(), 1, line.size(), to_child_) != line.size()) {
      throw BridgeError("cannot write to bridge subprocess");
    }
  }
  if (std::fflush(to_child_) != 0) {
    throw BridgeError("cannot write to bridge subprocess");
  }
  std::vector<Distribution> result;
  result.reserve(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(ReadLine());
    } catch (const nlohmann::json::exception& e) {
      throw BridgeError(std::string("malformed bridge response: ") + e.what());
    }
    result.push_back(ParseBridgeResponse(j, first + static_cast<long long>(i),
                                         inputs[i].size(), vocab_.size()));
  }
  return result;
}

long long ServeBridge(DenoiserInterface& model, std::istream& in,
                      std::ostream& out) {
  long long served = 0;
  long long lineno = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json reply;
    nlohmann::json id = nullptr;
    try {
      const auto req = nlohmann::json::parse(line);
      id = req.at("id");
      const TokenSequence z(req.at("tokens").get<std::vector<Token>>(),
                            model.vocab());
      const Distribution d = model.Predict(z);
      nlohmann::json rows = nlohmann::json::array();
      for (int i = 0; i < d.positions; ++i) {
        rows.push_back(std::vector<double>(d.row(i), d.row(i) + d.vocab));
      }
      reply = {{"id", id}, {"probs", std::move(rows)}};
      ++served;
    } catch (const std::exception& e) {
      reply = {{"id", id},
               {"error", "line " + std::to_string(lineno) + ": " + e.what()}};
    }
    out << reply.dump() << '\n';
    out.flush();
  }
  return served;
}

}  // namespace cdlm
