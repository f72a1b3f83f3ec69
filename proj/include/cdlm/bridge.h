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
// Line-delimited JSON model bridge.
//
//   request:  {"id": <int>, "tokens": [<int>, ...]}
//   response: {"id": <int>, "probs": [[<float> x vocab], ...]}
//             {"id": <int>, "error": "<message>"} on failure
//
// BridgeDenoiser talks to a peer over a pair of streams; SubprocessBridge
// spawns the peer command and owns its pipes; ServeBridge answers requests
// from any in-process denoiser.

#ifndef CDLM_BRIDGE_H_
#define CDLM_BRIDGE_H_

#include <cstdio>
#include <istream>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cdlm/denoiser.h"

namespace cdlm {

class BridgeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

nlohmann::json MakeBridgeRequest(long long id, const TokenSequence& z);
// Parses one response; throws BridgeError on an error reply or bad shape.
Distribution ParseBridgeResponse(const nlohmann::json& j, long long expected_id,
                                 int positions, int vocab);

class BridgeDenoiser : public DenoiserInterface {
 public:
  // Requests go to `to_peer`, responses are read from `from_peer`.
  BridgeDenoiser(Vocabulary vocab, std::ostream& to_peer,
                 std::istream& from_peer);

  const Vocabulary& vocab() const override { return vocab_; }
  std::vector<Distribution> PredictBatch(
      const std::vector<TokenSequence>& inputs) override;

 private:
  Vocabulary vocab_;
  std::ostream& out_;
  std::istream& in_;
  long long next_id_ = 0;
};

// Runs `command` under /bin/sh with its stdin/stdout connected to the bridge.
class SubprocessBridge : public DenoiserInterface {
 public:
  SubprocessBridge(Vocabulary vocab, const std::string& command);
  ~SubprocessBridge() override;
  SubprocessBridge(const SubprocessBridge&) = delete;
  SubprocessBridge& operator=(const SubprocessBridge&) = delete;

  const Vocabulary& vocab() const override { return vocab_; }
  std::vector<Distribution> PredictBatch(
      const std::vector<TokenSequence>& inputs) override;

 private:
  std::string ReadLine();

  Vocabulary vocab_;
  int pid_ = -1;
  std::FILE* to_child_ = nullptr;
  std::FILE* from_child_ = nullptr;
  long long next_id_ = 0;
};

// Answers requests until end of input. Malformed requests get an error reply
// naming the line number. Returns the number of requests served.
long long ServeBridge(DenoiserInterface& model, std::istream& in,
                      std::ostream& out);

}  // namespace cdlm

#endif  // CDLM_BRIDGE_H_
