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
#include "cdlm/checkpoint.h"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>

namespace cdlm {

namespace {

constexpr char kMagic[8] = {'C', 'D', 'L', 'M', 'C', 'K', 'P', 'T'};
constexpr std::size_t kAlign = 64;

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

template <typename U>
void WritePod(std::ostream& out, U value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(U));
}

template <typename U>
U ReadPod(std::istream& in, const std::string& path) {
  U value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(U))) {
    throw CheckpointError(path + ": truncated header");
  }
  return value;
}

}  // namespace

void SaveCheckpoint(const std::string& path, const Transformer<float>& model,
                    const AdamWState* optimizer, std::int64_t step,
                    const nlohmann::json& metadata) {
  const std::size_t n = model.num_params();
  nlohmann::json header;
  header["config"] = model.config().ToJson();
  header["step"] = step;
  header["metadata"] = metadata;
  header["dtype"] = "float32";
  header["byte_order"] = "little";
  nlohmann::json dir = nlohmann::json::array();
  for (const TensorInfo& t : model.tensors()) {
    dir.push_back({{"name", t.name},
                   {"shape", t.shape},
                   {"offset", t.offset},
                   {"size", t.size},
                   {"weight_decay", t.weight_decay}});
  }
  header["tensors"] = dir;
  header["param_count"] = n;
  if (optimizer != nullptr) {
    if (optimizer->m.size() != n || optimizer->v.size() != n) {
      throw std::invalid_argument("optimizer state does not match the model");
    }
    header["optimizer"] = {{"kind", "adamw"},
                           {"step", optimizer->step},
                           {"m_offset", n},
                           {"v_offset", 2 * n}};
  }
  const std::string text = header.dump();

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot write " + tmp);
    out.write(kMagic, sizeof(kMagic));
    WritePod<std::uint32_t>(out, kCheckpointVersion);
    WritePod<std::uint64_t>(out, text.size());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    const std::size_t used = sizeof(kMagic) + 4 + 8 + text.size();
    const std::string pad((kAlign - used % kAlign) % kAlign, '\0');
    out.write(pad.data(), static_cast<std::streamsize>(pad.size()));
    auto dump = [&out](const float* p, std::size_t count) {
      out.write(reinterpret_cast<const char*>(p),
                static_cast<std::streamsize>(count * sizeof(float)));
    };
    dump(model.params().data(), n);
    if (optimizer != nullptr) {
      dump(optimizer->m.data(), n);
      dump(optimizer->v.data(), n);
    }
    if (!out) throw CheckpointError("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint LoadCheckpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path);
  char magic[sizeof(kMagic)];
  if (!in.read(magic, sizeof(magic)) ||
      std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw CheckpointError(path + ": not a checkpoint (bad magic)");
  }
  const auto version = ReadPod<std::uint32_t>(in, path);
  if (version != kCheckpointVersion) {
    throw CheckpointError(path + ": unsupported version " +
                          std::to_string(version));
  }
  const auto len = ReadPod<std::uint64_t>(in, path);
  if (len > (1u << 26)) throw CheckpointError(path + ": header too large");
  std::string text(len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(len))) {
    throw CheckpointError(path + ": truncated header");
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(path + ": malformed header: " + e.what());
  }
  const std::size_t used = sizeof(kMagic) + 4 + 8 + len;
  in.seekg(static_cast<std::streamoff>(used + (kAlign - used % kAlign) % kAlign));

  Checkpoint ck;
  try {
    ck.config = ModelConfig::FromJson(header.at("config"));
    ck.step = header.at("step").get<std::int64_t>();
    ck.metadata = header.value("metadata", nlohmann::json::object());
    const std::size_t n = header.at("param_count").get<std::size_t>();
    Transformer<float> probe(ck.config);
    if (probe.num_params() != n) {
      throw CheckpointError(path + ": parameter count does not match config");
    }
    const auto& dir = header.at("tensors");
    if (dir.size() != probe.tensors().size()) {
      throw CheckpointError(path + ": tensor directory does not match config");
    }
    for (std::size_t i = 0; i < dir.size(); ++i) {
      const TensorInfo& t = probe.tensors()[i];
      if (dir[i].at("name").get<std::string>() != t.name ||
          dir[i].at("offset").get<std::size_t>() != t.offset ||
          dir[i].at("shape").get<std::vector<int>>() != t.shape) {
        throw CheckpointError(path + ": tensor " + t.name + " mismatch");
      }
    }
    auto read = [&](std::vector<float>& v) {
      v.resize(n);
      if (!in.read(reinterpret_cast<char*>(v.data()),
                   static_cast<std::streamsize>(n * sizeof(float)))) {
        throw CheckpointError(path + ": truncated tensor data");
      }
    };
    read(ck.params);
    if (header.contains("optimizer")) {
      ck.has_optimizer = true;
      ck.optimizer.step = header["optimizer"].at("step").get<std::int64_t>();
      read(ck.optimizer.m);
      read(ck.optimizer.v);
    }
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(path + ": malformed header: " + e.what());
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(path + ": " + e.what());
  }
  return ck;
}

Transformer<float> ModelFromCheckpoint(const Checkpoint& ckpt) {
  Transformer<float> model(ckpt.config);
  if (ckpt.params.size() != model.num_params()) {
    throw CheckpointError("checkpoint parameters do not match its config");
  }
  std::copy(ckpt.params.begin(), ckpt.params.end(), model.params().begin());
  return model;
}

}  // namespace cdlm
