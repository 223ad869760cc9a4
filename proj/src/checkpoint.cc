// src/checkpoint.cc

// Copyright 2026  MTLM toolkit authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "mtlm/checkpoint.h"

#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "mtlm/errors.h"

namespace mtlm {

namespace {

constexpr char kMagic[8] = {'M', 'T', 'L', 'M', 'C', 'K', 'P', '1'};

using json = nlohmann::json;

json config_to_json(const ModelConfig& c) {
  return json{{"n_layers", c.n_layers},
              {"n_heads", c.n_heads},
              {"d_model", c.d_model},
              {"d_ff", c.d_ff},
              {"vocab_size", c.vocab_size},
              {"max_len", c.max_len},
              {"dropout", c.dropout},
              {"pre_norm", c.pre_norm},
              {"learned_positions", c.learned_positions},
              {"mask_inputs", c.mask_inputs},
              {"activation", c.activation}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.n_layers = j.at("n_layers").get<std::size_t>();
  c.n_heads = j.at("n_heads").get<std::size_t>();
  c.d_model = j.at("d_model").get<std::size_t>();
  c.d_ff = j.at("d_ff").get<std::size_t>();
  c.vocab_size = j.at("vocab_size").get<std::size_t>();
  c.max_len = j.at("max_len").get<std::size_t>();
  c.dropout = j.at("dropout").get<double>();
  c.pre_norm = j.at("pre_norm").get<bool>();
  c.learned_positions = j.at("learned_positions").get<bool>();
  c.mask_inputs = j.at("mask_inputs").get<bool>();
  c.activation = j.at("activation").get<std::string>();
  return c;
}

std::uint64_t fnv1a(const std::string& bytes, std::uint64_t h = 1469598103934665603ull) {
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

void write_doubles(std::ofstream& out, const Tensor& t) {
  out.write(reinterpret_cast<const char*>(t.data.data()),
            static_cast<std::streamsize>(t.data.size() * sizeof(double)));
}

void read_doubles(std::ifstream& in, Tensor& t) {
  in.read(reinterpret_cast<char*>(t.data.data()),
          static_cast<std::streamsize>(t.data.size() * sizeof(double)));
  if (!in) throw DataError("checkpoint: truncated tensor payload");
}

}  // namespace

Checkpoint Checkpoint::capture(const Model& model, const AdamState& adam,
                               std::uint64_t vocab_fingerprint) {
  Checkpoint c;
  c.config = model.config;
  c.step = adam.step;
  c.vocab_fingerprint = vocab_fingerprint;
  for (const auto& [name, var] : model.params.named()) {
    c.names.push_back(name);
    c.params.push_back(var->value);
  }
  c.adam = adam;
  MTLM_CHECK(c.adam.m.size() == c.params.size() && c.adam.v.size() == c.params.size(),
             "Checkpoint::capture: optimizer state does not match parameters");
  return c;
}

Model Checkpoint::restore_model() const {
  Rng unused(0);
  Model m = init_model(config, unused);
  auto named = m.params.named();
  MTLM_CHECK(named.size() == params.size(), "checkpoint: parameter count mismatch");
  for (std::size_t i = 0; i < named.size(); ++i) {
    MTLM_CHECK(named[i].first == names[i], "checkpoint: parameter name mismatch");
    MTLM_CHECK(named[i].second->value.same_shape(params[i]),
               "checkpoint: parameter shape mismatch");
    named[i].second->value = params[i];
  }
  return m;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  json header;
  header["config"] = config_to_json(ckpt.config);
  header["step"] = ckpt.step;
  header["vocab_fp"] = ckpt.vocab_fingerprint;
  header["adam"] = json{{"beta1", ckpt.adam.beta1},
                        {"beta2", ckpt.adam.beta2},
                        {"epsilon", ckpt.adam.epsilon},
                        {"step", ckpt.adam.step}};
  json tensors = json::array();
  for (std::size_t i = 0; i < ckpt.names.size(); ++i) {
    tensors.push_back(json{{"name", ckpt.names[i]}, {"shape", ckpt.params[i].shape}});
  }
  header["tensors"] = tensors;
  const std::string cfg_dump = header["config"].dump();
  header["config_fp"] = fnv1a(cfg_dump, fnv1a(std::to_string(ckpt.vocab_fingerprint)));
  const std::string head = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("checkpoint save: cannot open " + path);
  out.write(kMagic, sizeof(kMagic));
  const std::uint64_t head_len = head.size();
  out.write(reinterpret_cast<const char*>(&head_len), sizeof(head_len));
  out.write(head.data(), static_cast<std::streamsize>(head.size()));
  for (const Tensor& t : ckpt.params) write_doubles(out, t);
  for (const Tensor& t : ckpt.adam.m) write_doubles(out, t);
  for (const Tensor& t : ckpt.adam.v) write_doubles(out, t);
  if (!out) throw DataError("checkpoint save: write failure on " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("checkpoint load: cannot open " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw DataError("checkpoint load: bad magic in " + path);
  }
  std::uint64_t head_len = 0;
  in.read(reinterpret_cast<char*>(&head_len), sizeof(head_len));
  if (!in) throw DataError("checkpoint load: truncated header length");
  std::string head(head_len, '\0');
  in.read(head.data(), static_cast<std::streamsize>(head_len));
  if (!in) throw DataError("checkpoint load: truncated header");

  json header = json::parse(head, nullptr, false);
  if (header.is_discarded()) throw DataError("checkpoint load: invalid header JSON");

  Checkpoint c;
  c.config = config_from_json(header.at("config"));
  c.step = header.at("step").get<std::uint64_t>();
  c.vocab_fingerprint = header.at("vocab_fp").get<std::uint64_t>();
  c.adam.beta1 = header.at("adam").at("beta1").get<double>();
  c.adam.beta2 = header.at("adam").at("beta2").get<double>();
  c.adam.epsilon = header.at("adam").at("epsilon").get<double>();
  c.adam.step = header.at("adam").at("step").get<std::uint64_t>();
  for (const auto& tj : header.at("tensors")) {
    c.names.push_back(tj.at("name").get<std::string>());
    c.params.emplace_back(tj.at("shape").get<std::vector<std::size_t>>());
  }
  for (Tensor& t : c.params) read_doubles(in, t);
  c.adam.m.reserve(c.params.size());
  c.adam.v.reserve(c.params.size());
  for (const Tensor& t : c.params) c.adam.m.emplace_back(Tensor::zeros(t.shape));
  for (const Tensor& t : c.params) c.adam.v.emplace_back(Tensor::zeros(t.shape));
  for (Tensor& t : c.adam.m) read_doubles(in, t);
  for (Tensor& t : c.adam.v) read_doubles(in, t);
  return c;
}

}  // namespace mtlm
