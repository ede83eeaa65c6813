#pragma once

#include <bit>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "docpretext/model.hpp"
#include "docpretext/sample.hpp"

namespace docpretext {

// Hidden width of the relative-patches head.
inline constexpr int kRelativeHiddenDim = 512;
inline constexpr int kRelativeClasses = 8;

// Head shapes per task: relative_patches gets concat -> 512 -> 8 with a
// ReLU between; every other task is a single linear map from the pooled
// feature (softmax for classes/topics and L2 normalization for nat are
// applied by the loss, not stored).
inline std::vector<LinearLayer> make_head(Task task, int feature_dim,
                                          int out_arity, Rng& rng) {
  if (out_arity <= 0) throw DomainError("make_head: output arity must be positive");
  std::vector<LinearLayer> head;
  if (task == Task::relative_patches) {
    if (out_arity != kRelativeClasses)
      throw DomainError("make_head: relative_patches head must emit 8 classes");
    head.push_back(make_linear(2 * feature_dim, kRelativeHiddenDim, rng));
    head.push_back(make_linear(kRelativeHiddenDim, out_arity, rng));
  } else {
    head.push_back(make_linear(feature_dim, out_arity, rng));
  }
  return head;
}

struct Checkpoint {
  Task task = Task::flips;
  Encoder encoder;
  std::vector<LinearLayer> head;
  std::string config_digest;
  std::uint64_t rng_state = 0;
  std::int64_t step = 0;

  int head_arity() const {
    return head.empty() ? 0 : head.back().out_dim;
  }
};

inline Checkpoint init_checkpoint(Task task, const EncoderSpec& spec,
                                  int out_arity, std::uint64_t seed,
                                  const std::string& config_digest) {
  Rng rng(Rng::derive(seed, "model-init"));
  Checkpoint ckpt;
  ckpt.task = task;
  ckpt.encoder = Encoder::init(spec, rng);
  ckpt.head = make_head(task, spec.feature_dim, out_arity, rng);
  ckpt.config_digest = config_digest;
  ckpt.rng_state = seed;
  return ckpt;
}

// Pooled features for a batch; width is feature_dim for any admissible
// input size.
inline std::vector<std::vector<double>> encoder_forward(
    const Checkpoint& ckpt, const std::vector<GrayImage>& batch) {
  std::vector<std::vector<double>> out;
  out.reserve(batch.size());
  for (const auto& img : batch) out.push_back(ckpt.encoder.forward(img).pooled);
  return out;
}

struct HeadTrace {
  std::vector<std::vector<double>> inputs;  // input to each layer
  std::vector<std::vector<double>> pre;     // linear outputs
};

inline std::vector<double> head_forward(const std::vector<LinearLayer>& head,
                                        const std::vector<double>& feature,
                                        HeadTrace* trace = nullptr) {
  std::vector<double> x = feature;
  for (std::size_t i = 0; i < head.size(); ++i) {
    if (trace) trace->inputs.push_back(x);
    std::vector<double> pre = linear_forward(head[i], x);
    if (trace) trace->pre.push_back(pre);
    if (i + 1 < head.size())
      for (auto& v : pre)
        if (v < 0.0) v = 0.0;
    x = std::move(pre);
  }
  return x;
}

// dlogits -> gradient at the head input; accumulates into dhead
// ([i] = {dw, db}) when provided.
inline std::vector<double> head_backward(
    const std::vector<LinearLayer>& head, const HeadTrace& trace,
    std::vector<double> dlogits,
    std::vector<std::pair<std::vector<double>, std::vector<double>>>* dhead) {
  for (int i = static_cast<int>(head.size()) - 1; i >= 0; --i) {
    if (static_cast<std::size_t>(i) + 1 < head.size()) {
      const auto& pre = trace.pre[static_cast<std::size_t>(i)];
      for (std::size_t j = 0; j < dlogits.size(); ++j)
        if (pre[j] <= 0.0) dlogits[j] = 0.0;
    }
    dlogits = linear_backward(
        head[static_cast<std::size_t>(i)], trace.inputs[static_cast<std::size_t>(i)], dlogits,
        dhead ? &(*dhead)[static_cast<std::size_t>(i)].first : nullptr,
        dhead ? &(*dhead)[static_cast<std::size_t>(i)].second : nullptr);
  }
  return dlogits;
}

// Both patches pass through the same encoder parameters; features are
// concatenated (center first) and fed to the 512 -> 8 head.
inline std::vector<std::vector<double>> siamese_forward(
    const Checkpoint& ckpt,
    const std::vector<std::pair<GrayImage, GrayImage>>& pair_batch) {
  if (ckpt.task != Task::relative_patches)
    throw ContractError("siamese_forward: checkpoint task is not relative_patches");
  std::vector<std::vector<double>> logits;
  logits.reserve(pair_batch.size());
  for (const auto& [a, b] : pair_batch) {
    std::vector<double> fa = ckpt.encoder.forward(a).pooled;
    std::vector<double> fb = ckpt.encoder.forward(b).pooled;
    fa.insert(fa.end(), fb.begin(), fb.end());
    logits.push_back(head_forward(ckpt.head, fa));
  }
  return logits;
}

// --- binary checkpoint file: one JSON header line, then raw
// little-endian float32 parameter blocks in declaration order
// (per conv: weights then biases; per head layer: weights then biases).

namespace detail {

inline void write_f32_le(std::ostream& out, const std::vector<float>& v) {
  for (float f : v) {
    auto bits = std::bit_cast<std::uint32_t>(f);
    char bytes[4] = {static_cast<char>(bits & 0xff),
                     static_cast<char>((bits >> 8) & 0xff),
                     static_cast<char>((bits >> 16) & 0xff),
                     static_cast<char>((bits >> 24) & 0xff)};
    out.write(bytes, 4);
  }
}

inline void read_f32_le(std::istream& in, std::vector<float>& v,
                        const std::string& path) {
  std::vector<unsigned char> buf(v.size() * 4);
  in.read(reinterpret_cast<char*>(buf.data()),
          static_cast<std::streamsize>(buf.size()));
  if (in.gcount() != static_cast<std::streamsize>(buf.size()))
    throw DecodeError("checkpoint: truncated parameter block in " + path);
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::uint32_t bits = static_cast<std::uint32_t>(buf[4 * i]) |
                         (static_cast<std::uint32_t>(buf[4 * i + 1]) << 8) |
                         (static_cast<std::uint32_t>(buf[4 * i + 2]) << 16) |
                         (static_cast<std::uint32_t>(buf[4 * i + 3]) << 24);
    v[i] = std::bit_cast<float>(bits);
  }
}

}  // namespace detail

inline void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  nlohmann::json header;
  header["version"] = 1;
  header["task"] = task_name(ckpt.task);
  header["config_digest"] = ckpt.config_digest;
  header["step"] = ckpt.step;
  header["rng_state"] = ckpt.rng_state;
  nlohmann::json enc;
  enc["feature_dim"] = ckpt.encoder.spec.feature_dim;
  enc["min_input"] = ckpt.encoder.spec.min_input;
  auto stages = nlohmann::json::array();
  for (const auto& st : ckpt.encoder.spec.stages)
    stages.push_back({st.filters, st.kernel, st.stride});
  enc["stages"] = stages;
  header["encoder"] = enc;
  auto head = nlohmann::json::array();
  for (const auto& l : ckpt.head) head.push_back({l.in_dim, l.out_dim});
  header["head"] = head;
  out << header.dump() << '\n';
  for (const auto& conv : ckpt.encoder.convs) {
    detail::write_f32_le(out, conv.w);
    detail::write_f32_le(out, conv.b);
  }
  for (const auto& layer : ckpt.head) {
    detail::write_f32_le(out, layer.w);
    detail::write_f32_le(out, layer.b);
  }
  if (!out) throw IoError("write failed: " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw DecodeError("checkpoint: missing header in " + path);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw DecodeError(std::string("checkpoint: bad header JSON: ") + e.what());
  }
  Checkpoint ckpt;
  try {
    ckpt.task = task_from_name(header.at("task").get<std::string>());
    ckpt.config_digest = header.at("config_digest").get<std::string>();
    ckpt.step = header.at("step").get<std::int64_t>();
    ckpt.rng_state = header.at("rng_state").get<std::uint64_t>();
    const auto& enc = header.at("encoder");
    ckpt.encoder.spec.feature_dim = enc.at("feature_dim").get<int>();
    ckpt.encoder.spec.min_input = enc.at("min_input").get<int>();
    for (const auto& st : enc.at("stages"))
      ckpt.encoder.spec.stages.push_back(
          Stage{st.at(0).get<int>(), st.at(1).get<int>(), st.at(2).get<int>()});
    int in_c = 1;
    for (const auto& st : ckpt.encoder.spec.stages) {
      ConvLayer layer;
      layer.in_c = in_c;
      layer.out_c = st.filters;
      layer.kernel = st.kernel;
      layer.stride = st.stride;
      layer.pad = st.kernel / 2;
      layer.w.resize(layer.weight_count());
      layer.b.resize(static_cast<std::size_t>(st.filters));
      ckpt.encoder.convs.push_back(std::move(layer));
      in_c = st.filters;
    }
    for (const auto& dims : header.at("head")) {
      LinearLayer layer;
      layer.in_dim = dims.at(0).get<int>();
      layer.out_dim = dims.at(1).get<int>();
      layer.w.resize(static_cast<std::size_t>(layer.in_dim) * layer.out_dim);
      layer.b.resize(static_cast<std::size_t>(layer.out_dim));
      ckpt.head.push_back(std::move(layer));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DecodeError(std::string("checkpoint: bad header fields: ") + e.what());
  }
  ckpt.encoder.spec.validate();
  for (auto& conv : ckpt.encoder.convs) {
    detail::read_f32_le(in, conv.w, path);
    detail::read_f32_le(in, conv.b, path);
  }
  for (auto& layer : ckpt.head) {
    detail::read_f32_le(in, layer.w, path);
    detail::read_f32_le(in, layer.b, path);
  }
  return ckpt;
}

// Parameter blocks in declaration order; the layout mirrors the file
// format and is shared by the optimizer and the finite-difference tests.
inline std::vector<std::vector<float>*> param_blocks(Checkpoint& ckpt) {
  std::vector<std::vector<float>*> blocks;
  for (auto& conv : ckpt.encoder.convs) {
    blocks.push_back(&conv.w);
    blocks.push_back(&conv.b);
  }
  for (auto& layer : ckpt.head) {
    blocks.push_back(&layer.w);
    blocks.push_back(&layer.b);
  }
  return blocks;
}

// Zeroed gradient buffers matching param_blocks order.
inline std::vector<std::vector<double>> grad_blocks(const Checkpoint& ckpt) {
  std::vector<std::vector<double>> blocks;
  for (const auto& conv : ckpt.encoder.convs) {
    blocks.emplace_back(conv.w.size(), 0.0);
    blocks.emplace_back(conv.b.size(), 0.0);
  }
  for (const auto& layer : ckpt.head) {
    blocks.emplace_back(layer.w.size(), 0.0);
    blocks.emplace_back(layer.b.size(), 0.0);
  }
  return blocks;
}

}  // namespace docpretext
