#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "docpretext/common.hpp"
#include "docpretext/image.hpp"
#include "docpretext/rng.hpp"
#include "docpretext/sample.hpp"

namespace docpretext {

// Activations are double end to end; parameters are stored as float32
// (the checkpoint wire format) and widened per use.

struct FeatureMap {
  int c = 0, h = 0, w = 0;
  std::vector<double> v;

  FeatureMap() = default;
  FeatureMap(int c_, int h_, int w_)
      : c(c_), h(h_), w(w_),
        v(static_cast<std::size_t>(c_) * h_ * w_, 0.0) {}

  double& at(int ci, int y, int x) {
    return v[(static_cast<std::size_t>(ci) * h + y) * w + x];
  }
  double at(int ci, int y, int x) const {
    return v[(static_cast<std::size_t>(ci) * h + y) * w + x];
  }
};

struct Stage {
  int filters = 0;
  int kernel = 3;
  int stride = 2;
};

struct EncoderSpec {
  std::vector<Stage> stages;
  int feature_dim = 0;  // width after global average pooling
  int min_input = 0;

  void validate() const {
    if (stages.empty()) throw DomainError("EncoderSpec: no stages");
    for (const auto& s : stages)
      if (s.filters <= 0 || s.kernel <= 0 || s.stride <= 0)
        throw DomainError("EncoderSpec: stage fields must be positive");
    if (feature_dim != stages.back().filters)
      throw DomainError("EncoderSpec: feature_dim != last stage filters");
    if (min_input <= 0) throw DomainError("EncoderSpec: min_input must be positive");
  }
};

// Desk-scale default: 4 stride-2 stages to a 256-wide pooled feature.
inline EncoderSpec default_encoder_spec() {
  EncoderSpec spec;
  spec.stages = {{32, 3, 2}, {64, 3, 2}, {128, 3, 2}, {256, 3, 2}};
  spec.feature_dim = 256;
  spec.min_input = 96;
  return spec;
}

// Small preset for tests and fast CPU runs.
inline EncoderSpec tiny_encoder_spec() {
  EncoderSpec spec;
  spec.stages = {{8, 3, 2}, {16, 3, 2}, {32, 3, 2}};
  spec.feature_dim = 32;
  spec.min_input = 16;
  return spec;
}

inline EncoderSpec encoder_spec_by_name(const std::string& name) {
  if (name == "default") return default_encoder_spec();
  if (name == "tiny") return tiny_encoder_spec();
  throw ConfigError("unknown encoder preset '" + name + "' (default, tiny)");
}

struct ConvLayer {
  int in_c = 0, out_c = 0, kernel = 0, stride = 1, pad = 0;
  std::vector<float> w;  // [out_c][in_c][kernel][kernel]
  std::vector<float> b;  // [out_c]

  std::size_t weight_count() const {
    return static_cast<std::size_t>(out_c) * in_c * kernel * kernel;
  }
};

struct LinearLayer {
  int in_dim = 0, out_dim = 0;
  std::vector<float> w;  // [out_dim][in_dim]
  std::vector<float> b;  // [out_dim]
};

namespace detail {

inline float he_uniform(Rng& rng, int fan_in) {
  double lim = std::sqrt(6.0 / fan_in);
  return static_cast<float>((2.0 * rng.real01() - 1.0) * lim);
}

}  // namespace detail

inline ConvLayer make_conv(int in_c, const Stage& st, Rng& rng) {
  ConvLayer layer;
  layer.in_c = in_c;
  layer.out_c = st.filters;
  layer.kernel = st.kernel;
  layer.stride = st.stride;
  layer.pad = st.kernel / 2;
  layer.w.resize(layer.weight_count());
  layer.b.assign(static_cast<std::size_t>(st.filters), 0.0f);
  int fan_in = in_c * st.kernel * st.kernel;
  for (auto& v : layer.w) v = detail::he_uniform(rng, fan_in);
  return layer;
}

inline LinearLayer make_linear(int in_dim, int out_dim, Rng& rng) {
  LinearLayer layer;
  layer.in_dim = in_dim;
  layer.out_dim = out_dim;
  layer.w.resize(static_cast<std::size_t>(in_dim) * out_dim);
  layer.b.assign(static_cast<std::size_t>(out_dim), 0.0f);
  for (auto& v : layer.w) v = detail::he_uniform(rng, in_dim);
  return layer;
}

inline int conv_out_dim(int in, int kernel, int stride, int pad) {
  return (in + 2 * pad - kernel) / stride + 1;
}

inline FeatureMap conv_forward(const ConvLayer& layer, const FeatureMap& in) {
  int oh = conv_out_dim(in.h, layer.kernel, layer.stride, layer.pad);
  int ow = conv_out_dim(in.w, layer.kernel, layer.stride, layer.pad);
  if (oh <= 0 || ow <= 0) throw DomainError("conv_forward: input too small");
  FeatureMap out(layer.out_c, oh, ow);
  for (int oc = 0; oc < layer.out_c; ++oc) {
    for (int y = 0; y < oh; ++y) {
      for (int x = 0; x < ow; ++x) {
        double acc = layer.b[static_cast<std::size_t>(oc)];
        int iy0 = y * layer.stride - layer.pad;
        int ix0 = x * layer.stride - layer.pad;
        for (int ic = 0; ic < layer.in_c; ++ic) {
          const std::size_t wbase =
              ((static_cast<std::size_t>(oc) * layer.in_c + ic) * layer.kernel) *
              layer.kernel;
          for (int ky = 0; ky < layer.kernel; ++ky) {
            int iy = iy0 + ky;
            if (iy < 0 || iy >= in.h) continue;
            for (int kx = 0; kx < layer.kernel; ++kx) {
              int ix = ix0 + kx;
              if (ix < 0 || ix >= in.w) continue;
              acc += static_cast<double>(
                         layer.w[wbase + static_cast<std::size_t>(ky) * layer.kernel + kx]) *
                     in.at(ic, iy, ix);
            }
          }
        }
        out.at(oc, y, x) = acc;
      }
    }
  }
  return out;
}

// dout is the gradient at the pre-activation output. Accumulates into dw
// and db; fills din when requested.
inline void conv_backward(const ConvLayer& layer, const FeatureMap& in,
                          const FeatureMap& dout, std::vector<double>* dw,
                          std::vector<double>* db, FeatureMap* din) {
  if (din) *din = FeatureMap(in.c, in.h, in.w);
  for (int oc = 0; oc < layer.out_c; ++oc) {
    for (int y = 0; y < dout.h; ++y) {
      for (int x = 0; x < dout.w; ++x) {
        double g = dout.at(oc, y, x);
        if (g == 0.0) continue;
        if (db) (*db)[static_cast<std::size_t>(oc)] += g;
        int iy0 = y * layer.stride - layer.pad;
        int ix0 = x * layer.stride - layer.pad;
        for (int ic = 0; ic < layer.in_c; ++ic) {
          const std::size_t wbase =
              ((static_cast<std::size_t>(oc) * layer.in_c + ic) * layer.kernel) *
              layer.kernel;
          for (int ky = 0; ky < layer.kernel; ++ky) {
            int iy = iy0 + ky;
            if (iy < 0 || iy >= in.h) continue;
            for (int kx = 0; kx < layer.kernel; ++kx) {
              int ix = ix0 + kx;
              if (ix < 0 || ix >= in.w) continue;
              std::size_t wi = wbase + static_cast<std::size_t>(ky) * layer.kernel + kx;
              if (dw) (*dw)[wi] += g * in.at(ic, iy, ix);
              if (din)
                din->at(ic, iy, ix) += g * static_cast<double>(layer.w[wi]);
            }
          }
        }
      }
    }
  }
}

inline void relu_inplace(FeatureMap& m) {
  for (auto& v : m.v)
    if (v < 0.0) v = 0.0;
}

// Masks dpost by the sign of the pre-activation map.
inline void relu_backward_inplace(const FeatureMap& pre, FeatureMap& dpost) {
  for (std::size_t i = 0; i < pre.v.size(); ++i)
    if (pre.v[i] <= 0.0) dpost.v[i] = 0.0;
}

struct EncoderTrace {
  FeatureMap input;
  std::vector<FeatureMap> pre;   // conv outputs
  std::vector<FeatureMap> post;  // after relu
  std::vector<double> pooled;    // global average pooling
};

inline FeatureMap image_to_map(const GrayImage& img) {
  FeatureMap m(1, img.height, img.width);
  for (std::size_t i = 0; i < img.data.size(); ++i)
    m.v[i] = static_cast<double>(img.data[i]);
  return m;
}

struct Encoder {
  EncoderSpec spec;
  std::vector<ConvLayer> convs;

  static Encoder init(const EncoderSpec& spec, Rng& rng) {
    spec.validate();
    Encoder enc;
    enc.spec = spec;
    int in_c = 1;
    for (const auto& st : spec.stages) {
      enc.convs.push_back(make_conv(in_c, st, rng));
      in_c = st.filters;
    }
    return enc;
  }

  void check_input(const GrayImage& img) const {
    if (img.height != img.width)
      throw DomainError("encoder: input must be square");
    if (img.height < spec.min_input)
      throw DomainError("encoder: input side " + std::to_string(img.height) +
                        " below min_input " + std::to_string(spec.min_input));
  }

  EncoderTrace forward(const GrayImage& img) const {
    check_input(img);
    EncoderTrace trace;
    trace.input = image_to_map(img);
    const FeatureMap* cur = &trace.input;
    for (const auto& conv : convs) {
      trace.pre.push_back(conv_forward(conv, *cur));
      FeatureMap post = trace.pre.back();
      relu_inplace(post);
      trace.post.push_back(std::move(post));
      cur = &trace.post.back();
    }
    const FeatureMap& last = trace.post.back();
    trace.pooled.assign(static_cast<std::size_t>(last.c), 0.0);
    double inv = 1.0 / (static_cast<double>(last.h) * last.w);
    for (int c = 0; c < last.c; ++c) {
      double s = 0.0;
      for (int y = 0; y < last.h; ++y)
        for (int x = 0; x < last.w; ++x) s += last.at(c, y, x);
      trace.pooled[static_cast<std::size_t>(c)] = s * inv;
    }
    return trace;
  }

  // Backward from a pooled-feature gradient. Accumulates parameter
  // gradients into dconvs ([i] = {dw, db}); returns the input gradient
  // when want_dinput is set.
  FeatureMap backward(const EncoderTrace& trace,
                      const std::vector<double>& dpooled,
                      std::vector<std::pair<std::vector<double>, std::vector<double>>>* dconvs,
                      bool want_dinput = false) const {
    const FeatureMap& last = trace.post.back();
    FeatureMap grad(last.c, last.h, last.w);
    double inv = 1.0 / (static_cast<double>(last.h) * last.w);
    for (int c = 0; c < last.c; ++c) {
      double g = dpooled[static_cast<std::size_t>(c)] * inv;
      for (int y = 0; y < last.h; ++y)
        for (int x = 0; x < last.w; ++x) grad.at(c, y, x) = g;
    }
    for (int i = static_cast<int>(convs.size()) - 1; i >= 0; --i) {
      relu_backward_inplace(trace.pre[static_cast<std::size_t>(i)], grad);
      const FeatureMap& in =
          i == 0 ? trace.input : trace.post[static_cast<std::size_t>(i - 1)];
      FeatureMap din;
      bool need_din = i > 0 || want_dinput;
      conv_backward(convs[static_cast<std::size_t>(i)], in, grad,
                    dconvs ? &(*dconvs)[static_cast<std::size_t>(i)].first : nullptr,
                    dconvs ? &(*dconvs)[static_cast<std::size_t>(i)].second : nullptr,
                    need_din ? &din : nullptr);
      grad = std::move(din);
    }
    return grad;
  }
};

inline std::vector<double> linear_forward(const LinearLayer& layer,
                                          const std::vector<double>& in) {
  if (static_cast<int>(in.size()) != layer.in_dim)
    throw DomainError("linear_forward: input width mismatch");
  std::vector<double> out(static_cast<std::size_t>(layer.out_dim));
  for (int o = 0; o < layer.out_dim; ++o) {
    double acc = layer.b[static_cast<std::size_t>(o)];
    const std::size_t base = static_cast<std::size_t>(o) * layer.in_dim;
    for (int i = 0; i < layer.in_dim; ++i)
      acc += static_cast<double>(layer.w[base + static_cast<std::size_t>(i)]) * in[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(o)] = acc;
  }
  return out;
}

inline std::vector<double> linear_backward(const LinearLayer& layer,
                                           const std::vector<double>& in,
                                           const std::vector<double>& dout,
                                           std::vector<double>* dw,
                                           std::vector<double>* db) {
  std::vector<double> din(static_cast<std::size_t>(layer.in_dim), 0.0);
  for (int o = 0; o < layer.out_dim; ++o) {
    double g = dout[static_cast<std::size_t>(o)];
    if (db) (*db)[static_cast<std::size_t>(o)] += g;
    const std::size_t base = static_cast<std::size_t>(o) * layer.in_dim;
    for (int i = 0; i < layer.in_dim; ++i) {
      if (dw) (*dw)[base + static_cast<std::size_t>(i)] += g * in[static_cast<std::size_t>(i)];
      din[static_cast<std::size_t>(i)] += g * static_cast<double>(layer.w[base + static_cast<std::size_t>(i)]);
    }
  }
  return din;
}

inline std::vector<double> softmax(const std::vector<double>& logits) {
  if (logits.empty()) throw DomainError("softmax: empty logits");
  double mx = logits[0];
  for (double v : logits) mx = std::max(mx, v);
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - mx);
    sum += p[i];
  }
  for (auto& v : p) v /= sum;
  return p;
}

inline double log_sum_exp(const std::vector<double>& logits) {
  double mx = logits[0];
  for (double v : logits) mx = std::max(mx, v);
  double sum = 0.0;
  for (double v : logits) sum += std::exp(v - mx);
  return mx + std::log(sum);
}

// Negative log softmax probability of the target class.
inline double ce_loss(const std::vector<double>& logits, int target) {
  if (logits.empty()) throw DomainError("ce_loss: empty logits");
  if (target < 0 || target >= static_cast<int>(logits.size()))
    throw DomainError("ce_loss: target outside logits range");
  return log_sum_exp(logits) - logits[static_cast<std::size_t>(target)];
}

// Cross-entropy H(theta, softmax(logits)).
inline double soft_ce_loss(const std::vector<double>& logits,
                           const SoftLabel& theta) {
  if (logits.size() != theta.theta.size())
    throw DomainError("soft_ce_loss: logits/theta length mismatch");
  theta.validate();
  double lse = log_sum_exp(logits);
  double loss = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k)
    loss += theta.theta[k] * (lse - logits[k]);
  return loss;
}

inline double entropy(const SoftLabel& theta) {
  double h = 0.0;
  for (double p : theta.theta)
    if (p > 0.0) h -= p * std::log(p);
  return h;
}

// d(ce_loss)/d(logits) = softmax - onehot(target).
inline std::vector<double> ce_loss_grad(const std::vector<double>& logits,
                                        int target) {
  std::vector<double> g = softmax(logits);
  g[static_cast<std::size_t>(target)] -= 1.0;
  return g;
}

// d(soft_ce_loss)/d(logits) = softmax - theta.
inline std::vector<double> soft_ce_loss_grad(const std::vector<double>& logits,
                                             const SoftLabel& theta) {
  std::vector<double> g = softmax(logits);
  for (std::size_t k = 0; k < g.size(); ++k) g[k] -= theta.theta[k];
  return g;
}

// y = x / ||x||; returns y and writes ||x|| for the backward pass.
inline std::vector<double> l2_normalize(const std::vector<double>& x,
                                        double* norm_out) {
  double sq = 0.0;
  for (double v : x) sq += v * v;
  double norm = std::sqrt(sq);
  if (norm == 0.0) throw DomainError("l2_normalize: zero vector");
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] / norm;
  if (norm_out) *norm_out = norm;
  return y;
}

// Pullback of y = x/||x||: dx = (dy - (dy.y) y) / ||x||.
inline std::vector<double> l2_normalize_backward(const std::vector<double>& y,
                                                 double norm,
                                                 const std::vector<double>& dy) {
  double proj = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) proj += dy[i] * y[i];
  std::vector<double> dx(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) dx[i] = (dy[i] - proj * y[i]) / norm;
  return dx;
}

}  // namespace docpretext
