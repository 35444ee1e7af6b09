// Copyright (c) 2026 The CED Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CED_CONFORMER_H_
#define CED_CONFORMER_H_

#include <memory>
#include <string>
#include <vector>

#include "ced/nn.h"

namespace ced {
namespace nn {

struct ConformerSettings {
  int input_dim = 80;
  int layers = 6;
  int dim = 144;
  int heads = 4;
  int conv_kernel = 3;
  int subsampling_factor = 4;  // 1, 2 or 4 (two stride-s convolutions)
  int ffn_expansion = 4;
  double dropout = 0.1;

  void Validate() const {
    Check(dim % heads == 0, ErrorKind::kInvalidInput, "dim must be divisible by heads");
    Check(subsampling_factor == 1 || subsampling_factor == 2 || subsampling_factor == 4,
          ErrorKind::kInvalidInput, "subsampling_factor must be 1, 2 or 4");
    Check(conv_kernel % 2 == 1, ErrorKind::kInvalidInput, "conv kernel must be odd");
    Check(dropout >= 0.0 && dropout < 1.0, ErrorKind::kInvalidInput, "dropout must be in [0,1)");
    Check(layers >= 1 && dim >= 1 && ffn_expansion >= 1 && input_dim >= 1,
          ErrorKind::kInvalidInput, "conformer sizes must be positive");
  }
};

// Half-step feed-forward: LN -> Dense -> Swish -> Dropout -> Dense -> Dropout.
template <typename S>
class FeedForward {
 public:
  FeedForward(const std::string& name, int dim, int expansion, double dropout)
      : ln_(name + ".ln", dim),
        lin1_(name + ".lin1", dim, dim * expansion),
        lin2_(name + ".lin2", dim * expansion, dim),
        drop1_(dropout),
        drop2_(dropout) {}

  void Collect(ParamSet<S>* ps) {
    ln_.Collect(ps);
    lin1_.Collect(ps);
    lin2_.Collect(ps);
  }
  void Init(Rng* rng) {
    lin1_.Init(rng);
    lin2_.Init(rng);
  }

  Mat<S> Forward(const Mat<S>& x, const Ctx& ctx) {
    return drop2_.Forward(lin2_.Forward(drop1_.Forward(act_.Forward(lin1_.Forward(ln_.Forward(x))), ctx)), ctx);
  }
  Mat<S> Backward(const Mat<S>& gy) {
    return ln_.Backward(lin1_.Backward(act_.Backward(drop1_.Backward(lin2_.Backward(drop2_.Backward(gy))))));
  }

 private:
  LayerNorm<S> ln_;
  Dense<S> lin1_, lin2_;
  Swish<S> act_;
  Dropout<S> drop1_, drop2_;
};

// Conv module: LN -> pointwise(2d) -> GLU -> depthwise -> LN -> Swish ->
// pointwise(d) -> Dropout. Per-frame LayerNorm stands in for batch norm so
// single-utterance training stays batch-independent.
template <typename S>
class ConvModule {
 public:
  ConvModule(const std::string& name, int dim, int kernel, double dropout)
      : ln_(name + ".ln", dim),
        pw1_(name + ".pw1", dim, 2 * dim),
        dw_(name + ".dw", dim, kernel),
        ln2_(name + ".ln2", dim),
        pw2_(name + ".pw2", dim, dim),
        drop_(dropout) {}

  void Collect(ParamSet<S>* ps) {
    ln_.Collect(ps);
    pw1_.Collect(ps);
    dw_.Collect(ps);
    ln2_.Collect(ps);
    pw2_.Collect(ps);
  }
  void Init(Rng* rng) {
    pw1_.Init(rng);
    dw_.Init(rng);
    pw2_.Init(rng);
  }

  Mat<S> Forward(const Mat<S>& x, const Ctx& ctx) {
    Mat<S> y = glu_.Forward(pw1_.Forward(ln_.Forward(x)));
    y = act_.Forward(ln2_.Forward(dw_.Forward(y)));
    return drop_.Forward(pw2_.Forward(y), ctx);
  }
  Mat<S> Backward(const Mat<S>& gy) {
    Mat<S> g = pw2_.Backward(drop_.Backward(gy));
    g = dw_.Backward(ln2_.Backward(act_.Backward(g)));
    return ln_.Backward(pw1_.Backward(glu_.Backward(g)));
  }

 private:
  LayerNorm<S> ln_;
  Dense<S> pw1_;
  Glu<S> glu_;
  DepthwiseConv1d<S> dw_;
  LayerNorm<S> ln2_;
  Swish<S> act_;
  Dense<S> pw2_;
  Dropout<S> drop_;
};

template <typename S>
class AttentionModule {
 public:
  AttentionModule(const std::string& name, int dim, int heads, double dropout)
      : ln_(name + ".ln", dim), mhsa_(name + ".mhsa", dim, heads), drop_(dropout) {}

  void Collect(ParamSet<S>* ps) {
    ln_.Collect(ps);
    mhsa_.Collect(ps);
  }
  void Init(Rng* rng) { mhsa_.Init(rng); }

  Mat<S> Forward(const Mat<S>& x, const Ctx& ctx) {
    return drop_.Forward(mhsa_.Forward(ln_.Forward(x)), ctx);
  }
  Mat<S> Backward(const Mat<S>& gy) {
    return ln_.Backward(mhsa_.Backward(drop_.Backward(gy)));
  }

 private:
  LayerNorm<S> ln_;
  MultiHeadSelfAttention<S> mhsa_;
  Dropout<S> drop_;
};

// Macaron conformer block: x + ffn/2, + attention, + conv, + ffn/2, LN.
template <typename S>
class ConformerBlock {
 public:
  ConformerBlock(const std::string& name, const ConformerSettings& cfg)
      : ffn1_(name + ".ffn1", cfg.dim, cfg.ffn_expansion, cfg.dropout),
        attn_(name + ".attn", cfg.dim, cfg.heads, cfg.dropout),
        conv_(name + ".conv", cfg.dim, cfg.conv_kernel, cfg.dropout),
        ffn2_(name + ".ffn2", cfg.dim, cfg.ffn_expansion, cfg.dropout),
        ln_out_(name + ".ln_out", cfg.dim) {}

  void Collect(ParamSet<S>* ps) {
    ffn1_.Collect(ps);
    attn_.Collect(ps);
    conv_.Collect(ps);
    ffn2_.Collect(ps);
    ln_out_.Collect(ps);
  }
  void Init(Rng* rng) {
    ffn1_.Init(rng);
    attn_.Init(rng);
    conv_.Init(rng);
    ffn2_.Init(rng);
  }

  Mat<S> Forward(const Mat<S>& x, const Ctx& ctx) {
    Mat<S> x1 = x + S(0.5) * ffn1_.Forward(x, ctx);
    Mat<S> x2 = x1 + attn_.Forward(x1, ctx);
    Mat<S> x3 = x2 + conv_.Forward(x2, ctx);
    Mat<S> x4 = x3 + S(0.5) * ffn2_.Forward(x3, ctx);
    return ln_out_.Forward(x4);
  }
  Mat<S> Backward(const Mat<S>& gy) {
    Mat<S> g4 = ln_out_.Backward(gy);
    Mat<S> g3 = g4 + ffn2_.Backward(S(0.5) * g4);
    Mat<S> g2 = g3 + conv_.Backward(g3);
    Mat<S> g1 = g2 + attn_.Backward(g2);
    return g1 + ffn1_.Backward(S(0.5) * g1);
  }

 private:
  FeedForward<S> ffn1_;
  AttentionModule<S> attn_;
  ConvModule<S> conv_;
  FeedForward<S> ffn2_;
  LayerNorm<S> ln_out_;
};

// Frontend + block stack. Produces the frame embedding sequence (n x dim,
// n = ceil(n' / subsampling_factor)).
template <typename S>
class ConformerEncoder {
 public:
  explicit ConformerEncoder(const ConformerSettings& cfg)
      : cfg_(cfg),
        sub1_("sub1", cfg.input_dim, cfg.dim, cfg.subsampling_factor >= 2 ? 2 : 1),
        sub2_("sub2", cfg.dim, cfg.dim, cfg.subsampling_factor == 4 ? 2 : 1),
        input_drop_(cfg.dropout) {
    cfg.Validate();
    blocks_.reserve(static_cast<size_t>(cfg.layers));
    for (int i = 0; i < cfg.layers; ++i) {
      blocks_.push_back(
          std::make_unique<ConformerBlock<S>>("block" + std::to_string(i), cfg));
    }
  }

  void Collect(ParamSet<S>* ps) {
    sub1_.Collect(ps);
    sub2_.Collect(ps);
    for (auto& b : blocks_) b->Collect(ps);
  }
  void Init(Rng* rng) {
    sub1_.Init(rng);
    sub2_.Init(rng);
    for (auto& b : blocks_) b->Init(rng);
  }

  const ConformerSettings& config() const { return cfg_; }

  Mat<S> Forward(const Mat<S>& features, const Ctx& ctx) {
    Check(static_cast<int>(features.cols()) == cfg_.input_dim, ErrorKind::kInvalidInput,
          "feature dimension mismatch: expected " + std::to_string(cfg_.input_dim) + ", got " +
              std::to_string(features.cols()));
    Check(features.rows() >= 1, ErrorKind::kInvalidInput, "empty feature matrix");
    Mat<S> x = relu1_.Forward(sub1_.Forward(features));
    x = relu2_.Forward(sub2_.Forward(x));
    AddSinusoidalPositions(&x);
    x = input_drop_.Forward(x, ctx);
    for (auto& b : blocks_) x = b->Forward(x, ctx);
    return x;
  }

  Mat<S> Backward(const Mat<S>& gy) {
    Mat<S> g = gy;
    for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it) g = (*it)->Backward(g);
    g = input_drop_.Backward(g);
    g = sub2_.Backward(relu2_.Backward(g));
    return sub1_.Backward(relu1_.Backward(g));
  }

  static int OutputLength(int n_in, int factor) {
    // two chained strided convs; each stage yields ceil(n / stride)
    int s1 = factor >= 2 ? 2 : 1;
    int s2 = factor == 4 ? 2 : 1;
    int n1 = StridedConv1d<S>::OutputLength(n_in, s1);
    return StridedConv1d<S>::OutputLength(n1, s2);
  }

 private:
  ConformerSettings cfg_;
  StridedConv1d<S> sub1_, sub2_;
  Relu<S> relu1_, relu2_;
  Dropout<S> input_drop_;
  std::vector<std::unique_ptr<ConformerBlock<S>>> blocks_;
};

}  // namespace nn
}  // namespace ced

#endif  // CED_CONFORMER_H_
