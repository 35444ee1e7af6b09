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
//
// Minimal sequence-model toolkit: dense/attention/conv layers with explicit
// forward and backward passes, CTC, and Adam. Templated on the scalar type
// so tests can instantiate in double and check every gradient against
// central finite differences; production code uses float.
//
// Layers store the activations of their last Forward call, so one layer
// instance serves one in-flight sequence at a time.

#ifndef CED_NN_H_
#define CED_NN_H_

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "ced/common.h"

namespace ced {
namespace nn {

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename S>
struct Tensor {
  std::string name;
  Mat<S> value;
  Mat<S> grad;

  void Init(const std::string& n, int rows, int cols) {
    name = n;
    value = Mat<S>::Zero(rows, cols);
    grad = Mat<S>::Zero(rows, cols);
  }
  int64_t Count() const { return value.size(); }
};

template <typename S>
class ParamSet {
 public:
  void Add(Tensor<S>* t) { items_.push_back(t); }
  const std::vector<Tensor<S>*>& items() const { return items_; }

  int64_t TotalCount() const {
    int64_t n = 0;
    for (auto* t : items_) n += t->Count();
    return n;
  }
  void ZeroGrad() {
    for (auto* t : items_) t->grad.setZero();
  }
  double GradNorm() const {
    double sq = 0;
    for (auto* t : items_) sq += t->grad.template cast<double>().squaredNorm();
    return std::sqrt(sq);
  }
  void ScaleGrad(double s) {
    for (auto* t : items_) t->grad *= static_cast<S>(s);
  }
  Tensor<S>* Find(const std::string& name) const {
    for (auto* t : items_) {
      if (t->name == name) return t;
    }
    return nullptr;
  }

 private:
  std::vector<Tensor<S>*> items_;
};

// Forward-pass context: training toggles dropout, rng feeds the masks.
struct Ctx {
  bool training = false;
  Rng* rng = nullptr;
};

template <typename S>
void UniformInit(Tensor<S>* t, Rng* rng, double limit) {
  for (int i = 0; i < t->value.rows(); ++i) {
    for (int j = 0; j < t->value.cols(); ++j) {
      t->value(i, j) = static_cast<S>((rng->UniformDouble() * 2.0 - 1.0) * limit);
    }
  }
}

template <typename S>
void XavierInit(Tensor<S>* t, Rng* rng) {
  UniformInit(t, rng, std::sqrt(6.0 / static_cast<double>(t->value.rows() + t->value.cols())));
}

// -- primitive layers -------------------------------------------------------

template <typename S>
class Dense {
 public:
  Dense(const std::string& name, int in, int out) {
    w_.Init(name + ".w", in, out);
    b_.Init(name + ".b", 1, out);
  }
  void Collect(ParamSet<S>* ps) {
    ps->Add(&w_);
    ps->Add(&b_);
  }
  void Init(Rng* rng) { XavierInit(&w_, rng); }

  Mat<S> Forward(const Mat<S>& x) {
    x_ = x;
    Mat<S> y = x * w_.value;
    y.rowwise() += b_.value.row(0);
    return y;
  }
  Mat<S> Backward(const Mat<S>& gy) {
    w_.grad.noalias() += x_.transpose() * gy;
    b_.grad.row(0) += gy.colwise().sum();
    return gy * w_.value.transpose();
  }

  Tensor<S>& weight() { return w_; }
  Tensor<S>& bias() { return b_; }

 private:
  Tensor<S> w_, b_;
  Mat<S> x_;
};

template <typename S>
class LayerNorm {
 public:
  LayerNorm(const std::string& name, int dim, double eps = 1e-5) : eps_(static_cast<S>(eps)) {
    gamma_.Init(name + ".g", 1, dim);
    beta_.Init(name + ".b", 1, dim);
    gamma_.value.setOnes();
  }
  void Collect(ParamSet<S>* ps) {
    ps->Add(&gamma_);
    ps->Add(&beta_);
  }

  Mat<S> Forward(const Mat<S>& x) {
    const auto d = static_cast<S>(x.cols());
    xhat_.resize(x.rows(), x.cols());
    inv_std_.resize(x.rows());
    for (int i = 0; i < x.rows(); ++i) {
      S mu = x.row(i).mean();
      S var = (x.row(i).array() - mu).square().sum() / d;
      S inv = S(1) / std::sqrt(var + eps_);
      inv_std_(i) = inv;
      xhat_.row(i) = (x.row(i).array() - mu) * inv;
    }
    Mat<S> y = xhat_.array().rowwise() * gamma_.value.row(0).array();
    y.rowwise() += beta_.value.row(0);
    return y;
  }
  Mat<S> Backward(const Mat<S>& gy) {
    gamma_.grad.row(0) += (gy.array() * xhat_.array()).colwise().sum().matrix();
    beta_.grad.row(0) += gy.colwise().sum();
    Mat<S> gx(gy.rows(), gy.cols());
    for (int i = 0; i < gy.rows(); ++i) {
      auto gxhat = (gy.row(i).array() * gamma_.value.row(0).array()).eval();
      S mean_g = gxhat.mean();
      S mean_gx = (gxhat * xhat_.row(i).array()).mean();
      gx.row(i) =
          ((gxhat - mean_g - xhat_.row(i).array() * mean_gx) * inv_std_(i)).matrix();
    }
    return gx;
  }

 private:
  Tensor<S> gamma_, beta_;
  S eps_;
  Mat<S> xhat_;
  Eigen::Matrix<S, Eigen::Dynamic, 1> inv_std_;
};

template <typename S>
class Swish {
 public:
  Mat<S> Forward(const Mat<S>& x) {
    sig_ = (S(1) / (S(1) + (-x.array()).exp())).matrix();
    x_ = x;
    return (x.array() * sig_.array()).matrix();
  }
  Mat<S> Backward(const Mat<S>& gy) {
    auto s = sig_.array();
    return (gy.array() * (s + x_.array() * s * (S(1) - s))).matrix();
  }

 private:
  Mat<S> x_, sig_;
};

template <typename S>
class Relu {
 public:
  Mat<S> Forward(const Mat<S>& x) {
    mask_ = (x.array() > S(0)).template cast<S>();
    return x.cwiseMax(S(0));
  }
  Mat<S> Backward(const Mat<S>& gy) { return (gy.array() * mask_.array()).matrix(); }

 private:
  Mat<S> mask_;
};

// Gated linear unit over a channel split: [a | b] -> a * sigmoid(b).
template <typename S>
class Glu {
 public:
  Mat<S> Forward(const Mat<S>& x) {
    const int d = static_cast<int>(x.cols()) / 2;
    a_ = x.leftCols(d);
    sig_ = (S(1) / (S(1) + (-x.rightCols(d).array()).exp())).matrix();
    return (a_.array() * sig_.array()).matrix();
  }
  Mat<S> Backward(const Mat<S>& gy) {
    const int d = static_cast<int>(gy.cols());
    Mat<S> gx(gy.rows(), 2 * d);
    gx.leftCols(d) = (gy.array() * sig_.array()).matrix();
    gx.rightCols(d) =
        (gy.array() * a_.array() * sig_.array() * (S(1) - sig_.array())).matrix();
    return gx;
  }

 private:
  Mat<S> a_, sig_;
};

// Inverted dropout; identity when ctx.training is false.
template <typename S>
class Dropout {
 public:
  explicit Dropout(double rate) : rate_(rate) {}

  Mat<S> Forward(const Mat<S>& x, const Ctx& ctx) {
    if (!ctx.training || rate_ <= 0.0) {
      active_ = false;
      return x;
    }
    active_ = true;
    const S keep = static_cast<S>(1.0 - rate_);
    mask_.resize(x.rows(), x.cols());
    for (int i = 0; i < x.rows(); ++i) {
      for (int j = 0; j < x.cols(); ++j) {
        mask_(i, j) = ctx.rng->UniformDouble() < rate_ ? S(0) : S(1) / keep;
      }
    }
    return (x.array() * mask_.array()).matrix();
  }
  Mat<S> Backward(const Mat<S>& gy) {
    if (!active_) return gy;
    return (gy.array() * mask_.array()).matrix();
  }

 private:
  double rate_;
  bool active_ = false;
  Mat<S> mask_;
};

template <typename S>
Mat<S> SoftmaxRows(const Mat<S>& x) {
  Mat<S> y(x.rows(), x.cols());
  for (int i = 0; i < x.rows(); ++i) {
    S mx = x.row(i).maxCoeff();
    auto e = (x.row(i).array() - mx).exp().eval();
    y.row(i) = (e / e.sum()).matrix();
  }
  return y;
}

template <typename S>
class MultiHeadSelfAttention {
 public:
  MultiHeadSelfAttention(const std::string& name, int dim, int heads)
      : dim_(dim),
        heads_(heads),
        dh_(dim / heads),
        q_(name + ".q", dim, dim),
        k_(name + ".k", dim, dim),
        v_(name + ".v", dim, dim),
        o_(name + ".o", dim, dim) {
    Check(dim % heads == 0, ErrorKind::kInvalidInput, "attention dim must divide heads");
  }
  void Collect(ParamSet<S>* ps) {
    q_.Collect(ps);
    k_.Collect(ps);
    v_.Collect(ps);
    o_.Collect(ps);
  }
  void Init(Rng* rng) {
    q_.Init(rng);
    k_.Init(rng);
    v_.Init(rng);
    o_.Init(rng);
  }

  Mat<S> Forward(const Mat<S>& x) {
    const int n = static_cast<int>(x.rows());
    Q_ = q_.Forward(x);
    K_ = k_.Forward(x);
    V_ = v_.Forward(x);
    attn_.assign(static_cast<size_t>(heads_), Mat<S>());
    Mat<S> concat(n, dim_);
    const S scale = S(1) / std::sqrt(static_cast<S>(dh_));
    for (int h = 0; h < heads_; ++h) {
      auto Qh = Q_.middleCols(h * dh_, dh_);
      auto Kh = K_.middleCols(h * dh_, dh_);
      auto Vh = V_.middleCols(h * dh_, dh_);
      Mat<S> scores = (Qh * Kh.transpose()) * scale;
      attn_[static_cast<size_t>(h)] = SoftmaxRows(scores);
      concat.middleCols(h * dh_, dh_) = attn_[static_cast<size_t>(h)] * Vh;
    }
    return o_.Forward(concat);
  }

  Mat<S> Backward(const Mat<S>& gy) {
    Mat<S> gconcat = o_.Backward(gy);
    const int n = static_cast<int>(gconcat.rows());
    Mat<S> gQ = Mat<S>::Zero(n, dim_), gK = Mat<S>::Zero(n, dim_), gV = Mat<S>::Zero(n, dim_);
    const S scale = S(1) / std::sqrt(static_cast<S>(dh_));
    for (int h = 0; h < heads_; ++h) {
      const Mat<S>& A = attn_[static_cast<size_t>(h)];
      auto Qh = Q_.middleCols(h * dh_, dh_);
      auto Kh = K_.middleCols(h * dh_, dh_);
      auto Vh = V_.middleCols(h * dh_, dh_);
      Mat<S> gOh = gconcat.middleCols(h * dh_, dh_);
      Mat<S> gA = gOh * Vh.transpose();
      gV.middleCols(h * dh_, dh_) = A.transpose() * gOh;
      // softmax backward per row
      Mat<S> gS(A.rows(), A.cols());
      for (int i = 0; i < A.rows(); ++i) {
        S dot = (gA.row(i).array() * A.row(i).array()).sum();
        gS.row(i) = (A.row(i).array() * (gA.row(i).array() - dot)).matrix();
      }
      gS *= scale;
      gQ.middleCols(h * dh_, dh_) = gS * Kh;
      gK.middleCols(h * dh_, dh_) = gS.transpose() * Qh;
    }
    return q_.Backward(gQ) + k_.Backward(gK) + v_.Backward(gV);
  }

 private:
  int dim_, heads_, dh_;
  Dense<S> q_, k_, v_, o_;
  Mat<S> Q_, K_, V_;
  std::vector<Mat<S>> attn_;
};

// Depthwise 1-D convolution over time, odd kernel, same padding.
template <typename S>
class DepthwiseConv1d {
 public:
  DepthwiseConv1d(const std::string& name, int dim, int kernel) : dim_(dim), kernel_(kernel) {
    Check(kernel % 2 == 1, ErrorKind::kInvalidInput, "depthwise kernel must be odd");
    w_.Init(name + ".w", kernel, dim);
    b_.Init(name + ".b", 1, dim);
  }
  void Collect(ParamSet<S>* ps) {
    ps->Add(&w_);
    ps->Add(&b_);
  }
  void Init(Rng* rng) { UniformInit(&w_, rng, std::sqrt(1.0 / (kernel_ * dim_))); }

  Mat<S> Forward(const Mat<S>& x) {
    x_ = x;
    const int n = static_cast<int>(x.rows());
    const int pad = kernel_ / 2;
    Mat<S> y = Mat<S>::Zero(n, dim_);
    y.rowwise() += b_.value.row(0);
    for (int t = 0; t < n; ++t) {
      for (int tau = 0; tau < kernel_; ++tau) {
        int src = t + tau - pad;
        if (src < 0 || src >= n) continue;
        y.row(t).array() += w_.value.row(tau).array() * x.row(src).array();
      }
    }
    return y;
  }
  Mat<S> Backward(const Mat<S>& gy) {
    const int n = static_cast<int>(gy.rows());
    const int pad = kernel_ / 2;
    Mat<S> gx = Mat<S>::Zero(n, dim_);
    b_.grad.row(0) += gy.colwise().sum();
    for (int t = 0; t < n; ++t) {
      for (int tau = 0; tau < kernel_; ++tau) {
        int src = t + tau - pad;
        if (src < 0 || src >= n) continue;
        w_.grad.row(tau).array() += gy.row(t).array() * x_.row(src).array();
        gx.row(src).array() += gy.row(t).array() * w_.value.row(tau).array();
      }
    }
    return gx;
  }

 private:
  int dim_, kernel_;
  Tensor<S> w_, b_;
  Mat<S> x_;
};

// Strided 1-D convolution (kernel 3, pad 1) used for subsampling. Output
// length is ceil(n / stride) for stride in {1, 2}.
template <typename S>
class StridedConv1d {
 public:
  StridedConv1d(const std::string& name, int in, int out, int stride)
      : in_(in), out_(out), stride_(stride), lin_(name, 3 * in, out) {
    Check(stride == 1 || stride == 2, ErrorKind::kInvalidInput, "stride must be 1 or 2");
  }
  void Collect(ParamSet<S>* ps) { lin_.Collect(ps); }
  void Init(Rng* rng) { lin_.Init(rng); }

  static int OutputLength(int n, int stride) { return (n + 2 - 3) / stride + 1; }

  Mat<S> Forward(const Mat<S>& x) {
    n_in_ = static_cast<int>(x.rows());
    const int n_out = OutputLength(n_in_, stride_);
    Mat<S> col = Mat<S>::Zero(n_out, 3 * in_);
    for (int t = 0; t < n_out; ++t) {
      for (int tau = 0; tau < 3; ++tau) {
        int src = t * stride_ + tau - 1;
        if (src < 0 || src >= n_in_) continue;
        col.block(t, tau * in_, 1, in_) = x.row(src);
      }
    }
    return lin_.Forward(col);
  }
  Mat<S> Backward(const Mat<S>& gy) {
    Mat<S> gcol = lin_.Backward(gy);
    Mat<S> gx = Mat<S>::Zero(n_in_, in_);
    for (int t = 0; t < gy.rows(); ++t) {
      for (int tau = 0; tau < 3; ++tau) {
        int src = t * stride_ + tau - 1;
        if (src < 0 || src >= n_in_) continue;
        gx.row(src) += gcol.block(t, tau * in_, 1, in_);
      }
    }
    return gx;
  }

 private:
  int in_, out_, stride_, n_in_ = 0;
  Dense<S> lin_;
};

// Single-layer GRU; Forward consumes the whole sequence and returns the
// final hidden state. Gate layout follows the r, z, n convention.
template <typename S>
class Gru {
 public:
  Gru(const std::string& name, int input, int hidden) : input_(input), hidden_(hidden) {
    wih_.Init(name + ".wih", input, 3 * hidden);
    whh_.Init(name + ".whh", hidden, 3 * hidden);
    bih_.Init(name + ".bih", 1, 3 * hidden);
    bhh_.Init(name + ".bhh", 1, 3 * hidden);
  }
  void Collect(ParamSet<S>* ps) {
    ps->Add(&wih_);
    ps->Add(&whh_);
    ps->Add(&bih_);
    ps->Add(&bhh_);
  }
  void Init(Rng* rng) {
    const double limit = std::sqrt(1.0 / hidden_);
    UniformInit(&wih_, rng, limit);
    UniformInit(&whh_, rng, limit);
    UniformInit(&bih_, rng, limit);
    UniformInit(&bhh_, rng, limit);
  }

  int hidden() const { return hidden_; }

  Mat<S> Forward(const Mat<S>& x) {
    const int m = static_cast<int>(x.rows());
    x_ = x;
    hs_.resize(m + 1, hidden_);
    hs_.row(0).setZero();
    r_.resize(m, hidden_);
    z_.resize(m, hidden_);
    n_.resize(m, hidden_);
    ghn_.resize(m, hidden_);
    for (int t = 0; t < m; ++t) {
      Mat<S> gi = x.row(t) * wih_.value;
      gi.row(0) += bih_.value.row(0);
      Mat<S> gh = hs_.row(t) * whh_.value;
      gh.row(0) += bhh_.value.row(0);
      auto sig = [](S v) { return S(1) / (S(1) + std::exp(-v)); };
      for (int j = 0; j < hidden_; ++j) {
        S r = sig(gi(0, j) + gh(0, j));
        S z = sig(gi(0, hidden_ + j) + gh(0, hidden_ + j));
        S hn = gh(0, 2 * hidden_ + j);
        S n = std::tanh(gi(0, 2 * hidden_ + j) + r * hn);
        r_(t, j) = r;
        z_(t, j) = z;
        n_(t, j) = n;
        ghn_(t, j) = hn;
        hs_(t + 1, j) = (S(1) - z) * n + z * hs_(t, j);
      }
    }
    return hs_.row(m);
  }

  // ghm: gradient w.r.t. the returned final hidden state (1 x hidden).
  Mat<S> Backward(const Mat<S>& ghm) {
    const int m = static_cast<int>(x_.rows());
    Mat<S> gx = Mat<S>::Zero(m, input_);
    Mat<S> gh = ghm;
    for (int t = m - 1; t >= 0; --t) {
      Mat<S> g_gi(1, 3 * hidden_), g_gh(1, 3 * hidden_);
      Mat<S> ghprev(1, hidden_);
      for (int j = 0; j < hidden_; ++j) {
        S r = r_(t, j), z = z_(t, j), n = n_(t, j), hn = ghn_(t, j);
        S hprev = hs_(t, j);
        S g = gh(0, j);
        S gz = g * (hprev - n);
        S gn = g * (S(1) - z);
        S gn_pre = gn * (S(1) - n * n);
        S gr = gn_pre * hn;
        S gz_pre = gz * z * (S(1) - z);
        S gr_pre = gr * r * (S(1) - r);
        g_gi(0, j) = gr_pre;
        g_gi(0, hidden_ + j) = gz_pre;
        g_gi(0, 2 * hidden_ + j) = gn_pre;
        g_gh(0, j) = gr_pre;
        g_gh(0, hidden_ + j) = gz_pre;
        g_gh(0, 2 * hidden_ + j) = gn_pre * r;
        ghprev(0, j) = g * z;
      }
      wih_.grad.noalias() += x_.row(t).transpose() * g_gi;
      whh_.grad.noalias() += hs_.row(t).transpose() * g_gh;
      bih_.grad.row(0) += g_gi.row(0);
      bhh_.grad.row(0) += g_gh.row(0);
      gx.row(t) = g_gi * wih_.value.transpose();
      gh = ghprev + g_gh * whh_.value.transpose();
    }
    return gx;
  }

 private:
  int input_, hidden_;
  Tensor<S> wih_, whh_, bih_, bhh_;
  Mat<S> x_, hs_, r_, z_, n_, ghn_;
};

// Adds the fixed sinusoidal position table in place.
template <typename S>
void AddSinusoidalPositions(Mat<S>* x) {
  const int n = static_cast<int>(x->rows());
  const int d = static_cast<int>(x->cols());
  for (int t = 0; t < n; ++t) {
    for (int i = 0; i + 1 < d; i += 2) {
      double angle = t / std::pow(10000.0, static_cast<double>(i) / d);
      (*x)(t, i) += static_cast<S>(std::sin(angle));
      (*x)(t, i + 1) += static_cast<S>(std::cos(angle));
    }
  }
}

// -- losses ------------------------------------------------------------------

// Two-class cross entropy on a single logit row. grad has the logits' shape.
template <typename S>
struct CeOutcome {
  double loss;
  Mat<S> grad;
  double prob_positive;
};

template <typename S>
CeOutcome<S> CrossEntropyWithLogits(const Mat<S>& logits, int label) {
  Check(logits.rows() == 1, ErrorKind::kInvalidInput, "expected a single logit row");
  Mat<S> probs = SoftmaxRows(logits);
  CeOutcome<S> out;
  out.prob_positive = static_cast<double>(probs(0, logits.cols() - 1));
  double p = static_cast<double>(probs(0, label));
  out.loss = -std::log(std::max(p, 1e-30));
  out.grad = probs;
  out.grad(0, label) -= S(1);
  return out;
}

// CTC loss over per-frame logits (n x K, blank = K-1 slot by caller choice).
// The forward-backward runs in double regardless of S.
template <typename S>
struct CtcOutcome {
  bool feasible = false;
  double loss = 0.0;
  Mat<S> logit_grad;
};

// Minimum frames needed: one per target token plus one separator frame per
// adjacent repeat.
inline int CtcMinFrames(const std::vector<int>& target) {
  int need = static_cast<int>(target.size());
  for (size_t i = 1; i < target.size(); ++i) {
    if (target[i] == target[i - 1]) ++need;
  }
  return need;
}

template <typename S>
CtcOutcome<S> CtcLossAndGrad(const Mat<S>& logits, const std::vector<int>& target, int blank) {
  const int n = static_cast<int>(logits.rows());
  const int num_classes = static_cast<int>(logits.cols());
  Check(!target.empty(), ErrorKind::kInvalidInput, "empty CTC target");
  for (int t : target) {
    Check(t >= 0 && t < num_classes && t != blank, ErrorKind::kInvalidInput,
          "CTC target symbol out of range");
  }
  CtcOutcome<S> out;
  if (n < CtcMinFrames(target)) return out;  // infeasible

  // log-softmax in double
  Eigen::MatrixXd lp(n, num_classes);
  for (int t = 0; t < n; ++t) {
    Eigen::RowVectorXd row = logits.row(t).template cast<double>();
    double mx = row.maxCoeff();
    double lse = std::log((row.array() - mx).exp().sum()) + mx;
    lp.row(t) = row.array() - lse;
  }

  const int m = static_cast<int>(target.size());
  const int L = 2 * m + 1;
  std::vector<int> ext(static_cast<size_t>(L), blank);
  for (int i = 0; i < m; ++i) ext[static_cast<size_t>(2 * i + 1)] = target[static_cast<size_t>(i)];

  const double kNegInf = -std::numeric_limits<double>::infinity();
  auto logsum = [](double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    double mx = std::max(a, b);
    return mx + std::log(std::exp(a - mx) + std::exp(b - mx));
  };

  Eigen::MatrixXd alpha = Eigen::MatrixXd::Constant(n, L, kNegInf);
  alpha(0, 0) = lp(0, blank);
  if (L > 1) alpha(0, 1) = lp(0, ext[1]);
  for (int t = 1; t < n; ++t) {
    for (int s = 0; s < L; ++s) {
      double a = alpha(t - 1, s);
      if (s >= 1) a = logsum(a, alpha(t - 1, s - 1));
      if (s >= 2 && ext[static_cast<size_t>(s)] != blank &&
          ext[static_cast<size_t>(s)] != ext[static_cast<size_t>(s - 2)]) {
        a = logsum(a, alpha(t - 1, s - 2));
      }
      alpha(t, s) = a + lp(t, ext[static_cast<size_t>(s)]);
    }
  }
  double log_z = alpha(n - 1, L - 1);
  if (L > 1) log_z = logsum(log_z, alpha(n - 1, L - 2));
  if (!std::isfinite(log_z)) return out;  // numerically infeasible

  Eigen::MatrixXd beta = Eigen::MatrixXd::Constant(n, L, kNegInf);
  beta(n - 1, L - 1) = lp(n - 1, blank);
  if (L > 1) beta(n - 1, L - 2) = lp(n - 1, ext[static_cast<size_t>(L - 2)]);
  for (int t = n - 2; t >= 0; --t) {
    for (int s = L - 1; s >= 0; --s) {
      double b = beta(t + 1, s);
      if (s + 1 < L) b = logsum(b, beta(t + 1, s + 1));
      if (s + 2 < L && ext[static_cast<size_t>(s + 2)] != blank &&
          ext[static_cast<size_t>(s + 2)] != ext[static_cast<size_t>(s)]) {
        b = logsum(b, beta(t + 1, s + 2));
      }
      beta(t, s) = b + lp(t, ext[static_cast<size_t>(s)]);
    }
  }

  // gradient wrt logits: softmax - label posterior
  out.logit_grad.resize(n, num_classes);
  for (int t = 0; t < n; ++t) {
    Eigen::RowVectorXd post = Eigen::RowVectorXd::Zero(num_classes);
    for (int s = 0; s < L; ++s) {
      double g = alpha(t, s) + beta(t, s) - lp(t, ext[static_cast<size_t>(s)]) - log_z;
      if (std::isfinite(g)) post(ext[static_cast<size_t>(s)]) += std::exp(g);
    }
    for (int k = 0; k < num_classes; ++k) {
      out.logit_grad(t, k) = static_cast<S>(std::exp(lp(t, k)) - post(k));
    }
  }
  out.feasible = true;
  out.loss = -log_z;
  return out;
}

// -- optimization ------------------------------------------------------------

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.98;
  double eps = 1e-9;
};

template <typename S>
class Adam {
 public:
  explicit Adam(const AdamConfig& cfg = {}) : cfg_(cfg) {}

  void Step(ParamSet<S>* params, double lr) {
    auto& items = params->items();
    if (slots_.size() != items.size()) {
      slots_.clear();
      slots_.resize(items.size());
      for (size_t i = 0; i < items.size(); ++i) {
        slots_[i].m = Mat<S>::Zero(items[i]->value.rows(), items[i]->value.cols());
        slots_[i].v = Mat<S>::Zero(items[i]->value.rows(), items[i]->value.cols());
      }
    }
    ++step_;
    const S b1 = static_cast<S>(cfg_.beta1);
    const S b2 = static_cast<S>(cfg_.beta2);
    const S bc1 = static_cast<S>(1.0 - std::pow(cfg_.beta1, static_cast<double>(step_)));
    const S bc2 = static_cast<S>(1.0 - std::pow(cfg_.beta2, static_cast<double>(step_)));
    for (size_t i = 0; i < items.size(); ++i) {
      auto& t = *items[i];
      auto& s = slots_[i];
      s.m = (b1 * s.m.array() + (S(1) - b1) * t.grad.array()).matrix();
      s.v = (b2 * s.v.array() + (S(1) - b2) * t.grad.array().square()).matrix();
      auto mhat = (s.m.array() / bc1).eval();
      auto vhat = (s.v.array() / bc2).eval();
      t.value.array() -= static_cast<S>(lr) * mhat / (vhat.sqrt() + static_cast<S>(cfg_.eps));
    }
  }

  int64_t step() const { return step_; }

 private:
  struct Slot {
    Mat<S> m, v;
  };
  AdamConfig cfg_;
  std::vector<Slot> slots_;
  int64_t step_ = 0;
};

// Transformer warmup/decay schedule normalized to peak at step == warmup.
inline double TransformerLr(int64_t step, double peak_lr, int64_t warmup_steps) {
  if (step < 1) step = 1;
  if (warmup_steps < 1) warmup_steps = 1;
  double s = static_cast<double>(step);
  double w = static_cast<double>(warmup_steps);
  return peak_lr * std::min(s / w, std::sqrt(w / s));
}

// Scales gradients so the global L2 norm is at most max_norm; returns the
// pre-clip norm.
template <typename S>
double ClipGradNorm(ParamSet<S>* params, double max_norm) {
  double norm = params->GradNorm();
  if (max_norm > 0 && norm > max_norm) params->ScaleGrad(max_norm / norm);
  return norm;
}

}  // namespace nn
}  // namespace ced

#endif  // CED_NN_H_
