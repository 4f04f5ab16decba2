#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "fas/tensor.hpp"

namespace fas {

class Tape;

/// Lightweight handle to a node on a Tape. Copyable; the tape owns all data.
class Var {
public:
  Var() = default;

  const Tensor& value() const;
  Tape& tape() const {
    require(tape_ != nullptr, "Var: empty handle");
    return *tape_;
  }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Reverse-mode gradient tape. Operations append nodes in execution order;
/// backward() replays them strictly in reverse, so every consumer has
/// contributed to a node's gradient before that gradient is read (consumers
/// always have larger ids). A tape drives exactly one backward pass.
class Tape {
public:
  using BackwardFn =
      std::function<void(Tape&, const Tensor& out_grad, const Tensor& out_value)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Registers an input node. Parameters pass requires_grad = true; frozen
  /// weights and data pass false, which prunes the backward closures of
  /// everything computed purely from them.
  Var leaf(Tensor value, bool requires_grad) {
    nodes_.push_back(Node{std::move(value), Tensor{}, nullptr, requires_grad});
    return Var(this, nodes_.size() - 1);
  }

  Var constant(Tensor value) { return leaf(std::move(value), false); }

  /// Appends an operation result. The closure receives the node's output
  /// gradient and output value and must accumulate into the parents via
  /// grad_buffer(). It is dropped when no parent needs gradients.
  Var record(Tensor value, const std::vector<Var>& parents, BackwardFn backward) {
    require(!consumed_, "Tape: already consumed by backward()");
    bool needs = false;
    for (const Var& p : parents) {
      require(p.tape_ == this, "Tape: operand recorded on a different tape");
      needs = needs || nodes_[p.id_].requires_grad;
    }
    nodes_.push_back(Node{std::move(value), Tensor{},
                          needs ? std::move(backward) : nullptr, needs});
    return Var(this, nodes_.size() - 1);
  }

  const Tensor& value(const Var& v) const { return nodes_.at(v.id_).value; }

  bool wants_grad(const Var& v) const { return nodes_.at(v.id_).requires_grad; }

  /// Mutable gradient accumulator for a node, zero-initialized on first use.
  Tensor& grad_buffer(const Var& v) {
    Node& nd = nodes_.at(v.id_);
    if (nd.grad.empty()) nd.grad = Tensor(nd.value.shape());
    return nd.grad;
  }

  /// Accumulated gradient of v after backward(); exact zeros if v never
  /// reached the loss.
  Tensor grad(const Var& v) const {
    const Node& nd = nodes_.at(v.id_);
    if (nd.grad.empty()) return Tensor(nd.value.shape());
    return nd.grad;
  }

  /// Seeds d(loss)/d(loss) = 1 and replays the tape backward. loss must be
  /// scalar; a tape can only be consumed once.
  void backward(const Var& loss) {
    require(loss.tape_ == this, "Tape: loss recorded on a different tape");
    require(!consumed_, "Tape: already consumed by backward()");
    require(nodes_.at(loss.id_).value.size() == 1,
            "Tape: loss must be scalar, got shape " +
                nodes_.at(loss.id_).value.shape().str());
    consumed_ = true;
    grad_buffer(loss)[0] = 1.0;
    for (std::size_t i = loss.id_ + 1; i-- > 0;) {
      Node& nd = nodes_[i];
      if (!nd.backward || nd.grad.empty()) continue;
      nd.backward(*this, nd.grad, nd.value);
    }
  }

  bool consumed() const { return consumed_; }
  std::size_t node_count() const { return nodes_.size(); }

private:
  struct Node {
    Tensor value;
    Tensor grad;  // empty until touched; empty means exact zero
    BackwardFn backward;
    bool requires_grad;
  };

  std::vector<Node> nodes_;
  bool consumed_ = false;
};

inline const Tensor& Var::value() const { return tape().value(*this); }

namespace detail {

inline Tape& common_tape(const Var& a, const Var& b) {
  require(&a.tape() == &b.tape(), "operands recorded on different tapes");
  return a.tape();
}

inline void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  require(a.shape() == b.shape(), std::string(op) + ": shape mismatch " +
                                      a.shape().str() + " vs " +
                                      b.shape().str());
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Elementwise ops
// ---------------------------------------------------------------------------

inline Var add(const Var& a, const Var& b) {
  Tape& t = detail::common_tape(a, b);
  detail::check_same_shape(a.value(), b.value(), "add");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.value()[i];
  return t.record(std::move(out), {a, b},
                  [a, b](Tape& tp, const Tensor& g, const Tensor&) {
                    if (tp.wants_grad(a)) {
                      Tensor& ga = tp.grad_buffer(a);
                      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                    }
                    if (tp.wants_grad(b)) {
                      Tensor& gb = tp.grad_buffer(b);
                      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
                    }
                  });
}

inline Var sub(const Var& a, const Var& b) {
  Tape& t = detail::common_tape(a, b);
  detail::check_same_shape(a.value(), b.value(), "sub");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b.value()[i];
  return t.record(std::move(out), {a, b},
                  [a, b](Tape& tp, const Tensor& g, const Tensor&) {
                    if (tp.wants_grad(a)) {
                      Tensor& ga = tp.grad_buffer(a);
                      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                    }
                    if (tp.wants_grad(b)) {
                      Tensor& gb = tp.grad_buffer(b);
                      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
                    }
                  });
}

inline Var mul(const Var& a, const Var& b) {
  Tape& t = detail::common_tape(a, b);
  detail::check_same_shape(a.value(), b.value(), "mul");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  return t.record(std::move(out), {a, b},
                  [a, b](Tape& tp, const Tensor& g, const Tensor&) {
                    if (tp.wants_grad(a)) {
                      Tensor& ga = tp.grad_buffer(a);
                      const Tensor& bv = b.value();
                      for (std::size_t i = 0; i < g.size(); ++i)
                        ga[i] += g[i] * bv[i];
                    }
                    if (tp.wants_grad(b)) {
                      Tensor& gb = tp.grad_buffer(b);
                      const Tensor& av = a.value();
                      for (std::size_t i = 0; i < g.size(); ++i)
                        gb[i] += g[i] * av[i];
                    }
                  });
}

inline Var scale(const Var& a, double k) {
  require(std::isfinite(k), "scale: factor must be finite");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= k;
  return a.tape().record(std::move(out), {a},
                         [a, k](Tape& tp, const Tensor& g, const Tensor&) {
                           if (!tp.wants_grad(a)) return;
                           Tensor& ga = tp.grad_buffer(a);
                           for (std::size_t i = 0; i < g.size(); ++i)
                             ga[i] += k * g[i];
                         });
}

inline Var operator+(const Var& a, const Var& b) { return add(a, b); }
inline Var operator-(const Var& a, const Var& b) { return sub(a, b); }
inline Var operator*(const Var& a, const Var& b) { return mul(a, b); }

/// Sum of all elements, as a (1,1,1,1) scalar node.
inline Var sum_all(const Var& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.value().size(); ++i) s += a.value()[i];
  Tensor out(Shape{1, 1, 1, 1});
  out[0] = s;
  return a.tape().record(std::move(out), {a},
                         [a](Tape& tp, const Tensor& g, const Tensor&) {
                           if (!tp.wants_grad(a)) return;
                           Tensor& ga = tp.grad_buffer(a);
                           for (std::size_t i = 0; i < ga.size(); ++i)
                             ga[i] += g[0];
                         });
}

inline Var relu(const Var& a) {
  return a.tape().record(relu(a.value()), {a},
                         [a](Tape& tp, const Tensor& g, const Tensor&) {
                           if (!tp.wants_grad(a)) return;
                           Tensor& ga = tp.grad_buffer(a);
                           const Tensor& x = a.value();
                           for (std::size_t i = 0; i < g.size(); ++i)
                             if (x[i] > 0.0) ga[i] += g[i];
                         });
}

inline Var sigmoid(const Var& a) {
  return a.tape().record(sigmoid(a.value()), {a},
                         [a](Tape& tp, const Tensor& g, const Tensor& y) {
                           if (!tp.wants_grad(a)) return;
                           Tensor& ga = tp.grad_buffer(a);
                           for (std::size_t i = 0; i < g.size(); ++i)
                             ga[i] += g[i] * y[i] * (1.0 - y[i]);
                         });
}

inline Var tanh_op(const Var& a) {
  return a.tape().record(tanh_op(a.value()), {a},
                         [a](Tape& tp, const Tensor& g, const Tensor& y) {
                           if (!tp.wants_grad(a)) return;
                           Tensor& ga = tp.grad_buffer(a);
                           for (std::size_t i = 0; i < g.size(); ++i)
                             ga[i] += g[i] * (1.0 - y[i] * y[i]);
                         });
}

// ---------------------------------------------------------------------------
// Structural ops
// ---------------------------------------------------------------------------

inline Var max_pool2x2(const Var& a) {
  return a.tape().record(
      max_pool2x2(a.value()), {a},
      [a](Tape& tp, const Tensor& g, const Tensor&) {
        if (!tp.wants_grad(a)) return;
        Tensor& ga = tp.grad_buffer(a);
        const Tensor& x = a.value();
        const Shape& os = g.shape();
        // Re-derive the argmax; ties route to the first element in scan
        // order (top-left, top-right, bottom-left, bottom-right).
        for (std::size_t n = 0; n < os.n; ++n)
          for (std::size_t c = 0; c < os.c; ++c)
            for (std::size_t y = 0; y < os.h; ++y)
              for (std::size_t xx = 0; xx < os.w; ++xx) {
                std::size_t by = 2 * y, bx = 2 * xx;
                double best = x.at(n, c, by, bx);
                std::size_t my = by, mx = bx;
                const std::size_t cand[3][2] = {
                    {by, bx + 1}, {by + 1, bx}, {by + 1, bx + 1}};
                for (const auto& cd : cand)
                  if (x.at(n, c, cd[0], cd[1]) > best) {
                    best = x.at(n, c, cd[0], cd[1]);
                    my = cd[0];
                    mx = cd[1];
                  }
                ga.at(n, c, my, mx) += g.at(n, c, y, xx);
              }
      });
}

inline Var concat_channels(const std::vector<Var>& parts) {
  require(!parts.empty(), "concat_channels: no inputs");
  Tape& t = parts.front().tape();
  std::vector<Tensor> values;
  values.reserve(parts.size());
  for (const Var& p : parts) {
    detail::common_tape(parts.front(), p);
    values.push_back(p.value());
  }
  Tensor out = concat_channels(values);
  return t.record(std::move(out), parts,
                  [parts](Tape& tp, const Tensor& g, const Tensor&) {
                    const Shape& gs = g.shape();
                    std::size_t c0 = 0;
                    for (const Var& p : parts) {
                      const Shape& ps = p.value().shape();
                      if (tp.wants_grad(p)) {
                        Tensor& gp = tp.grad_buffer(p);
                        for (std::size_t n = 0; n < gs.n; ++n)
                          for (std::size_t c = 0; c < ps.c; ++c)
                            for (std::size_t y = 0; y < gs.h; ++y)
                              for (std::size_t x = 0; x < gs.w; ++x)
                                gp.at(n, c, y, x) += g.at(n, c0 + c, y, x);
                      }
                      c0 += ps.c;
                    }
                  });
}

/// Reshape (n,c,h,w) -> (n, c*h*w, 1, 1); data order is unchanged.
inline Var flatten(const Var& a) {
  const Shape& is = a.value().shape();
  Tensor out(Shape{is.n, is.c * is.h * is.w, 1, 1},
             std::vector<double>(a.value().data().begin(),
                                 a.value().data().end()));
  return a.tape().record(std::move(out), {a},
                         [a](Tape& tp, const Tensor& g, const Tensor&) {
                           if (!tp.wants_grad(a)) return;
                           Tensor& ga = tp.grad_buffer(a);
                           for (std::size_t i = 0; i < g.size(); ++i)
                             ga[i] += g[i];
                         });
}

// ---------------------------------------------------------------------------
// Convolutions
// ---------------------------------------------------------------------------

inline Var conv2d(const Var& x, const Var& w, int stride, Padding padding) {
  Tape& t = detail::common_tape(x, w);
  Tensor out = conv2d(x.value(), w.value(), stride, padding);
  return t.record(
      std::move(out), {x, w},
      [x, w, stride, padding](Tape& tp, const Tensor& g, const Tensor&) {
        const Tensor& xv = x.value();
        const Tensor& wv = w.value();
        const Shape& is = xv.shape();
        const Shape& ks = wv.shape();
        const Shape& os = g.shape();
        const std::size_t s = static_cast<std::size_t>(stride);
        long py = 0, px = 0;
        if (padding == Padding::same) {
          py = -detail::same_pad(is.h, ks.h, s).pad_before;
          px = -detail::same_pad(is.w, ks.w, s).pad_before;
        }
        const bool wx = tp.wants_grad(x);
        const bool ww = tp.wants_grad(w);
        Tensor* gx = wx ? &tp.grad_buffer(x) : nullptr;
        Tensor* gw = ww ? &tp.grad_buffer(w) : nullptr;
        // Mirror of the forward loop: each output element distributes its
        // gradient to the inputs and kernel taps that produced it.
        for (std::size_t n = 0; n < is.n; ++n)
          for (std::size_t oc = 0; oc < ks.n; ++oc)
            for (std::size_t ic = 0; ic < is.c; ++ic)
              for (std::size_t ky = 0; ky < ks.h; ++ky)
                for (std::size_t kx = 0; kx < ks.w; ++kx) {
                  const double kv = wv.at(oc, ic, ky, kx);
                  double acc = 0.0;
                  for (std::size_t oy = 0; oy < os.h; ++oy) {
                    const long iy = static_cast<long>(oy * s + ky) + py;
                    if (iy < 0 || iy >= static_cast<long>(is.h)) continue;
                    for (std::size_t ox = 0; ox < os.w; ++ox) {
                      const long ix = static_cast<long>(ox * s + kx) + px;
                      if (ix < 0 || ix >= static_cast<long>(is.w)) continue;
                      const double go = g.at(n, oc, oy, ox);
                      if (wx)
                        gx->at(n, ic, static_cast<std::size_t>(iy),
                               static_cast<std::size_t>(ix)) += go * kv;
                      if (ww)
                        acc += go * xv.at(n, ic, static_cast<std::size_t>(iy),
                                          static_cast<std::size_t>(ix));
                    }
                  }
                  if (ww) gw->at(oc, ic, ky, kx) += acc;
                }
      });
}

inline Var depthwise_conv3x3(const Var& x, const Var& k) {
  Tape& t = detail::common_tape(x, k);
  Tensor out = depthwise_conv3x3(x.value(), k.value());
  return t.record(
      std::move(out), {x, k},
      [x, k](Tape& tp, const Tensor& g, const Tensor&) {
        const Tensor& xv = x.value();
        const Tensor& kv = k.value();
        const Shape& is = xv.shape();
        const bool wx = tp.wants_grad(x);
        const bool wk = tp.wants_grad(k);
        Tensor* gx = wx ? &tp.grad_buffer(x) : nullptr;
        Tensor* gk = wk ? &tp.grad_buffer(k) : nullptr;
        const bool shared = kv.shape().n == 1;
        for (std::size_t n = 0; n < is.n; ++n)
          for (std::size_t c = 0; c < is.c; ++c) {
            const std::size_t kc = shared ? 0 : c;
            for (std::size_t ky = 0; ky < 3; ++ky)
              for (std::size_t kx = 0; kx < 3; ++kx) {
                const double kval = kv.at(kc, 0, ky, kx);
                double acc = 0.0;
                for (std::size_t oy = 0; oy < is.h; ++oy) {
                  const long iy = static_cast<long>(oy + ky) - 1;
                  if (iy < 0 || iy >= static_cast<long>(is.h)) continue;
                  for (std::size_t ox = 0; ox < is.w; ++ox) {
                    const long ix = static_cast<long>(ox + kx) - 1;
                    if (ix < 0 || ix >= static_cast<long>(is.w)) continue;
                    const double go = g.at(n, c, oy, ox);
                    if (wx)
                      gx->at(n, c, static_cast<std::size_t>(iy),
                             static_cast<std::size_t>(ix)) += go * kval;
                    if (wk)
                      acc += go * xv.at(n, c, static_cast<std::size_t>(iy),
                                        static_cast<std::size_t>(ix));
                  }
                }
                if (wk) gk->at(kc, 0, ky, kx) += acc;
              }
          }
      });
}

// ---------------------------------------------------------------------------
// Normalization
// ---------------------------------------------------------------------------

inline Var normalize_channels(const Var& x, const Var& scale_p,
                              const Var& shift_p) {
  Tape& t = detail::common_tape(x, scale_p);
  detail::common_tape(x, shift_p);
  const ChannelStats st = channel_stats(x.value());
  Tensor out = normalize_channels(x.value(), scale_p.value(), shift_p.value());
  return t.record(
      std::move(out), {x, scale_p, shift_p},
      [x, scale_p, shift_p, st](Tape& tp, const Tensor& g, const Tensor&) {
        const Tensor& xv = x.value();
        const Shape& is = xv.shape();
        const double cnt = static_cast<double>(is.n * is.h * is.w);
        const bool wx = tp.wants_grad(x);
        const bool wg = tp.wants_grad(scale_p);
        const bool wb = tp.wants_grad(shift_p);
        Tensor* gx = wx ? &tp.grad_buffer(x) : nullptr;
        Tensor* gg = wg ? &tp.grad_buffer(scale_p) : nullptr;
        Tensor* gb = wb ? &tp.grad_buffer(shift_p) : nullptr;
        for (std::size_t c = 0; c < is.c; ++c) {
          const double m = st.mean[c];
          const double istd = st.inv_std[c];
          const double gamma = scale_p.value().at(0, c, 0, 0);
          double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0, sum_g = 0.0;
          for (std::size_t n = 0; n < is.n; ++n)
            for (std::size_t y = 0; y < is.h; ++y)
              for (std::size_t xx = 0; xx < is.w; ++xx) {
                const double go = g.at(n, c, y, xx);
                const double xhat = (xv.at(n, c, y, xx) - m) * istd;
                sum_g += go;
                sum_dxhat += go * gamma;
                sum_dxhat_xhat += go * gamma * xhat;
                if (wg) gg->at(0, c, 0, 0) += go * xhat;
              }
          if (wb) gb->at(0, c, 0, 0) += sum_g;
          if (wx)
            for (std::size_t n = 0; n < is.n; ++n)
              for (std::size_t y = 0; y < is.h; ++y)
                for (std::size_t xx = 0; xx < is.w; ++xx) {
                  const double xhat = (xv.at(n, c, y, xx) - m) * istd;
                  const double dxhat = g.at(n, c, y, xx) * gamma;
                  gx->at(n, c, y, xx) +=
                      istd * (dxhat - sum_dxhat / cnt -
                              xhat * sum_dxhat_xhat / cnt);
                }
        }
      });
}

// ---------------------------------------------------------------------------
// Fully connected / classification head
// ---------------------------------------------------------------------------

/// y[n,o] = sum_i W[o,i] * x[n,i] + b[o]; x is (n, in, 1, 1), W (out, in, 1, 1),
/// b (1, out, 1, 1).
inline Var linear(const Var& x, const Var& weight, const Var& bias) {
  Tape& t = detail::common_tape(x, weight);
  detail::common_tape(x, bias);
  const Shape& xs = x.value().shape();
  const Shape& ws = weight.value().shape();
  require(xs.h == 1 && xs.w == 1, "linear: input must be flattened");
  require(ws.c == xs.c, "linear: weight " + ws.str() +
                            " does not match input " + xs.str());
  require(bias.value().shape() == Shape{1, ws.n, 1, 1},
          "linear: bias must be shaped (1,out,1,1)");
  Tensor out(Shape{xs.n, ws.n, 1, 1});
  for (std::size_t n = 0; n < xs.n; ++n)
    for (std::size_t o = 0; o < ws.n; ++o) {
      double acc = bias.value().at(0, o, 0, 0);
      for (std::size_t i = 0; i < xs.c; ++i)
        acc += weight.value().at(o, i, 0, 0) * x.value().at(n, i, 0, 0);
      out.at(n, o, 0, 0) = acc;
    }
  return t.record(
      std::move(out), {x, weight, bias},
      [x, weight, bias](Tape& tp, const Tensor& g, const Tensor&) {
        const Shape& xs = x.value().shape();
        const Shape& ws = weight.value().shape();
        const bool wx = tp.wants_grad(x);
        const bool ww = tp.wants_grad(weight);
        const bool wb = tp.wants_grad(bias);
        for (std::size_t n = 0; n < xs.n; ++n)
          for (std::size_t o = 0; o < ws.n; ++o) {
            const double go = g.at(n, o, 0, 0);
            if (wb) tp.grad_buffer(bias).at(0, o, 0, 0) += go;
            for (std::size_t i = 0; i < xs.c; ++i) {
              if (wx)
                tp.grad_buffer(x).at(n, i, 0, 0) +=
                    go * weight.value().at(o, i, 0, 0);
              if (ww)
                tp.grad_buffer(weight).at(o, i, 0, 0) +=
                    go * x.value().at(n, i, 0, 0);
            }
          }
      });
}

constexpr double kProbClamp = 1e-12;

/// Numerically stable softmax over the channel axis of (n, k, 1, 1) logits.
inline Tensor softmax_probs(const Tensor& logits) {
  const Shape& s = logits.shape();
  Tensor probs(s);
  for (std::size_t n = 0; n < s.n; ++n) {
    double mx = logits.at(n, 0, 0, 0);
    for (std::size_t c = 1; c < s.c; ++c)
      mx = std::max(mx, logits.at(n, c, 0, 0));
    double z = 0.0;
    for (std::size_t c = 0; c < s.c; ++c)
      z += std::exp(logits.at(n, c, 0, 0) - mx);
    for (std::size_t c = 0; c < s.c; ++c)
      probs.at(n, c, 0, 0) = std::exp(logits.at(n, c, 0, 0) - mx) / z;
  }
  return probs;
}

/// Mean cross-entropy over the batch with the true-class probability clamped
/// to [1e-12, 1 - 1e-12] before the log. When the clamp saturates, the
/// gradient is exactly zero (the clamp is flat there).
inline Var softmax_cross_entropy(const Var& logits,
                                 const std::vector<std::size_t>& labels) {
  const Shape& s = logits.value().shape();
  require(s.h == 1 && s.w == 1, "softmax_cross_entropy: logits must be (n,k,1,1)");
  require(labels.size() == s.n, "softmax_cross_entropy: one label per sample");
  for (std::size_t lb : labels)
    require(lb < s.c, "softmax_cross_entropy: label out of range");
  const Tensor probs = softmax_probs(logits.value());
  Tensor out(Shape{1, 1, 1, 1});
  std::vector<bool> clamped(s.n, false);
  double total = 0.0;
  for (std::size_t n = 0; n < s.n; ++n) {
    double p = probs.at(n, labels[n], 0, 0);
    if (p < kProbClamp || p > 1.0 - kProbClamp) {
      clamped[n] = true;
      p = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
    }
    total += -std::log(p);
  }
  out[0] = total / static_cast<double>(s.n);
  return logits.tape().record(
      std::move(out), {logits},
      [logits, labels, probs, clamped](Tape& tp, const Tensor& g,
                                       const Tensor&) {
        if (!tp.wants_grad(logits)) return;
        Tensor& gl = tp.grad_buffer(logits);
        const Shape& s = probs.shape();
        const double inv_n = 1.0 / static_cast<double>(s.n);
        for (std::size_t n = 0; n < s.n; ++n) {
          if (clamped[n]) continue;
          for (std::size_t c = 0; c < s.c; ++c) {
            const double ind = (c == labels[n]) ? 1.0 : 0.0;
            gl.at(n, c, 0, 0) += g[0] * inv_n * (probs.at(n, c, 0, 0) - ind);
          }
        }
      });
}

/// Elementwise mean of several same-shape nodes.
inline Var mean_of(const std::vector<Var>& vars) {
  require(!vars.empty(), "mean_of: no inputs");
  Var acc = vars.front();
  for (std::size_t i = 1; i < vars.size(); ++i) acc = add(acc, vars[i]);
  return scale(acc, 1.0 / static_cast<double>(vars.size()));
}

}  // namespace fas
