// Test-only reference implementations, kept independent of the library's
// computation paths. Each oracle recomputes its result from first principles
// with its own loops so it can certify the production code.
#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "fas/tensor.hpp"

namespace oracle {

// Direct-summation cross-correlation. Pads into an explicit buffer and sums
// every tap; no loop reordering or zero-skipping.
inline fas::Tensor conv2d_ref(const fas::Tensor& input,
                              const fas::Tensor& kernels, int stride,
                              bool same_padding) {
  const auto& is = input.shape();
  const auto& ks = kernels.shape();
  const std::size_t s = static_cast<std::size_t>(stride);

  std::size_t oh, ow, pt = 0, pl = 0;
  if (same_padding) {
    oh = (is.h + s - 1) / s;
    ow = (is.w + s - 1) / s;
    const std::size_t need_h = (oh - 1) * s + ks.h;
    const std::size_t need_w = (ow - 1) * s + ks.w;
    pt = need_h > is.h ? (need_h - is.h) / 2 : 0;
    pl = need_w > is.w ? (need_w - is.w) / 2 : 0;
  } else {
    oh = (is.h - ks.h) / s + 1;
    ow = (is.w - ks.w) / s + 1;
  }

  const std::size_t ph = is.h + 2 * (pt + ks.h);  // generous zero apron
  const std::size_t pw = is.w + 2 * (pl + ks.w);
  fas::Tensor padded(fas::Shape{is.n, is.c, ph, pw});
  for (std::size_t n = 0; n < is.n; ++n)
    for (std::size_t c = 0; c < is.c; ++c)
      for (std::size_t y = 0; y < is.h; ++y)
        for (std::size_t x = 0; x < is.w; ++x)
          padded.at(n, c, y + pt, x + pl) = input.at(n, c, y, x);

  fas::Tensor out(fas::Shape{is.n, ks.n, oh, ow});
  for (std::size_t n = 0; n < is.n; ++n)
    for (std::size_t oc = 0; oc < ks.n; ++oc)
      for (std::size_t oy = 0; oy < oh; ++oy)
        for (std::size_t ox = 0; ox < ow; ++ox) {
          double acc = 0.0;
          for (std::size_t ic = 0; ic < is.c; ++ic)
            for (std::size_t ky = 0; ky < ks.h; ++ky)
              for (std::size_t kx = 0; kx < ks.w; ++kx)
                acc += kernels.at(oc, ic, ky, kx) *
                       padded.at(n, ic, oy * s + ky, ox * s + kx);
          out.at(n, oc, oy, ox) = acc;
        }
  return out;
}

// 3x3 correlation of a single channel with explicit zero-padding bounds.
inline fas::Tensor correlate3x3_ref(const fas::Tensor& input,
                                    const double k[3][3]) {
  const auto& is = input.shape();
  fas::Tensor out(is);
  for (std::size_t n = 0; n < is.n; ++n)
    for (std::size_t c = 0; c < is.c; ++c)
      for (std::size_t y = 0; y < is.h; ++y)
        for (std::size_t x = 0; x < is.w; ++x) {
          double acc = 0.0;
          for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
              const long yy = static_cast<long>(y) + dy;
              const long xx = static_cast<long>(x) + dx;
              if (yy < 0 || xx < 0 || yy >= static_cast<long>(is.h) ||
                  xx >= static_cast<long>(is.w))
                continue;
              acc += k[dy + 1][dx + 1] * input.at(n, c, yy, xx);
            }
          out.at(n, c, y, x) = acc;
        }
  return out;
}

// Max relative error between an analytic gradient and central finite
// differences of `f` at `point`, step h per element. The denominator is
// floored so near-zero gradients are compared absolutely.
inline double fd_max_rel_error(
    const std::function<double(const fas::Tensor&)>& f,
    const fas::Tensor& point, const fas::Tensor& analytic, double h = 1e-6) {
  double worst = 0.0;
  fas::Tensor p = point;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double saved = p[i];
    p[i] = saved + h;
    const double fp = f(p);
    p[i] = saved - h;
    const double fm = f(p);
    p[i] = saved;
    const double fd = (fp - fm) / (2.0 * h);
    const double an = analytic[i];
    const double denom = std::max({std::fabs(fd), std::fabs(an), 1e-6});
    worst = std::max(worst, std::fabs(fd - an) / denom);
  }
  return worst;
}

inline fas::Tensor random_tensor(fas::Shape shape, std::mt19937_64& rng,
                                 double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  fas::Tensor t(shape);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = dist(rng);
  return t;
}

// Random values on the grid 1/64, exact in double arithmetic through sums of
// products with +-1 kernels; used where a test asserts bitwise equality.
inline fas::Tensor random_dyadic(fas::Shape shape, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dist(0, 63);
  fas::Tensor t(shape);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = dist(rng) / 64.0;
  return t;
}

}  // namespace oracle
