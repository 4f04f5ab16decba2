#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fas/error.hpp"

namespace fas {

/// Dense NCHW shape. All four extents are explicit; rank-2 data (e.g. a
/// flattened feature vector) uses h = w = 1.
struct Shape {
  std::size_t n = 0, c = 0, h = 0, w = 0;

  std::size_t count() const { return n * c * h * w; }
  bool operator==(const Shape&) const = default;

  std::string str() const {
    return "(" + std::to_string(n) + "," + std::to_string(c) + "," +
           std::to_string(h) + "," + std::to_string(w) + ")";
  }
};

/// Dense rank-4 tensor of doubles, row-major in (n, c, h, w) order.
/// Tensors are plain values: copyable, immutable when shared, no views.
class Tensor {
public:
  Tensor() = default;

  explicit Tensor(Shape shape, double fill = 0.0)
      : shape_(shape), data_(shape.count(), fill) {
    require(std::isfinite(fill), "Tensor fill value must be finite");
  }

  /// Constructs from raw data. This is the entry point for external inputs,
  /// so non-finite values are rejected here; operator results are written
  /// in place and deliberately skip this check.
  Tensor(Shape shape, std::vector<double> data)
      : shape_(shape), data_(std::move(data)) {
    require(data_.size() == shape_.count(),
            "Tensor data length " + std::to_string(data_.size()) +
                " does not match shape " + shape_.str());
    for (double v : data_)
      require(std::isfinite(v), "Tensor input contains a non-finite value");
  }

  static Tensor zeros(Shape shape) { return Tensor(shape, 0.0); }

  const Shape& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) {
    return data_[((n * shape_.c + c) * shape_.h + y) * shape_.w + x];
  }
  double at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) const {
    return data_[((n * shape_.c + c) * shape_.h + y) * shape_.w + x];
  }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](double v) { return std::isfinite(v); });
  }

  bool same_data(const Tensor& other) const {
    return shape_ == other.shape_ && data_ == other.data_;
  }

private:
  Shape shape_{};
  std::vector<double> data_;
};

enum class Padding { same, valid };

namespace detail {

inline void check_finite_input(const Tensor& t, const char* op) {
  require(t.all_finite(), std::string(op) + ": non-finite input");
}

// TensorFlow-style SAME padding: output = ceil(in / stride), zeros split
// between both sides with the extra row/column at the bottom/right.
struct PadPlan {
  std::size_t out;
  long pad_before;
};

inline PadPlan same_pad(std::size_t in, std::size_t k, std::size_t stride) {
  const std::size_t out = (in + stride - 1) / stride;
  const long total =
      std::max<long>(0, static_cast<long>((out - 1) * stride + k) -
                            static_cast<long>(in));
  return {out, total / 2};
}

}  // namespace detail

/// 2D cross-correlation (kernel applied as written, no flip) over NCHW input.
/// kernels shape: (out_ch, in_ch, kh, kw). SAME padding pads with zeros so
/// the output spatial extent is ceil(input / stride).
inline Tensor conv2d(const Tensor& input, const Tensor& kernels, int stride,
                     Padding padding) {
  const Shape& is = input.shape();
  const Shape& ks = kernels.shape();
  require(ks.c == is.c, "conv2d: kernel in-channels " + ks.str() +
                            " do not match input " + is.str());
  require(stride >= 1, "conv2d: stride must be >= 1");
  if (padding == Padding::same)
    require(ks.h % 2 == 1 && ks.w % 2 == 1,
            "conv2d: same padding requires odd kernel extents, got " +
                ks.str());
  else
    require(is.h >= ks.h && is.w >= ks.w,
            "conv2d: kernel " + ks.str() + " larger than input " + is.str());
  detail::check_finite_input(input, "conv2d");

  const std::size_t s = static_cast<std::size_t>(stride);
  std::size_t oh, ow;
  long py, px;
  if (padding == Padding::same) {
    const auto ph = detail::same_pad(is.h, ks.h, s);
    const auto pw = detail::same_pad(is.w, ks.w, s);
    oh = ph.out;
    ow = pw.out;
    py = -ph.pad_before;
    px = -pw.pad_before;
  } else {
    oh = (is.h - ks.h) / s + 1;
    ow = (is.w - ks.w) / s + 1;
    py = 0;
    px = 0;
  }

  Tensor out(Shape{is.n, ks.n, oh, ow});
  for (std::size_t n = 0; n < is.n; ++n)
    for (std::size_t oc = 0; oc < ks.n; ++oc)
      for (std::size_t ic = 0; ic < is.c; ++ic)
        for (std::size_t ky = 0; ky < ks.h; ++ky)
          for (std::size_t kx = 0; kx < ks.w; ++kx) {
            const double kv = kernels.at(oc, ic, ky, kx);
            if (kv == 0.0) continue;
            for (std::size_t oy = 0; oy < oh; ++oy) {
              const long iy = static_cast<long>(oy * s + ky) + py;
              if (iy < 0 || iy >= static_cast<long>(is.h)) continue;
              for (std::size_t ox = 0; ox < ow; ++ox) {
                const long ix = static_cast<long>(ox * s + kx) + px;
                if (ix < 0 || ix >= static_cast<long>(is.w)) continue;
                out.at(n, oc, oy, ox) +=
                    kv * input.at(n, ic, static_cast<std::size_t>(iy),
                                  static_cast<std::size_t>(ix));
              }
            }
          }
  return out;
}

/// Depthwise 3x3 cross-correlation, SAME padding, stride 1. The kernel is
/// either (1,1,3,3) shared across channels or (C,1,3,3) per channel; no
/// cross-channel mixing in either case. Output shape equals input shape.
inline Tensor depthwise_conv3x3(const Tensor& input, const Tensor& kernel) {
  const Shape& is = input.shape();
  const Shape& ks = kernel.shape();
  require(ks.h == 3 && ks.w == 3 && ks.c == 1,
          "depthwise_conv3x3: kernel must be (1,1,3,3) or (C,1,3,3), got " +
              ks.str());
  require(ks.n == 1 || ks.n == is.c,
          "depthwise_conv3x3: kernel channel count " + ks.str() +
              " does not match input " + is.str());
  detail::check_finite_input(input, "depthwise_conv3x3");

  Tensor out(is);
  for (std::size_t n = 0; n < is.n; ++n)
    for (std::size_t c = 0; c < is.c; ++c) {
      const std::size_t kc = (ks.n == 1) ? 0 : c;
      for (std::size_t ky = 0; ky < 3; ++ky)
        for (std::size_t kx = 0; kx < 3; ++kx) {
          const double kv = kernel.at(kc, 0, ky, kx);
          if (kv == 0.0) continue;
          for (std::size_t oy = 0; oy < is.h; ++oy) {
            const long iy = static_cast<long>(oy + ky) - 1;
            if (iy < 0 || iy >= static_cast<long>(is.h)) continue;
            for (std::size_t ox = 0; ox < is.w; ++ox) {
              const long ix = static_cast<long>(ox + kx) - 1;
              if (ix < 0 || ix >= static_cast<long>(is.w)) continue;
              out.at(n, c, oy, ox) +=
                  kv * input.at(n, c, static_cast<std::size_t>(iy),
                                static_cast<std::size_t>(ix));
            }
          }
        }
    }
  return out;
}

/// Non-overlapping 2x2 max pooling; halves spatial extents (floor).
inline Tensor max_pool2x2(const Tensor& input) {
  const Shape& is = input.shape();
  require(is.h >= 2 && is.w >= 2,
          "max_pool2x2: spatial extent below 2 in " + is.str());
  Tensor out(Shape{is.n, is.c, is.h / 2, is.w / 2});
  for (std::size_t n = 0; n < is.n; ++n)
    for (std::size_t c = 0; c < is.c; ++c)
      for (std::size_t y = 0; y < is.h / 2; ++y)
        for (std::size_t x = 0; x < is.w / 2; ++x) {
          double m = input.at(n, c, 2 * y, 2 * x);
          m = std::max(m, input.at(n, c, 2 * y, 2 * x + 1));
          m = std::max(m, input.at(n, c, 2 * y + 1, 2 * x));
          m = std::max(m, input.at(n, c, 2 * y + 1, 2 * x + 1));
          out.at(n, c, y, x) = m;
        }
  return out;
}

inline Tensor relu(const Tensor& input) {
  Tensor out(input.shape());
  for (std::size_t i = 0; i < input.size(); ++i)
    out[i] = input[i] > 0.0 ? input[i] : 0.0;
  return out;
}

inline Tensor sigmoid(const Tensor& input) {
  Tensor out(input.shape());
  for (std::size_t i = 0; i < input.size(); ++i)
    out[i] = 1.0 / (1.0 + std::exp(-input[i]));
  return out;
}

inline Tensor tanh_op(const Tensor& input) {
  Tensor out(input.shape());
  for (std::size_t i = 0; i < input.size(); ++i) out[i] = std::tanh(input[i]);
  return out;
}

constexpr double kNormEps = 1e-5;

/// Per-channel statistics captured by normalize_channels, exposed so the
/// backward pass can reuse them.
struct ChannelStats {
  std::vector<double> mean;
  std::vector<double> inv_std;  // 1 / sqrt(var + eps), biased variance
};

inline ChannelStats channel_stats(const Tensor& input) {
  const Shape& is = input.shape();
  const double count = static_cast<double>(is.n * is.h * is.w);
  ChannelStats st;
  st.mean.assign(is.c, 0.0);
  st.inv_std.assign(is.c, 0.0);
  for (std::size_t c = 0; c < is.c; ++c) {
    double sum = 0.0;
    for (std::size_t n = 0; n < is.n; ++n)
      for (std::size_t y = 0; y < is.h; ++y)
        for (std::size_t x = 0; x < is.w; ++x) sum += input.at(n, c, y, x);
    const double mean = sum / count;
    double var = 0.0;
    for (std::size_t n = 0; n < is.n; ++n)
      for (std::size_t y = 0; y < is.h; ++y)
        for (std::size_t x = 0; x < is.w; ++x) {
          const double d = input.at(n, c, y, x) - mean;
          var += d * d;
        }
    var /= count;
    st.mean[c] = mean;
    st.inv_std[c] = 1.0 / std::sqrt(var + kNormEps);
  }
  return st;
}

/// Per-channel normalization with learnable scale/shift. Statistics are
/// computed over (n, h, w) for each channel on every call, eps = 1e-5.
/// scale and shift have shape (1, C, 1, 1).
inline Tensor normalize_channels(const Tensor& input, const Tensor& scale,
                                 const Tensor& shift) {
  const Shape& is = input.shape();
  const Shape param{1, is.c, 1, 1};
  require(scale.shape() == param && shift.shape() == param,
          "normalize_channels: scale/shift must be shaped " + param.str());
  const ChannelStats st = channel_stats(input);
  Tensor out(is);
  for (std::size_t n = 0; n < is.n; ++n)
    for (std::size_t c = 0; c < is.c; ++c) {
      const double g = scale.at(0, c, 0, 0);
      const double b = shift.at(0, c, 0, 0);
      for (std::size_t y = 0; y < is.h; ++y)
        for (std::size_t x = 0; x < is.w; ++x)
          out.at(n, c, y, x) =
              g * (input.at(n, c, y, x) - st.mean[c]) * st.inv_std[c] + b;
    }
  return out;
}

/// Channel-axis concatenation; all inputs must agree on (n, h, w).
inline Tensor concat_channels(const std::vector<Tensor>& parts) {
  require(!parts.empty(), "concat_channels: no inputs");
  const Shape& first = parts.front().shape();
  std::size_t total_c = 0;
  for (const Tensor& p : parts) {
    const Shape& s = p.shape();
    require(s.n == first.n && s.h == first.h && s.w == first.w,
            "concat_channels: mismatched spatial shape " + s.str() + " vs " +
                first.str());
    total_c += s.c;
  }
  Tensor out(Shape{first.n, total_c, first.h, first.w});
  std::size_t c0 = 0;
  for (const Tensor& p : parts) {
    const Shape& s = p.shape();
    for (std::size_t n = 0; n < s.n; ++n)
      for (std::size_t c = 0; c < s.c; ++c)
        for (std::size_t y = 0; y < s.h; ++y)
          for (std::size_t x = 0; x < s.w; ++x)
            out.at(n, c0 + c, y, x) = p.at(n, c, y, x);
    c0 += s.c;
  }
  return out;
}

}  // namespace fas
