#include "iternet/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#include "iternet/errors.hpp"

namespace iternet {

namespace {

using detail::TensorData;
using DataPtr = std::shared_ptr<TensorData>;

bool needs_grad(const Tensor& t) { return t.requires_grad() || t.tracked(); }

void mark_output(const Tensor& out) { out.impl()->tracked = true; }

double* ensure_grad(const DataPtr& d) {
  if (d->grad.empty()) d->grad.assign(d->values.size(), 0.0);
  return d->grad.data();
}

// Channel rows with `pad` zeros on each end.
std::vector<double> pad_rows(const double* src, int channels, int length, int pad) {
  const int lp = length + 2 * pad;
  std::vector<double> out(static_cast<std::size_t>(channels) * lp, 0.0);
  for (int c = 0; c < channels; ++c) {
    std::memcpy(out.data() + static_cast<std::int64_t>(c) * lp + pad, src + static_cast<std::int64_t>(c) * length,
                static_cast<std::size_t>(length) * sizeof(double));
  }
  return out;
}

// Input planes with a `pad`-wide zero border.
std::vector<double> pad_spatial(const double* src, int channels, int h, int w, int pad) {
  const int hp = h + 2 * pad;
  const int wp = w + 2 * pad;
  std::vector<double> out(static_cast<std::size_t>(channels) * hp * wp, 0.0);
  for (int c = 0; c < channels; ++c) {
    const double* s = src + static_cast<std::int64_t>(c) * h * w;
    double* d = out.data() + static_cast<std::int64_t>(c) * hp * wp + pad * wp + pad;
    for (int row = 0; row < h; ++row) {
      std::memcpy(d + static_cast<std::int64_t>(row) * wp, s + static_cast<std::int64_t>(row) * w,
                  static_cast<std::size_t>(w) * sizeof(double));
    }
  }
  return out;
}

void check_conv_geometry(const char* op, int k, int padding, int dilation) {
  if (k % 2 == 0) throw ConfigError(std::string(op) + ": kernel width must be odd, got " + std::to_string(k));
  if (dilation < 1) throw ConfigError(std::string(op) + ": dilation must be positive");
  if (padding != dilation * (k - 1) / 2) {
    throw ConfigError(std::string(op) + ": padding " + std::to_string(padding) +
                      " does not preserve spatial extent; expected " + std::to_string(dilation * (k - 1) / 2));
  }
}

// out[co][x] += sum_ci sum_t w[co][ci][t] * padded[ci][x + t*dil], with the
// K = 3 hot path fused so each output row is streamed once per channel pair.
void correlate_1d(const double* padded, int c_in, int lp, const double* kernel, int c_out, int k, int dilation,
                  double* out, int length, bool flip_kernel) {
  for (int co = 0; co < c_out; ++co) {
    double* orow = out + static_cast<std::int64_t>(co) * length;
    for (int ci = 0; ci < c_in; ++ci) {
      const double* prow = padded + static_cast<std::int64_t>(ci) * lp;
      const double* wtap = kernel + (static_cast<std::int64_t>(co) * c_in + ci) * k;
      if (k == 3) {
        const double w0 = flip_kernel ? wtap[2] : wtap[0];
        const double w1 = wtap[1];
        const double w2 = flip_kernel ? wtap[0] : wtap[2];
        const double* s0 = prow;
        const double* s1 = prow + dilation;
        const double* s2 = prow + 2 * dilation;
        for (int x = 0; x < length; ++x) orow[x] += w0 * s0[x] + w1 * s1[x] + w2 * s2[x];
      } else {
        for (int t = 0; t < k; ++t) {
          const double wv = wtap[flip_kernel ? k - 1 - t : t];
          const double* src = prow + t * dilation;
          for (int x = 0; x < length; ++x) orow[x] += wv * src[x];
        }
      }
    }
  }
}

// out[co][h][x] += sum_ci sum_kh,kx w[co][ci][kh][kx] * padded[ci][h+kh*dil][x+kx*dil]
void correlate_2d(const double* padded, int c_in, int hp, int wp, const double* kernel, int c_out, int k,
                  int dilation, double* out, int h, int w, bool flip_kernel) {
  const std::int64_t plane = static_cast<std::int64_t>(h) * w;
  const std::int64_t pplane = static_cast<std::int64_t>(hp) * wp;
  for (int co = 0; co < c_out; ++co) {
    double* oplane = out + co * plane;
    for (int ci = 0; ci < c_in; ++ci) {
      const double* pbase = padded + ci * pplane;
      const double* wbase = kernel + ((static_cast<std::int64_t>(co) * c_in + ci) * k) * k;
      if (k == 3) {
        double taps[9];
        for (int kh = 0; kh < 3; ++kh) {
          for (int kx = 0; kx < 3; ++kx) {
            taps[kh * 3 + kx] = flip_kernel ? wbase[(2 - kh) * 3 + (2 - kx)] : wbase[kh * 3 + kx];
          }
        }
        for (int row = 0; row < h; ++row) {
          const double* r0 = pbase + static_cast<std::int64_t>(row) * wp;
          const double* r1 = r0 + static_cast<std::int64_t>(dilation) * wp;
          const double* r2 = r1 + static_cast<std::int64_t>(dilation) * wp;
          double* dst = oplane + static_cast<std::int64_t>(row) * w;
          const int d = dilation;
          for (int x = 0; x < w; ++x) {
            dst[x] += taps[0] * r0[x] + taps[1] * r0[x + d] + taps[2] * r0[x + 2 * d] +
                      taps[3] * r1[x] + taps[4] * r1[x + d] + taps[5] * r1[x + 2 * d] +
                      taps[6] * r2[x] + taps[7] * r2[x + d] + taps[8] * r2[x + 2 * d];
          }
        }
      } else {
        for (int kh = 0; kh < k; ++kh) {
          for (int kx = 0; kx < k; ++kx) {
            const double wv =
                flip_kernel ? wbase[(k - 1 - kh) * k + (k - 1 - kx)] : wbase[kh * k + kx];
            const double* srow = pbase + static_cast<std::int64_t>(kh) * dilation * wp + kx * dilation;
            for (int row = 0; row < h; ++row) {
              const double* src = srow + static_cast<std::int64_t>(row) * wp;
              double* dst = oplane + static_cast<std::int64_t>(row) * w;
              for (int x = 0; x < w; ++x) dst[x] += wv * src[x];
            }
          }
        }
      }
    }
  }
}

// fixed four-way partial sums so the reduction vectorizes and stays
// deterministic
double dot(const double* a, const double* b, int n) {
  double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0, acc3 = 0.0;
  int x = 0;
  for (; x + 4 <= n; x += 4) {
    acc0 += a[x] * b[x];
    acc1 += a[x + 1] * b[x + 1];
    acc2 += a[x + 2] * b[x + 2];
    acc3 += a[x + 3] * b[x + 3];
  }
  for (; x < n; ++x) acc0 += a[x] * b[x];
  return (acc0 + acc1) + (acc2 + acc3);
}

// All K = 3 taps of one channel-pair row in a single pass, with 8-lane
// accumulators the vectorizer maps onto full vectors.
template <int Taps>
struct LaneAcc {
  double lanes[Taps][8] = {};

  void flush(double* dst) const {
    for (int t = 0; t < Taps; ++t) {
      double s0 = 0.0, s1 = 0.0;
      for (int j = 0; j < 4; ++j) {
        s0 += lanes[t][j];
        s1 += lanes[t][j + 4];
      }
      dst[t] += s0 + s1;
    }
  }
};

// gk[co][ci][t] += sum_x go[co][x] * padded[ci][x + t*dil]
void kernel_grad_1d(const double* padded, int c_in, int lp, const double* go, int c_out, int k, int dilation,
                    int length, double* gk) {
  for (int co = 0; co < c_out; ++co) {
    const double* gorow = go + static_cast<std::int64_t>(co) * length;
    for (int ci = 0; ci < c_in; ++ci) {
      const double* prow = padded + static_cast<std::int64_t>(ci) * lp;
      double* dst = gk + (static_cast<std::int64_t>(co) * c_in + ci) * k;
      if (k == 3) {
        LaneAcc<3> acc;
        const int d = dilation;
        int x = 0;
        for (; x + 8 <= length; x += 8) {
          for (int j = 0; j < 8; ++j) {
            const double gv = gorow[x + j];
            acc.lanes[0][j] += gv * prow[x + j];
            acc.lanes[1][j] += gv * prow[x + j + d];
            acc.lanes[2][j] += gv * prow[x + j + 2 * d];
          }
        }
        for (; x < length; ++x) {
          const double gv = gorow[x];
          acc.lanes[0][0] += gv * prow[x];
          acc.lanes[1][0] += gv * prow[x + d];
          acc.lanes[2][0] += gv * prow[x + 2 * d];
        }
        acc.flush(dst);
      } else {
        for (int t = 0; t < k; ++t) dst[t] += dot(gorow, prow + t * dilation, length);
      }
    }
  }
}

// gk[co][ci][kh][kx] += sum_{h,x} go[co][h][x] * padded[ci][h+kh*dil][x+kx*dil]
void kernel_grad_2d(const double* padded, int c_in, int hp, int wp, const double* go, int c_out, int k,
                    int dilation, int h, int w, double* gk) {
  const std::int64_t plane = static_cast<std::int64_t>(h) * w;
  const std::int64_t pplane = static_cast<std::int64_t>(hp) * wp;
  for (int co = 0; co < c_out; ++co) {
    const double* goplane = go + co * plane;
    for (int ci = 0; ci < c_in; ++ci) {
      const double* pbase = padded + ci * pplane;
      double* dst = gk + ((static_cast<std::int64_t>(co) * c_in + ci) * k) * k;
      if (k == 3) {
        LaneAcc<9> acc;
        const int d = dilation;
        for (int row = 0; row < h; ++row) {
          const double* r0 = pbase + static_cast<std::int64_t>(row) * wp;
          const double* r1 = r0 + static_cast<std::int64_t>(d) * wp;
          const double* r2 = r1 + static_cast<std::int64_t>(d) * wp;
          const double* g = goplane + static_cast<std::int64_t>(row) * w;
          int x = 0;
          for (; x + 8 <= w; x += 8) {
            for (int j = 0; j < 8; ++j) {
              const double gv = g[x + j];
              acc.lanes[0][j] += gv * r0[x + j];
              acc.lanes[1][j] += gv * r0[x + j + d];
              acc.lanes[2][j] += gv * r0[x + j + 2 * d];
              acc.lanes[3][j] += gv * r1[x + j];
              acc.lanes[4][j] += gv * r1[x + j + d];
              acc.lanes[5][j] += gv * r1[x + j + 2 * d];
              acc.lanes[6][j] += gv * r2[x + j];
              acc.lanes[7][j] += gv * r2[x + j + d];
              acc.lanes[8][j] += gv * r2[x + j + 2 * d];
            }
          }
          for (; x < w; ++x) {
            const double gv = g[x];
            acc.lanes[0][0] += gv * r0[x];
            acc.lanes[1][0] += gv * r0[x + d];
            acc.lanes[2][0] += gv * r0[x + 2 * d];
            acc.lanes[3][0] += gv * r1[x];
            acc.lanes[4][0] += gv * r1[x + d];
            acc.lanes[5][0] += gv * r1[x + 2 * d];
            acc.lanes[6][0] += gv * r2[x];
            acc.lanes[7][0] += gv * r2[x + d];
            acc.lanes[8][0] += gv * r2[x + 2 * d];
          }
        }
        acc.flush(dst);
      } else {
        for (int kh = 0; kh < k; ++kh) {
          for (int kx = 0; kx < k; ++kx) {
            const double* srow = pbase + static_cast<std::int64_t>(kh) * dilation * wp + kx * dilation;
            double acc = 0.0;
            for (int row = 0; row < h; ++row) {
              acc +=
                  dot(goplane + static_cast<std::int64_t>(row) * w, srow + static_cast<std::int64_t>(row) * wp, w);
            }
            dst[kh * k + kx] += acc;
          }
        }
      }
    }
  }
}

// Transposed kernel view for the input gradient: gi = correlate(go_padded,
// kernel flipped and with in/out channels swapped).
std::vector<double> swap_kernel_channels(const double* kernel, int c_out, int c_in, int taps) {
  std::vector<double> swapped(static_cast<std::size_t>(c_out) * c_in * taps);
  for (int co = 0; co < c_out; ++co) {
    for (int ci = 0; ci < c_in; ++ci) {
      std::memcpy(swapped.data() + (static_cast<std::int64_t>(ci) * c_out + co) * taps,
                  kernel + (static_cast<std::int64_t>(co) * c_in + ci) * taps,
                  static_cast<std::size_t>(taps) * sizeof(double));
    }
  }
  return swapped;
}

}  // namespace

Tensor conv1d(const Tensor& input, const Tensor& kernel, int padding, int dilation) {
  if (input.shape().size() != 2) {
    throw ConfigError("conv1d: input must be [C_in x L], got " + shape_string(input.shape()));
  }
  if (kernel.shape().size() != 3) {
    throw ConfigError("conv1d: kernel must be [C_out x C_in x K], got " + shape_string(kernel.shape()));
  }
  const int c_in = input.shape()[0];
  const int length = input.shape()[1];
  const int c_out = kernel.shape()[0];
  const int k = kernel.shape()[2];
  if (kernel.shape()[1] != c_in) {
    throw ConfigError("conv1d: kernel expects " + std::to_string(kernel.shape()[1]) +
                      " input channels, input has " + std::to_string(c_in));
  }
  check_conv_geometry("conv1d", k, padding, dilation);

  const int lp = length + 2 * padding;
  std::vector<double> padded = pad_rows(input.data(), c_in, length, padding);

  Tensor out({c_out, length});
  correlate_1d(padded.data(), c_in, lp, kernel.data(), c_out, k, dilation, out.data(), length, false);

  Tape* tape = Tape::current();
  const bool gi = needs_grad(input);
  const bool gk = needs_grad(kernel);
  if (tape != nullptr && (gi || gk)) {
    mark_output(out);
    DataPtr in_d = input.impl(), k_d = kernel.impl(), out_d = out.impl();
    tape->record([in_d, k_d, out_d, padded = std::move(padded), c_in, c_out, length, k, padding, dilation, lp,
                  gi, gk]() {
      if (out_d->grad.empty()) return;
      const double* go = out_d->grad.data();
      if (gk) {
        kernel_grad_1d(padded.data(), c_in, lp, go, c_out, k, dilation, length, ensure_grad(k_d));
      }
      if (gi) {
        const std::vector<double> go_padded = pad_rows(go, c_out, length, padding);
        const std::vector<double> swapped = swap_kernel_channels(k_d->values.data(), c_out, c_in, k);
        correlate_1d(go_padded.data(), c_out, lp, swapped.data(), c_in, k, dilation, ensure_grad(in_d), length,
                     true);
      }
    });
  }
  return out;
}

Tensor conv2d(const Tensor& input, const Tensor& kernel, int padding, int dilation) {
  if (input.shape().size() != 3) {
    throw ConfigError("conv2d: input must be [C_in x H x W], got " + shape_string(input.shape()));
  }
  if (kernel.shape().size() != 4 || kernel.shape()[2] != kernel.shape()[3]) {
    throw ConfigError("conv2d: kernel must be [C_out x C_in x K x K], got " + shape_string(kernel.shape()));
  }
  const int c_in = input.shape()[0];
  const int h = input.shape()[1];
  const int w = input.shape()[2];
  const int c_out = kernel.shape()[0];
  const int k = kernel.shape()[2];
  if (kernel.shape()[1] != c_in) {
    throw ConfigError("conv2d: kernel expects " + std::to_string(kernel.shape()[1]) +
                      " input channels, input has " + std::to_string(c_in));
  }
  check_conv_geometry("conv2d", k, padding, dilation);

  const int hp = h + 2 * padding;
  const int wp = w + 2 * padding;
  std::vector<double> padded = pad_spatial(input.data(), c_in, h, w, padding);

  Tensor out({c_out, h, w});
  correlate_2d(padded.data(), c_in, hp, wp, kernel.data(), c_out, k, dilation, out.data(), h, w, false);

  Tape* tape = Tape::current();
  const bool gi = needs_grad(input);
  const bool gk = needs_grad(kernel);
  if (tape != nullptr && (gi || gk)) {
    mark_output(out);
    DataPtr in_d = input.impl(), k_d = kernel.impl(), out_d = out.impl();
    tape->record([in_d, k_d, out_d, padded = std::move(padded), c_in, c_out, h, w, k, padding, dilation, hp, wp,
                  gi, gk]() {
      if (out_d->grad.empty()) return;
      const double* go = out_d->grad.data();
      if (gk) {
        kernel_grad_2d(padded.data(), c_in, hp, wp, go, c_out, k, dilation, h, w, ensure_grad(k_d));
      }
      if (gi) {
        const std::vector<double> go_padded = pad_spatial(go, c_out, h, w, padding);
        const std::vector<double> swapped = swap_kernel_channels(k_d->values.data(), c_out, c_in, k * k);
        correlate_2d(go_padded.data(), c_out, hp, wp, swapped.data(), c_in, k, dilation, ensure_grad(in_d), h, w,
                     true);
      }
    });
  }
  return out;
}

Tensor relu(const Tensor& x) {
  Tensor out(x.shape());
  const double* in = x.data();
  double* o = out.data();
  const std::int64_t n = x.size();
  for (std::int64_t i = 0; i < n; ++i) o[i] = in[i] > 0.0 ? in[i] : 0.0;

  Tape* tape = Tape::current();
  if (tape != nullptr && needs_grad(x)) {
    mark_output(out);
    DataPtr in_d = x.impl(), out_d = out.impl();
    tape->record([in_d, out_d, n]() {
      if (out_d->grad.empty()) return;
      const double* go = out_d->grad.data();
      const double* in = in_d->values.data();
      double* gi = ensure_grad(in_d);
      for (std::int64_t i = 0; i < n; ++i) {
        if (in[i] > 0.0) gi[i] += go[i];
      }
    });
  }
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) {
    throw ConfigError("add: shape mismatch " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  }
  Tensor out(a.shape());
  const double* pa = a.data();
  const double* pb = b.data();
  double* o = out.data();
  const std::int64_t n = a.size();
  for (std::int64_t i = 0; i < n; ++i) o[i] = pa[i] + pb[i];

  Tape* tape = Tape::current();
  const bool ga = needs_grad(a);
  const bool gb = needs_grad(b);
  if (tape != nullptr && (ga || gb)) {
    mark_output(out);
    DataPtr a_d = a.impl(), b_d = b.impl(), out_d = out.impl();
    tape->record([a_d, b_d, out_d, n, ga, gb]() {
      if (out_d->grad.empty()) return;
      const double* go = out_d->grad.data();
      if (ga) {
        double* g = ensure_grad(a_d);
        for (std::int64_t i = 0; i < n; ++i) g[i] += go[i];
      }
      if (gb) {
        double* g = ensure_grad(b_d);
        for (std::int64_t i = 0; i < n; ++i) g[i] += go[i];
      }
    });
  }
  return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) {
    throw ConfigError("mul: shape mismatch " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  }
  Tensor out(a.shape());
  const double* pa = a.data();
  const double* pb = b.data();
  double* o = out.data();
  const std::int64_t n = a.size();
  for (std::int64_t i = 0; i < n; ++i) o[i] = pa[i] * pb[i];

  Tape* tape = Tape::current();
  const bool ga = needs_grad(a);
  const bool gb = needs_grad(b);
  if (tape != nullptr && (ga || gb)) {
    mark_output(out);
    DataPtr a_d = a.impl(), b_d = b.impl(), out_d = out.impl();
    tape->record([a_d, b_d, out_d, n, ga, gb]() {
      if (out_d->grad.empty()) return;
      const double* go = out_d->grad.data();
      if (ga) {
        double* g = ensure_grad(a_d);
        const double* vb = b_d->values.data();
        for (std::int64_t i = 0; i < n; ++i) g[i] += go[i] * vb[i];
      }
      if (gb) {
        double* g = ensure_grad(b_d);
        const double* va = a_d->values.data();
        for (std::int64_t i = 0; i < n; ++i) g[i] += go[i] * va[i];
      }
    });
  }
  return out;
}

Tensor sum(const Tensor& x) {
  const double* in = x.data();
  const std::int64_t n = x.size();
  double acc = 0.0;
  for (std::int64_t i = 0; i < n; ++i) acc += in[i];
  Tensor out = Tensor::scalar(acc);

  Tape* tape = Tape::current();
  if (tape != nullptr && needs_grad(x)) {
    mark_output(out);
    DataPtr in_d = x.impl(), out_d = out.impl();
    tape->record([in_d, out_d, n]() {
      if (out_d->grad.empty()) return;
      const double go = out_d->grad[0];
      double* gi = ensure_grad(in_d);
      for (std::int64_t i = 0; i < n; ++i) gi[i] += go;
    });
  }
  return out;
}

Tensor per_position_cross_entropy(const Tensor& logits, std::span<const std::uint8_t> target) {
  if (logits.shape().empty() || logits.shape()[0] != 2) {
    throw ConfigError("cross entropy: logits must have a leading 2-class axis, got " +
                      shape_string(logits.shape()));
  }
  const std::int64_t positions = logits.size() / 2;
  if (static_cast<std::int64_t>(target.size()) != positions) {
    throw ConfigError("cross entropy: " + std::to_string(positions) + " positions but " +
                      std::to_string(target.size()) + " target values");
  }
  for (std::uint8_t t : target) {
    if (t > 1) throw ConfigError("cross entropy: target values must be 0 or 1");
  }

  const double* z = logits.data();
  double total = 0.0;
  for (std::int64_t p = 0; p < positions; ++p) {
    const double z0 = z[p];
    const double z1 = z[positions + p];
    const double m = std::max(z0, z1);
    const double lse = m + std::log(std::exp(z0 - m) + std::exp(z1 - m));
    total += lse - (target[static_cast<std::size_t>(p)] == 1 ? z1 : z0);
  }
  Tensor out = Tensor::scalar(total / static_cast<double>(positions));

  Tape* tape = Tape::current();
  if (tape != nullptr && needs_grad(logits)) {
    mark_output(out);
    DataPtr in_d = logits.impl(), out_d = out.impl();
    std::vector<std::uint8_t> tgt(target.begin(), target.end());
    tape->record([in_d, out_d, tgt = std::move(tgt), positions]() {
      if (out_d->grad.empty()) return;
      const double go = out_d->grad[0] / static_cast<double>(positions);
      const double* z = in_d->values.data();
      double* gi = ensure_grad(in_d);
      for (std::int64_t p = 0; p < positions; ++p) {
        const double z0 = z[p];
        const double z1 = z[positions + p];
        const double m = std::max(z0, z1);
        const double e0 = std::exp(z0 - m);
        const double e1 = std::exp(z1 - m);
        const double p1 = e1 / (e0 + e1);
        const bool one = tgt[static_cast<std::size_t>(p)] == 1;
        gi[p] += go * ((1.0 - p1) - (one ? 0.0 : 1.0));
        gi[positions + p] += go * (p1 - (one ? 1.0 : 0.0));
      }
    });
  }
  return out;
}

}  // namespace iternet
