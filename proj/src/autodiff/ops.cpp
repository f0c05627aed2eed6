#include "adling/autodiff/ops.hpp"

#include <algorithm>
#include <cmath>

#include "adling/error.hpp"

namespace adling::ad {
namespace {

using StridedWindows = Eigen::Map<const RowMatrix, 0, Eigen::OuterStride<>>;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void require_rank(const Var& v, std::size_t rank, const char* op) {
  if (v.value().rank() != rank) {
    throw ShapeError(std::string(op) + " expects rank " + std::to_string(rank) + ", got " +
                     shape_string(v.shape()));
  }
}

}  // namespace

Var embed_lookup(Var table, std::span<const int> ids) {
  require_rank(table, 2, "embed_lookup");
  const Tensor& t = table.value();
  const std::size_t vocab = t.dim(0);
  const std::size_t width = t.dim(1);
  if (ids.empty()) throw ShapeError("embed_lookup needs at least one id");
  Tensor out({ids.size(), width});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= vocab) {
      throw BoundsError("embedding id " + std::to_string(ids[i]) + " outside table of " + std::to_string(vocab) +
                        " rows");
    }
    std::copy_n(t.row(static_cast<std::size_t>(ids[i])).data(), width, out.row(i).data());
  }
  return table.tape().record(std::move(out), {table},
                             [table, rows = std::vector<int>(ids.begin(), ids.end())](Tape& tape, Var self) {
                               const Tensor& g = tape.grad(self);
                               Tensor& gt = tape.grad(table);
                               for (std::size_t i = 0; i < rows.size(); ++i) {
                                 auto src = g.row(i);
                                 auto dst = gt.row(static_cast<std::size_t>(rows[i]));
                                 for (std::size_t j = 0; j < src.size(); ++j) dst[j] += src[j];
                               }
                             });
}

Var conv1d(Var x, Var filters, Var bias, Padding padding) {
  require_rank(x, 2, "conv1d input");
  require_rank(filters, 3, "conv1d filters");
  require_rank(bias, 1, "conv1d bias");
  const Tensor& xv = x.value();
  const Tensor& fv = filters.value();
  const std::size_t len = xv.dim(0);
  const std::size_t width = xv.dim(1);
  const std::size_t n_filters = fv.dim(0);
  const std::size_t window = fv.dim(1);
  if (fv.dim(2) != width) {
    throw ShapeError("conv1d filters " + shape_string(fv.shape()) + " do not match input " + shape_string(xv.shape()));
  }
  if (bias.value().size() != n_filters) throw ShapeError("conv1d bias size does not match filter count");

  // Windows are contiguous runs of `window` rows, so the im2col matrix is a
  // strided view over the (possibly zero-padded) sequence buffer.
  std::size_t left = 0;
  std::size_t out_len = 0;
  Tensor padded;
  if (padding == Padding::valid) {
    if (window > len) {
      throw ShapeError("conv1d window " + std::to_string(window) + " longer than sequence " + std::to_string(len));
    }
    out_len = len - window + 1;
  } else {
    left = (window - 1) / 2;
    out_len = len;
    padded = Tensor({len + window - 1, width}, 0.0);
    std::copy_n(xv.data(), xv.size(), padded.row(left).data());
  }
  const double* source = padding == Padding::valid ? xv.data() : padded.data();
  const auto rows = static_cast<Eigen::Index>(out_len);
  const auto span = static_cast<Eigen::Index>(window * width);
  const auto nf = static_cast<Eigen::Index>(n_filters);

  Tensor out({out_len, n_filters});
  {
    StridedWindows windows(source, rows, span, Eigen::OuterStride<>(static_cast<Eigen::Index>(width)));
    ConstMatrixMap kernel(fv.data(), nf, span);
    MatrixMap o = as_matrix(out);
    o.noalias() = windows * kernel.transpose();
    o.rowwise() += as_vector(bias.value()).transpose();
  }

  return x.tape().record(
      std::move(out), {x, filters, bias},
      [x, filters, bias, padded = std::move(padded), left, out_len, window, width, len, padding](Tape& tape, Var self) {
        const Tensor& g = tape.grad(self);
        ConstMatrixMap gm = as_matrix(g);
        const auto rows = static_cast<Eigen::Index>(out_len);
        const auto span = static_cast<Eigen::Index>(window * width);
        const double* source = padding == Padding::valid ? x.value().data() : padded.data();
        StridedWindows windows(source, rows, span, Eigen::OuterStride<>(static_cast<Eigen::Index>(width)));
        if (tape.requires_grad(filters)) {
          Tensor& gf = tape.grad(filters);
          MatrixMap gfm(gf.data(), gm.cols(), span);
          gfm.noalias() += gm.transpose() * windows;
        }
        if (tape.requires_grad(bias)) as_vector(tape.grad(bias)) += gm.colwise().sum().transpose();
        if (tape.requires_grad(x)) {
          ConstMatrixMap kernel(filters.value().data(), gm.cols(), span);
          const RowMatrix gw = gm * kernel;
          Tensor& gx = tape.grad(x);
          for (std::size_t t = 0; t < out_len; ++t) {
            for (std::size_t i = 0; i < window; ++i) {
              const std::ptrdiff_t r = static_cast<std::ptrdiff_t>(t + i) - static_cast<std::ptrdiff_t>(left);
              if (r < 0 || r >= static_cast<std::ptrdiff_t>(len)) continue;
              double* dst = gx.row(static_cast<std::size_t>(r)).data();
              const double* src = gw.data() + t * window * width + i * width;
              for (std::size_t j = 0; j < width; ++j) dst[j] += src[j];
            }
          }
        }
      });
}

std::vector<Var> conv1d_bank(Var x, std::span<const Var> filters, std::span<const Var> biases, Padding padding) {
  if (filters.size() != biases.size()) throw ShapeError("conv1d_bank needs one bias per filter bank");
  std::vector<Var> out;
  out.reserve(filters.size());
  for (std::size_t i = 0; i < filters.size(); ++i) out.push_back(conv1d(x, filters[i], biases[i], padding));
  return out;
}

Var relu(Var x) {
  Tensor out = x.value();
  for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
  return x.tape().record(std::move(out), {x}, [x](Tape& tape, Var self) {
    const Tensor& g = tape.grad(self);
    const Tensor& y = self.value();
    Tensor& gx = tape.grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (y[i] > 0.0) gx[i] += g[i];
    }
  });
}

Var max_over_time(Var x) {
  require_rank(x, 2, "max_over_time");
  const Tensor& xv = x.value();
  const std::size_t len = xv.dim(0);
  const std::size_t width = xv.dim(1);
  Tensor out({width});
  std::vector<std::size_t> argmax(width, 0);
  for (std::size_t f = 0; f < width; ++f) {
    double best = xv.at(0, f);
    for (std::size_t t = 1; t < len; ++t) {
      if (xv.at(t, f) > best) {
        best = xv.at(t, f);
        argmax[f] = t;
      }
    }
    out[f] = best;
  }
  return x.tape().record(std::move(out), {x}, [x, argmax = std::move(argmax)](Tape& tape, Var self) {
    const Tensor& g = tape.grad(self);
    Tensor& gx = tape.grad(x);
    for (std::size_t f = 0; f < argmax.size(); ++f) gx.at(argmax[f], f) += g[f];
  });
}

Var concat(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat needs at least one part");
  const std::size_t rank = parts.front().value().rank();
  const std::size_t rows = parts.front().value().rows();
  std::size_t total = 0;
  for (const Var& p : parts) {
    if (p.value().rank() != rank || p.value().rows() != rows || rank > 2) {
      throw ShapeError("concat parts must share rank (1 or 2) and row count");
    }
    total += p.value().cols();
  }
  Tensor out(rank == 1 ? Shape{total} : Shape{rows, total});
  std::size_t offset = 0;
  for (const Var& p : parts) {
    const Tensor& v = p.value();
    for (std::size_t r = 0; r < rows; ++r) std::copy_n(v.row(r).data(), v.cols(), out.row(r).data() + offset);
    offset += v.cols();
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return parts.front().tape().record(std::move(out), inputs, [inputs](Tape& tape, Var self) {
    const Tensor& g = tape.grad(self);
    std::size_t offset = 0;
    for (const Var& p : inputs) {
      const std::size_t cols = p.value().cols();
      if (tape.requires_grad(p)) {
        Tensor& gp = tape.grad(p);
        for (std::size_t r = 0; r < gp.rows(); ++r) {
          const double* src = g.row(r).data() + offset;
          double* dst = gp.row(r).data();
          for (std::size_t j = 0; j < cols; ++j) dst[j] += src[j];
        }
      }
      offset += cols;
    }
  });
}

Var stack_rows(std::span<const Var> rows) {
  if (rows.empty()) throw ShapeError("stack_rows needs at least one row");
  const std::size_t width = rows.front().value().size();
  Tensor out({rows.size(), width});
  for (std::size_t r = 0; r < rows.size(); ++r) {
    require_rank(rows[r], 1, "stack_rows");
    if (rows[r].value().size() != width) throw ShapeError("stack_rows needs equal-length rows");
    std::copy_n(rows[r].value().data(), width, out.row(r).data());
  }
  std::vector<Var> inputs(rows.begin(), rows.end());
  return rows.front().tape().record(std::move(out), inputs, [inputs](Tape& tape, Var self) {
    const Tensor& g = tape.grad(self);
    for (std::size_t r = 0; r < inputs.size(); ++r) {
      if (!tape.requires_grad(inputs[r])) continue;
      Tensor& gr = tape.grad(inputs[r]);
      const auto src = g.row(r);
      for (std::size_t j = 0; j < src.size(); ++j) gr[j] += src[j];
    }
  });
}

Var row(Var x, std::size_t i) {
  require_rank(x, 2, "row");
  if (i >= x.value().dim(0)) throw BoundsError("row " + std::to_string(i) + " out of range");
  const std::size_t width = x.value().dim(1);
  Tensor out({width});
  std::copy_n(x.value().row(i).data(), width, out.data());
  return x.tape().record(std::move(out), {x}, [x, i](Tape& tape, Var self) {
    const Tensor& g = tape.grad(self);
    auto dst = tape.grad(x).row(i);
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += g[j];
  });
}

Var slice(Var x, std::size_t offset, std::size_t length) {
  require_rank(x, 1, "slice");
  if (length == 0 || offset + length > x.value().size()) throw ShapeError("slice out of range");
  Tensor out({length});
  std::copy_n(x.value().data() + offset, length, out.data());
  return x.tape().record(std::move(out), {x}, [x, offset](Tape& tape, Var self) {
    const Tensor& g = tape.grad(self);
    Tensor& gx = tape.grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[offset + i] += g[i];
  });
}

Var add(Var a, Var b) {
  if (a.shape() != b.shape()) throw ShapeError("add needs equal shapes");
  Tensor out = a.value();
  out.add(b.value());
  return a.tape().record(std::move(out), {a, b}, [a, b](Tape& tape, Var self) {
    const Tensor& g = tape.grad(self);
    if (tape.requires_grad(a)) tape.grad(a).add(g);
    if (tape.requires_grad(b)) tape.grad(b).add(g);
  });
}

Var scale(Var x, double factor) {
  Tensor out = x.value();
  out.scale(factor);
  return x.tape().record(std::move(out), {x}, [x, factor](Tape& tape, Var self) {
    const Tensor& g = tape.grad(self);
    Tensor& gx = tape.grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += factor * g[i];
  });
}

Var sum(Var x) {
  double total = 0.0;
  for (double v : x.value().values()) total += v;
  return x.tape().record(Tensor::scalar(total), {x}, [x](Tape& tape, Var self) {
    const double g = tape.grad(self)[0];
    for (double& v : tape.grad(x).values()) v += g;
  });
}

Var pick(Var x, std::size_t index) {
  if (index >= x.value().size()) throw BoundsError("pick index " + std::to_string(index) + " out of range");
  return x.tape().record(Tensor::scalar(x.value()[index]), {x}, [x, index](Tape& tape, Var self) {
    tape.grad(x)[index] += tape.grad(self)[0];
  });
}

Var dense(Var x, Var weight, Var bias) {
  require_rank(weight, 2, "dense weight");
  require_rank(bias, 1, "dense bias");
  const Tensor& xv = x.value();
  const Tensor& w = weight.value();
  if (xv.rank() > 2 || xv.cols() != w.dim(0) || bias.value().size() != w.dim(1)) {
    throw ShapeError("dense: input " + shape_string(xv.shape()) + ", weight " + shape_string(w.shape()) +
                     ", bias " + shape_string(bias.shape()));
  }
  Tensor out(xv.rank() == 1 ? Shape{w.dim(1)} : Shape{xv.dim(0), w.dim(1)});
  MatrixMap o = as_matrix(out);
  o.noalias() = as_matrix(xv) * as_matrix(w);
  o.rowwise() += as_vector(bias.value()).transpose();
  return x.tape().record(std::move(out), {x, weight, bias}, [x, weight, bias](Tape& tape, Var self) {
    const Tensor& gt = tape.grad(self);
    ConstMatrixMap g = as_matrix(gt);
    if (tape.requires_grad(x)) as_matrix(tape.grad(x)).noalias() += g * as_matrix(weight.value()).transpose();
    if (tape.requires_grad(weight)) as_matrix(tape.grad(weight)).noalias() += as_matrix(x.value()).transpose() * g;
    if (tape.requires_grad(bias)) as_vector(tape.grad(bias)) += g.colwise().sum().transpose();
  });
}

LstmState lstm_cell(Var x, Var h_prev, Var c_prev, const LstmWeights& weights) {
  require_rank(x, 1, "lstm_cell input");
  const std::size_t hidden = h_prev.value().size();
  const Tensor& wx = weights.input.value();
  const Tensor& wh = weights.recurrent.value();
  if (c_prev.value().size() != hidden || wx.rank() != 2 || wx.dim(0) != x.value().size() ||
      wx.dim(1) != 4 * hidden || wh.rank() != 2 || wh.dim(0) != hidden || wh.dim(1) != 4 * hidden ||
      weights.bias.value().size() != 4 * hidden) {
    throw ShapeError("lstm_cell: inconsistent shapes for hidden size " + std::to_string(hidden));
  }

  Eigen::VectorXd z = as_matrix(wx).transpose() * as_vector(x.value()) +
                      as_matrix(wh).transpose() * as_vector(h_prev.value()) + as_vector(weights.bias.value());
  const auto H = static_cast<Eigen::Index>(hidden);
  Tensor gates({4 * hidden});  // activated i, f, g, o
  Tensor state({2 * hidden});  // h_t then c_t
  const Tensor& c0 = c_prev.value();
  for (Eigen::Index k = 0; k < H; ++k) {
    const double i = sigmoid(z[k]);
    const double f = sigmoid(z[H + k]);
    const double g = std::tanh(z[2 * H + k]);
    const double o = sigmoid(z[3 * H + k]);
    const double c = f * c0[k] + i * g;
    gates[k] = i;
    gates[H + k] = f;
    gates[2 * H + k] = g;
    gates[3 * H + k] = o;
    state[H + k] = c;
    state[k] = o * std::tanh(c);
  }

  Tape& tape = x.tape();
  const Var cell = tape.record(
      std::move(state), {x, h_prev, c_prev, weights.input, weights.recurrent, weights.bias},
      [x, h_prev, c_prev, weights, gates = std::move(gates), H](Tape& tape, Var self) {
        const Tensor& g = tape.grad(self);
        const Tensor& s = self.value();
        const Tensor& c0 = c_prev.value();
        Eigen::VectorXd dz(4 * H);
        Tensor* gc = tape.requires_grad(c_prev) ? &tape.grad(c_prev) : nullptr;
        for (Eigen::Index k = 0; k < H; ++k) {
          const double i = gates[k], f = gates[H + k], gg = gates[2 * H + k], o = gates[3 * H + k];
          const double tc = std::tanh(s[H + k]);
          const double dh = g[k];
          const double dc = g[H + k] + dh * o * (1.0 - tc * tc);
          dz[k] = dc * gg * i * (1.0 - i);
          dz[H + k] = dc * c0[k] * f * (1.0 - f);
          dz[2 * H + k] = dc * i * (1.0 - gg * gg);
          dz[3 * H + k] = dh * tc * o * (1.0 - o);
          if (gc) (*gc)[k] += dc * f;
        }
        if (tape.requires_grad(x)) as_vector(tape.grad(x)) += as_matrix(weights.input.value()) * dz;
        if (tape.requires_grad(h_prev)) as_vector(tape.grad(h_prev)) += as_matrix(weights.recurrent.value()) * dz;
        if (tape.requires_grad(weights.input)) {
          as_matrix(tape.grad(weights.input)).noalias() += as_vector(x.value()) * dz.transpose();
        }
        if (tape.requires_grad(weights.recurrent)) {
          as_matrix(tape.grad(weights.recurrent)).noalias() += as_vector(h_prev.value()) * dz.transpose();
        }
        if (tape.requires_grad(weights.bias)) as_vector(tape.grad(weights.bias)) += dz;
      });
  return {slice(cell, 0, hidden), slice(cell, hidden, hidden)};
}

std::vector<double> softmax(std::span<const double> logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - top);
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

SoftmaxXent softmax_xent(Var logits, std::size_t label) {
  require_rank(logits, 1, "softmax_xent");
  const Tensor& z = logits.value();
  if (label >= z.size()) throw BoundsError("label " + std::to_string(label) + " out of range");
  const double top = *std::max_element(z.values().begin(), z.values().end());
  double total = 0.0;
  for (double v : z.values()) total += std::exp(v - top);
  const double loss = top + std::log(total) - z[label];
  std::vector<double> p = softmax(z.values());
  Tensor probs = Tensor::vector(p);
  Var out = logits.tape().record(Tensor::scalar(loss), {logits}, [logits, p, label](Tape& tape, Var self) {
    const double g = tape.grad(self)[0];
    Tensor& gz = tape.grad(logits);
    for (std::size_t i = 0; i < p.size(); ++i) gz[i] += g * (p[i] - (i == label ? 1.0 : 0.0));
  });
  return {out, std::move(probs)};
}

void check_keep_probability(double keep) {
  if (!(keep > 0.0 && keep <= 1.0)) {
    throw ConfigError("keep probability must lie in (0, 1] (dropout rate in [0, 1)), got " + std::to_string(keep));
  }
}

Tensor dropout_mask(const Shape& shape, double keep, Rng& rng) {
  check_keep_probability(keep);
  Tensor mask(shape, 0.0);
  const double survivor = 1.0 / keep;
  for (double& m : mask.values()) m = rng.bernoulli(keep) ? survivor : 0.0;
  return mask;
}

Var apply_mask(Var x, const Tensor& mask) {
  if (mask.shape() != x.shape()) throw ShapeError("dropout mask shape does not match input");
  Tensor out = x.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
  return x.tape().record(std::move(out), {x}, [x, mask](Tape& tape, Var self) {
    const Tensor& g = tape.grad(self);
    Tensor& gx = tape.grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * mask[i];
  });
}

Var dropout(Var x, double keep, Mode mode, Rng& rng) {
  check_keep_probability(keep);
  if (mode == Mode::eval || keep == 1.0) return x;
  return apply_mask(x, dropout_mask(x.shape(), keep, rng));
}

}  // namespace adling::ad
