#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "adling/autodiff/tape.hpp"
#include "adling/random.hpp"

namespace adling::ad {

enum class Mode { train, eval };
enum class Padding { valid, same };

/// Rows ids[i] of table [V x D]; the gradient scatters additively back into
/// the table rows. Throws BoundsError for ids outside [0, V).
Var embed_lookup(Var table, std::span<const int> ids);

/// One filter bank over a sequence x [L x D]. filters is [F x w x D], bias [F].
/// out[t, f] = bias[f] + sum_{i<w, j<D} x[t + i - offset, j] * filters[f, i, j]
/// Valid mode gives L - w + 1 rows (offset 0; ShapeError when w > L). Same
/// mode gives L rows with offset (w - 1) / 2 and zero rows outside the
/// sequence, so the extra pad row of an even-width window sits on the right.
Var conv1d(Var x, Var filters, Var bias, Padding padding);

/// One conv1d per window size; filters[i] and biases[i] belong together.
std::vector<Var> conv1d_bank(Var x, std::span<const Var> filters, std::span<const Var> biases, Padding padding);

Var relu(Var x);

/// Column-wise maximum of x [L x F]. The gradient goes to the first maximal
/// row of each column.
Var max_over_time(Var x);

/// Rank-1 parts are joined end to end; rank-2 parts with equal row counts
/// are joined along columns.
Var concat(std::span<const Var> parts);

/// Stacks equal-length rank-1 values as the rows of a rank-2 value.
Var stack_rows(std::span<const Var> rows);

/// Row i of a rank-2 value, as a rank-1 value.
Var row(Var x, std::size_t i);

/// Elements [offset, offset + length) of a rank-1 value.
Var slice(Var x, std::size_t offset, std::size_t length);

Var add(Var a, Var b);
Var scale(Var x, double factor);
Var sum(Var x);
Var pick(Var x, std::size_t index);

/// x [A] -> [B] or x [N x A] -> [N x B]: x W + b.
Var dense(Var x, Var weight, Var bias);

struct LstmWeights {
  Var input;      // [D x 4H], gate blocks ordered input, forget, cell, output
  Var recurrent;  // [H x 4H]
  Var bias;       // [4H]
};

struct LstmState {
  Var h;
  Var c;
};

/// i, f, o = sigmoid; g = tanh; c_t = f * c_prev + i * g; h_t = o * tanh(c_t).
LstmState lstm_cell(Var x, Var h_prev, Var c_prev, const LstmWeights& weights);

struct SoftmaxXent {
  Var loss;             // scalar, -log p[label]
  Tensor probabilities;
};

/// Max-shifted softmax with cross-entropy; the logits gradient is p - onehot.
SoftmaxXent softmax_xent(Var logits, std::size_t label);

std::vector<double> softmax(std::span<const double> logits);

/// Inverted-dropout mask: each entry is 0 with probability 1 - keep and
/// 1 / keep otherwise. Throws ConfigError unless 0 < keep <= 1.
Tensor dropout_mask(const Shape& shape, double keep, Rng& rng);

/// Elementwise x * mask with a fixed mask; reusing one mask across the
/// timesteps of a sequence gives variational (recurrent) dropout.
Var apply_mask(Var x, const Tensor& mask);

/// Identity in eval mode or when keep == 1; otherwise x times a fresh mask.
Var dropout(Var x, double keep, Mode mode, Rng& rng);

void check_keep_probability(double keep);

}  // namespace adling::ad
