#pragma once

#include <cstddef>
#include <span>

#include "daylight/nn/tape.hpp"
#include "daylight/rng.hpp"

// Differentiable primitives. Image tensors are batched NCHW; vectors are
// batched as [B, n] rows.
namespace illum::nn {

std::size_t conv_output_size(std::size_t in, std::size_t kernel, std::size_t padding, std::size_t stride);

// Cross-correlation (no kernel flip).
// input [B,Cin,H,W], kernels [Cout,Cin,k,k], bias [Cout] -> [B,Cout,H',W'].
template <typename T>
Var conv2d(Tape<T>& tape, Var input, Var kernels, Var bias, std::size_t padding, std::size_t stride);

// Non-overlapping max pooling; ties route the gradient to the first cell in
// row-major order.
template <typename T>
Var maxpool2d(Tape<T>& tape, Var input, std::size_t window);

// input [B,n], weights [m,n], bias [m] -> [B,m].
template <typename T>
Var dense(Tape<T>& tape, Var input, Var weights, Var bias);

// max(0, x); the subgradient at 0 is 0.
template <typename T>
Var relu(Tape<T>& tape, Var input);

// Inverted dropout. Identity in eval mode or when rate == 0.
template <typename T>
Var dropout(Tape<T>& tape, Var input, double rate, bool training, Rng& rng);

// [B,C,H,W] -> [B,C], mean over each plane.
template <typename T>
Var global_avg_pool(Tape<T>& tape, Var input);

// [B,p] ++ [B,q] -> [B,p+q].
template <typename T>
Var concat_cols(Tape<T>& tape, Var left, Var right);

// Row gather: out[i] = input[rows[i]]; backward scatter-adds.
template <typename T>
Var gather_rows(Tape<T>& tape, Var input, std::span<const std::size_t> rows);

// Mean of squared differences over every element.
template <typename T>
Var mse_loss(Tape<T>& tape, Var pred, Var target);

// Sum of all elements -> [1].
template <typename T>
Var sum(Tape<T>& tape, Var input);

// Elementwise c * x for a constant c.
template <typename T>
Var scale(Tape<T>& tape, Var input, T factor);

// s * x where s is a one-element tensor on the tape.
template <typename T>
Var scale_by(Tape<T>& tape, Var scalar, Var input);

}  // namespace illum::nn
