// Copyright 2026 The framecast Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "framecast/model/parameters.hpp"

namespace framecast::layers {

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatrixMap = Eigen::Map<RowMatrix<T>>;
template <typename T>
using ConstMatrixMap = Eigen::Map<const RowMatrix<T>>;
template <typename T>
using VectorMap = Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>>;
template <typename T>
using ConstVectorMap = Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>>;

/// Sampling geometry shared by convolution and its transpose. A patch row
/// (c, ky, kx) at small-grid position (y, x) reads big-grid pixel
/// (y * stride - pad + ky, x * stride - pad + kx); reads outside the big grid
/// are zero and writes outside it are dropped.
struct PatchGeometry {
  int channels;
  Extent big;
  Extent small;
  int kernel;
  int stride;
  int pad;

  int rows() const { return channels * kernel * kernel; }
  int cols() const { return small.height * small.width; }
};

/// Gathers big-grid patches into a (channels*k*k) x (small positions) matrix.
template <typename T>
void im2col(std::span<const T> image, const PatchGeometry& g, std::span<T> cols) {
  const int positions = g.cols();
  for (int c = 0; c < g.channels; ++c) {
    const T* plane = image.data() + static_cast<std::size_t>(c) * g.big.height * g.big.width;
    for (int ky = 0; ky < g.kernel; ++ky) {
      for (int kx = 0; kx < g.kernel; ++kx) {
        T* row = cols.data() + static_cast<std::size_t>((c * g.kernel + ky) * g.kernel + kx) * positions;
        for (int y = 0; y < g.small.height; ++y) {
          const int by = y * g.stride - g.pad + ky;
          T* dst = row + static_cast<std::size_t>(y) * g.small.width;
          if (by < 0 || by >= g.big.height) {
            std::fill(dst, dst + g.small.width, T(0));
            continue;
          }
          const T* src = plane + static_cast<std::size_t>(by) * g.big.width;
          for (int x = 0; x < g.small.width; ++x) {
            const int bx = x * g.stride - g.pad + kx;
            dst[x] = (bx >= 0 && bx < g.big.width) ? src[bx] : T(0);
          }
        }
      }
    }
  }
}

/// Adjoint of im2col: scatters-and-adds patch columns back onto the big grid.
template <typename T>
void col2im(std::span<const T> cols, const PatchGeometry& g, std::span<T> image) {
  std::fill(image.begin(), image.end(), T(0));
  const int positions = g.cols();
  for (int c = 0; c < g.channels; ++c) {
    T* plane = image.data() + static_cast<std::size_t>(c) * g.big.height * g.big.width;
    for (int ky = 0; ky < g.kernel; ++ky) {
      for (int kx = 0; kx < g.kernel; ++kx) {
        const T* row =
            cols.data() + static_cast<std::size_t>((c * g.kernel + ky) * g.kernel + kx) * positions;
        for (int y = 0; y < g.small.height; ++y) {
          const int by = y * g.stride - g.pad + ky;
          if (by < 0 || by >= g.big.height) continue;
          const T* src = row + static_cast<std::size_t>(y) * g.small.width;
          T* dst = plane + static_cast<std::size_t>(by) * g.big.width;
          for (int x = 0; x < g.small.width; ++x) {
            const int bx = x * g.stride - g.pad + kx;
            if (bx >= 0 && bx < g.big.width) dst[bx] += src[x];
          }
        }
      }
    }
  }
}

inline PatchGeometry geometry_of(const LayerSpec& spec) {
  if (spec.kind == LayerKind::Conv) {
    return {spec.in_channels, spec.in, spec.out, spec.kernel, spec.stride, spec.pad};
  }
  return {spec.out_channels, spec.out, spec.in, spec.kernel, spec.stride, spec.pad};
}

/// Pre-activation output z of one layer. `cols` receives the patch matrix a
/// later backward pass reuses (convolutions only).
template <typename T>
void forward_linear(const LayerSpec& spec, std::span<const T> weight, std::span<const T> bias,
                    std::span<const T> input, std::span<T> output, AlignedVector<T>& cols) {
  const Eigen::Index out_ch = spec.out_channels;
  const Eigen::Index in_ch = spec.in_channels;
  switch (spec.kind) {
    case LayerKind::Dense: {
      ConstMatrixMap<T> w(weight.data(), out_ch, in_ch);
      VectorMap<T> z(output.data(), out_ch);
      z.noalias() = w * ConstVectorMap<T>(input.data(), in_ch);
      z += ConstVectorMap<T>(bias.data(), out_ch);
      break;
    }
    case LayerKind::Conv: {
      const auto g = geometry_of(spec);
      cols.resize(static_cast<std::size_t>(g.rows()) * g.cols());
      im2col<T>(input, g, cols);
      ConstMatrixMap<T> w(weight.data(), out_ch, g.rows());
      MatrixMap<T> z(output.data(), out_ch, g.cols());
      z.noalias() = w * ConstMatrixMap<T>(cols.data(), g.rows(), g.cols());
      z.colwise() += ConstVectorMap<T>(bias.data(), out_ch);
      break;
    }
    case LayerKind::TransposeConv: {
      const auto g = geometry_of(spec);
      cols.resize(static_cast<std::size_t>(g.rows()) * g.cols());
      ConstMatrixMap<T> w(weight.data(), in_ch, g.rows());
      MatrixMap<T> c(cols.data(), g.rows(), g.cols());
      c.noalias() = w.transpose() * ConstMatrixMap<T>(input.data(), in_ch, g.cols());
      col2im<T>(cols, g, output);
      MatrixMap<T> z(output.data(), out_ch, spec.out.height * spec.out.width);
      z.colwise() += ConstVectorMap<T>(bias.data(), out_ch);
      cols.clear();
      break;
    }
  }
}

/// Accumulates dL/dW and dL/db given dL/dz; writes dL/dx when `grad_input`
/// is non-empty.
template <typename T>
void backward_linear(const LayerSpec& spec, std::span<const T> weight, std::span<const T> input,
                     const AlignedVector<T>& cols, std::span<const T> grad_output,
                     std::span<T> grad_weight, std::span<T> grad_bias, std::span<T> grad_input,
                     AlignedVector<T>& scratch) {
  const Eigen::Index out_ch = spec.out_channels;
  const Eigen::Index in_ch = spec.in_channels;
  switch (spec.kind) {
    case LayerKind::Dense: {
      ConstVectorMap<T> dz(grad_output.data(), out_ch);
      ConstVectorMap<T> x(input.data(), in_ch);
      MatrixMap<T>(grad_weight.data(), out_ch, in_ch).noalias() += dz * x.transpose();
      VectorMap<T>(grad_bias.data(), out_ch) += dz;
      if (!grad_input.empty()) {
        VectorMap<T>(grad_input.data(), in_ch).noalias() =
            ConstMatrixMap<T>(weight.data(), out_ch, in_ch).transpose() * dz;
      }
      break;
    }
    case LayerKind::Conv: {
      const auto g = geometry_of(spec);
      ConstMatrixMap<T> dz(grad_output.data(), out_ch, g.cols());
      ConstMatrixMap<T> c(cols.data(), g.rows(), g.cols());
      MatrixMap<T>(grad_weight.data(), out_ch, g.rows()).noalias() += dz * c.transpose();
      VectorMap<T>(grad_bias.data(), out_ch) += dz.rowwise().sum();
      if (!grad_input.empty()) {
        scratch.resize(static_cast<std::size_t>(g.rows()) * g.cols());
        MatrixMap<T>(scratch.data(), g.rows(), g.cols()).noalias() =
            ConstMatrixMap<T>(weight.data(), out_ch, g.rows()).transpose() * dz;
        col2im<T>(scratch, g, grad_input);
      }
      break;
    }
    case LayerKind::TransposeConv: {
      const auto g = geometry_of(spec);
      scratch.resize(static_cast<std::size_t>(g.rows()) * g.cols());
      im2col<T>(grad_output, g, scratch);
      ConstMatrixMap<T> dcols(scratch.data(), g.rows(), g.cols());
      ConstMatrixMap<T> x(input.data(), in_ch, g.cols());
      MatrixMap<T>(grad_weight.data(), in_ch, g.rows()).noalias() += x * dcols.transpose();
      VectorMap<T>(grad_bias.data(), out_ch) +=
          ConstMatrixMap<T>(grad_output.data(), out_ch, spec.out.height * spec.out.width).rowwise().sum();
      if (!grad_input.empty()) {
        MatrixMap<T>(grad_input.data(), in_ch, g.cols()).noalias() =
            ConstMatrixMap<T>(weight.data(), in_ch, g.rows()) * dcols;
      }
      break;
    }
  }
}

template <typename T>
void activate(Activation act, std::span<T> values) {
  if (act == Activation::Relu) {
    for (T& v : values) v = v > T(0) ? v : T(0);
  } else {
    for (T& v : values) v = T(1) / (T(1) + std::exp(-v));
  }
}

/// Converts dL/da into dL/dz in place, given the activated values a.
template <typename T>
void activation_backward(Activation act, std::span<const T> activated, std::span<T> grad) {
  if (act == Activation::Relu) {
    for (std::size_t i = 0; i < grad.size(); ++i) {
      if (!(activated[i] > T(0))) grad[i] = T(0);
    }
  } else {
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] *= activated[i] * (T(1) - activated[i]);
  }
}

}  // namespace framecast::layers
