// Copyright 2026 The MTNet Authors. All Rights Reserved.
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

#include <cstddef>
#include <cstdint>

// Dense compute kernels. Every kernel writes each output element from exactly
// one thread with a fixed accumulation order, so results are bit-identical
// across thread counts and identical to the serial reference in
// mtnet::kernels::serial (same per-element order, used by tests and the
// kernel benchmark).
namespace mtnet::kernels {

// stride-1 2D convolution, square kernel, zero padding.
// in:  N x Cin x H x W,  weight: Cout x Cin x k x k,  bias: Cout or null
// out: N x Cout x H' x W' with H' = H + 2*pad - k + 1
void conv2d_forward(const float* in, const float* weight, const float* bias,
                    float* out, int n, int cin, int h, int w, int cout, int k,
                    int pad);
void conv2d_backward_input(const float* gout, const float* weight, float* gin,
                           int n, int cin, int h, int w, int cout, int k,
                           int pad);
// accumulates into gweight / gbias
void conv2d_backward_params(const float* gout, const float* in, float* gweight,
                            float* gbias, int n, int cin, int h, int w,
                            int cout, int k, int pad);

// transposed convolution, kernel 2, stride 2 (exact 2x upsampling).
// weight: Cin x Cout x 2 x 2. out: N x Cout x 2H x 2W
void convt2x2_forward(const float* in, const float* weight, const float* bias,
                      float* out, int n, int cin, int h, int w, int cout);
void convt2x2_backward_input(const float* gout, const float* weight,
                             float* gin, int n, int cin, int h, int w,
                             int cout);
void convt2x2_backward_params(const float* gout, const float* in,
                              float* gweight, float* gbias, int n, int cin,
                              int h, int w, int cout);

// 2x2 max pooling, stride 2. H and W must be even. argmax stores the flat
// in-plane index of the winning element for the backward pass.
void maxpool2x2_forward(const float* in, float* out, int32_t* argmax, int n,
                        int c, int h, int w);
void maxpool2x2_backward(const float* gout, const int32_t* argmax, float* gin,
                         int n, int c, int h, int w);

// bilinear resize with half-pixel sample centers (align_corners = false)
void bilinear_forward(const float* in, float* out, int n, int c, int hin,
                      int win, int hout, int wout);
void bilinear_backward(const float* gout, float* gin, int n, int c, int hin,
                       int win, int hout, int wout);

// adaptive average pooling to a bh x bw grid; cell i spans
// [floor(i*H/bh), ceil((i+1)*H/bh))
void adaptive_avgpool_forward(const float* in, float* out, int n, int c, int h,
                              int w, int bh, int bw);
void adaptive_avgpool_backward(const float* gout, float* gin, int n, int c,
                               int h, int w, int bh, int bw);

// batch normalization over (N, H, W) per channel
void batchnorm_forward_train(const float* in, const float* gamma,
                             const float* beta, float* out, float* save_mean,
                             float* save_invstd, float* running_mean,
                             float* running_var, float momentum, float eps,
                             int n, int c, int h, int w);
void batchnorm_forward_eval(const float* in, const float* gamma,
                            const float* beta, const float* running_mean,
                            const float* running_var, float eps, float* out,
                            int n, int c, int h, int w);
void batchnorm_backward(const float* gout, const float* in, const float* gamma,
                        const float* save_mean, const float* save_invstd,
                        float* gin, float* ggamma, float* gbeta, int n, int c,
                        int h, int w);

void relu_forward(const float* in, float* out, size_t count);
void relu_backward(const float* gout, const float* in, float* gin,
                   size_t count);
void sigmoid_forward(const float* in, float* out, size_t count);
// sigmoid backward is expressed through the forward output
void sigmoid_backward(const float* gout, const float* out, float* gin,
                      size_t count);

// Serial reference implementations. Straight loops, no pragmas; kept for
// correctness tests and for the omp-vs-serial benchmark.
namespace serial {
void conv2d_forward(const float* in, const float* weight, const float* bias,
                    float* out, int n, int cin, int h, int w, int cout, int k,
                    int pad);
void conv2d_backward_input(const float* gout, const float* weight, float* gin,
                           int n, int cin, int h, int w, int cout, int k,
                           int pad);
void conv2d_backward_params(const float* gout, const float* in, float* gweight,
                            float* gbias, int n, int cin, int h, int w,
                            int cout, int k, int pad);
void convt2x2_forward(const float* in, const float* weight, const float* bias,
                      float* out, int n, int cin, int h, int w, int cout);
void maxpool2x2_forward(const float* in, float* out, int32_t* argmax, int n,
                        int c, int h, int w);
void bilinear_forward(const float* in, float* out, int n, int c, int hin,
                      int win, int hout, int wout);
void adaptive_avgpool_forward(const float* in, float* out, int n, int c, int h,
                              int w, int bh, int bw);
void batchnorm_forward_train(const float* in, const float* gamma,
                             const float* beta, float* out, float* save_mean,
                             float* save_invstd, float* running_mean,
                             float* running_var, float momentum, float eps,
                             int n, int c, int h, int w);
}  // namespace serial

}  // namespace mtnet::kernels
