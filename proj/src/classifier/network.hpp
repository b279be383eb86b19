#pragma once

// Internal forward/backward kernels for the two model kinds.

#include <cstddef>
#include <vector>

#include "cbai/classifier.hpp"

namespace cbai::detail {

struct CnnDims {
    int channels, length;
    int f1, k1, l1, p1;  // spatial conv: f1 filters over all channels, k1 taps
    int f2, k2, l2, p2;  // temporal conv 1
    int f3, k3, l3, p3;  // temporal conv 2
    int pool;
    int flat;            // f3 * p3
    int hidden;
    std::size_t w1, b1, w2, b2, w3, b3, wd, bd, wo, bo, total;  // parameter offsets
};

CnnDims cnn_dims(const ModelDescriptor& desc);

struct CnnWorkspace {
    std::vector<double> a1, h1, q1, a2, h2, q2, a3, h3, q3, z4, h4;
    std::vector<int> i1, i2, i3;
    std::vector<double> dq3, dh3, dq2, dh2, dq1, dh1, dz4;

    explicit CnnWorkspace(const CnnDims& d);
};

// x: normalised channels x length input.
double cnn_forward(const CnnDims& d, const double* params, const double* x, CnnWorkspace& ws);

// Accumulates d(loss)/d(params) into grad given d(loss)/d(logit); requires the
// workspace of the matching forward pass.
void cnn_backward(const CnnDims& d, const double* params, const double* x, CnnWorkspace& ws,
                  double dlogit, double* grad);

double linear_forward(std::size_t inputs, const double* params, const double* x);
void linear_backward(std::size_t inputs, const double* x, double dlogit, double* grad);

double sigmoid(double z);
// Numerically stable binary cross-entropy on a logit.
double bce_with_logit(double z, int label);

}  // namespace cbai::detail
