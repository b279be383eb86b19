#include "network.hpp"

#include <algorithm>
#include <cmath>

#include "cbai/error.hpp"

namespace cbai::detail {

namespace {

inline double elu(double a) { return a > 0.0 ? a : std::expm1(a); }
inline double elu_grad(double a, double h) { return a > 0.0 ? 1.0 : h + 1.0; }

// out[o][t] = b[o] + sum_i sum_k w[o][i][k] * in[i][t + k]
void conv_forward(const double* in, int cin, int lin, const double* w, const double* b, int cout,
                  int k, double* out) {
    const int lout = lin - k + 1;
    for (int o = 0; o < cout; ++o) {
        double* dst = out + static_cast<std::size_t>(o) * lout;
        std::fill(dst, dst + lout, b[o]);
        for (int i = 0; i < cin; ++i) {
            const double* wrow = w + (static_cast<std::size_t>(o) * cin + i) * k;
            const double* src = in + static_cast<std::size_t>(i) * lin;
            for (int kk = 0; kk < k; ++kk) {
                const double wv = wrow[kk];
                const double* s = src + kk;
                for (int t = 0; t < lout; ++t) dst[t] += wv * s[t];
            }
        }
    }
}

void conv_backward(const double* in, int cin, int lin, const double* w, int cout, int k,
                   const double* dout, double* dw, double* db, double* din) {
    const int lout = lin - k + 1;
    for (int o = 0; o < cout; ++o) {
        const double* g = dout + static_cast<std::size_t>(o) * lout;
        double sum = 0.0;
        for (int t = 0; t < lout; ++t) sum += g[t];
        db[o] += sum;
        for (int i = 0; i < cin; ++i) {
            const std::size_t base = (static_cast<std::size_t>(o) * cin + i) * k;
            const double* src = in + static_cast<std::size_t>(i) * lin;
            double* dsrc = din ? din + static_cast<std::size_t>(i) * lin : nullptr;
            for (int kk = 0; kk < k; ++kk) {
                const double* s = src + kk;
                double acc = 0.0;
                for (int t = 0; t < lout; ++t) acc += g[t] * s[t];
                dw[base + kk] += acc;
                if (dsrc) {
                    const double wv = w[base + kk];
                    double* ds = dsrc + kk;
                    for (int t = 0; t < lout; ++t) ds[t] += wv * g[t];
                }
            }
        }
    }
}

void activate(const std::vector<double>& a, std::vector<double>& h) {
    for (std::size_t i = 0; i < a.size(); ++i) h[i] = elu(a[i]);
}

void pool_forward(const double* h, int channels, int lin, int pool, double* out, int* idx) {
    const int lout = lin / pool;
    for (int c = 0; c < channels; ++c) {
        const double* row = h + static_cast<std::size_t>(c) * lin;
        for (int j = 0; j < lout; ++j) {
            int best = j * pool;
            for (int p = 1; p < pool; ++p) {
                if (row[j * pool + p] > row[best]) best = j * pool + p;
            }
            out[static_cast<std::size_t>(c) * lout + j] = row[best];
            idx[static_cast<std::size_t>(c) * lout + j] = c * lin + best;
        }
    }
}

// dh = unpool(dq) * elu'(a)
void pool_activation_backward(const std::vector<double>& dq, const std::vector<int>& idx,
                              const std::vector<double>& a, const std::vector<double>& h,
                              std::vector<double>& dh) {
    std::fill(dh.begin(), dh.end(), 0.0);
    for (std::size_t j = 0; j < dq.size(); ++j) dh[static_cast<std::size_t>(idx[j])] += dq[j];
    for (std::size_t i = 0; i < dh.size(); ++i) {
        if (dh[i] != 0.0) dh[i] *= elu_grad(a[i], h[i]);
    }
}

}  // namespace

CnnDims cnn_dims(const ModelDescriptor& desc) {
    const CnnShape& s = desc.cnn;
    CnnDims d{};
    d.channels = desc.channels;
    d.length = desc.window;
    d.pool = s.pool;
    d.f1 = s.spatial_filters;
    d.k1 = s.spatial_kernel;
    d.l1 = d.length - d.k1 + 1;
    d.p1 = d.l1 / d.pool;
    d.f2 = s.temporal_filters;
    d.k2 = s.temporal_kernel;
    d.l2 = d.p1 - d.k2 + 1;
    d.p2 = d.l2 / d.pool;
    d.f3 = s.temporal_filters;
    d.k3 = s.temporal_kernel;
    d.l3 = d.p2 - d.k3 + 1;
    d.p3 = d.l3 / d.pool;
    d.flat = d.f3 * d.p3;
    d.hidden = s.dense_units;
    if (d.channels < 1 || d.pool < 1 || d.f1 < 1 || d.f2 < 1 || d.hidden < 1 || d.k1 < 1 ||
        d.k2 < 1 || d.l1 < 1 || d.p1 < 1 || d.l2 < 1 || d.p2 < 1 || d.l3 < 1 || d.p3 < 1) {
        throw Error(ErrorCode::InvalidArgument, "CNN shape collapses to zero length");
    }
    std::size_t off = 0;
    auto take = [&off](std::size_t n) {
        const std::size_t at = off;
        off += n;
        return at;
    };
    d.w1 = take(static_cast<std::size_t>(d.f1) * d.channels * d.k1);
    d.b1 = take(d.f1);
    d.w2 = take(static_cast<std::size_t>(d.f2) * d.f1 * d.k2);
    d.b2 = take(d.f2);
    d.w3 = take(static_cast<std::size_t>(d.f3) * d.f2 * d.k3);
    d.b3 = take(d.f3);
    d.wd = take(static_cast<std::size_t>(d.hidden) * d.flat);
    d.bd = take(d.hidden);
    d.wo = take(d.hidden);
    d.bo = take(1);
    d.total = off;
    return d;
}

CnnWorkspace::CnnWorkspace(const CnnDims& d)
    : a1(static_cast<std::size_t>(d.f1) * d.l1), h1(a1.size()), q1(static_cast<std::size_t>(d.f1) * d.p1),
      a2(static_cast<std::size_t>(d.f2) * d.l2), h2(a2.size()), q2(static_cast<std::size_t>(d.f2) * d.p2),
      a3(static_cast<std::size_t>(d.f3) * d.l3), h3(a3.size()), q3(static_cast<std::size_t>(d.flat)),
      z4(d.hidden), h4(d.hidden),
      i1(q1.size()), i2(q2.size()), i3(q3.size()),
      dq3(q3.size()), dh3(a3.size()), dq2(q2.size()), dh2(a2.size()), dq1(q1.size()), dh1(a1.size()),
      dz4(d.hidden) {}

double cnn_forward(const CnnDims& d, const double* p, const double* x, CnnWorkspace& ws) {
    conv_forward(x, d.channels, d.length, p + d.w1, p + d.b1, d.f1, d.k1, ws.a1.data());
    activate(ws.a1, ws.h1);
    pool_forward(ws.h1.data(), d.f1, d.l1, d.pool, ws.q1.data(), ws.i1.data());

    conv_forward(ws.q1.data(), d.f1, d.p1, p + d.w2, p + d.b2, d.f2, d.k2, ws.a2.data());
    activate(ws.a2, ws.h2);
    pool_forward(ws.h2.data(), d.f2, d.l2, d.pool, ws.q2.data(), ws.i2.data());

    conv_forward(ws.q2.data(), d.f2, d.p2, p + d.w3, p + d.b3, d.f3, d.k3, ws.a3.data());
    activate(ws.a3, ws.h3);
    pool_forward(ws.h3.data(), d.f3, d.l3, d.pool, ws.q3.data(), ws.i3.data());

    const double* wd = p + d.wd;
    for (int j = 0; j < d.hidden; ++j) {
        const double* row = wd + static_cast<std::size_t>(j) * d.flat;
        double acc = p[d.bd + j];
        for (int i = 0; i < d.flat; ++i) acc += row[i] * ws.q3[i];
        ws.z4[j] = acc;
        ws.h4[j] = elu(acc);
    }
    double out = p[d.bo];
    for (int j = 0; j < d.hidden; ++j) out += p[d.wo + j] * ws.h4[j];
    return out;
}

void cnn_backward(const CnnDims& d, const double* p, const double* x, CnnWorkspace& ws, double dlogit,
                  double* grad) {
    grad[d.bo] += dlogit;
    for (int j = 0; j < d.hidden; ++j) {
        grad[d.wo + j] += dlogit * ws.h4[j];
        ws.dz4[j] = dlogit * p[d.wo + j] * elu_grad(ws.z4[j], ws.h4[j]);
    }

    std::fill(ws.dq3.begin(), ws.dq3.end(), 0.0);
    const double* wd = p + d.wd;
    double* gwd = grad + d.wd;
    for (int j = 0; j < d.hidden; ++j) {
        const double g = ws.dz4[j];
        grad[d.bd + j] += g;
        const double* row = wd + static_cast<std::size_t>(j) * d.flat;
        double* grow = gwd + static_cast<std::size_t>(j) * d.flat;
        for (int i = 0; i < d.flat; ++i) {
            grow[i] += g * ws.q3[i];
            ws.dq3[i] += row[i] * g;
        }
    }

    pool_activation_backward(ws.dq3, ws.i3, ws.a3, ws.h3, ws.dh3);
    std::fill(ws.dq2.begin(), ws.dq2.end(), 0.0);
    conv_backward(ws.q2.data(), d.f2, d.p2, p + d.w3, d.f3, d.k3, ws.dh3.data(), grad + d.w3,
                  grad + d.b3, ws.dq2.data());

    pool_activation_backward(ws.dq2, ws.i2, ws.a2, ws.h2, ws.dh2);
    std::fill(ws.dq1.begin(), ws.dq1.end(), 0.0);
    conv_backward(ws.q1.data(), d.f1, d.p1, p + d.w2, d.f2, d.k2, ws.dh2.data(), grad + d.w2,
                  grad + d.b2, ws.dq1.data());

    pool_activation_backward(ws.dq1, ws.i1, ws.a1, ws.h1, ws.dh1);
    conv_backward(x, d.channels, d.length, p + d.w1, d.f1, d.k1, ws.dh1.data(), grad + d.w1,
                  grad + d.b1, nullptr);
}

double linear_forward(std::size_t inputs, const double* params, const double* x) {
    double acc = params[inputs];
    for (std::size_t i = 0; i < inputs; ++i) acc += params[i] * x[i];
    return acc;
}

void linear_backward(std::size_t inputs, const double* x, double dlogit, double* grad) {
    for (std::size_t i = 0; i < inputs; ++i) grad[i] += dlogit * x[i];
    grad[inputs] += dlogit;
}

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double bce_with_logit(double z, int label) {
    return std::max(z, 0.0) - z * static_cast<double>(label) + std::log1p(std::exp(-std::abs(z)));
}

}  // namespace cbai::detail
