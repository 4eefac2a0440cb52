// Copyright 2026 The typodr Authors
// SPDX-License-Identifier: Apache-2.0
//
// Minimal reverse-mode autodiff over dense matrices. A Tape owns value and
// gradient storage for every node; operations append nodes with a backward
// closure. Parameters are registered as leaf nodes whose gradients are read
// back after backward(). Templated on the scalar type so training runs in
// float and finite-difference checks run the same code path in double.

#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include <memory>

#include "typodr/errors.hpp"

namespace typodr {

template <typename T>
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<T> v;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, T(0)) {}

  T& operator()(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
  const T& operator()(int r, int c) const {
    return v[static_cast<std::size_t>(r) * cols + c];
  }
  std::size_t size() const { return v.size(); }
};

template <typename T>
class Tape {
 public:
  using Ref = int;

  struct Node {
    Mat<T> value;
    Mat<T> grad;
    std::function<void(Tape&)> backward;  // empty for leaves
  };

  Ref leaf(Mat<T> value) {
    Node n;
    n.grad = Mat<T>(value.rows, value.cols);
    n.value = std::move(value);
    nodes_.push_back(std::move(n));
    return static_cast<Ref>(nodes_.size() - 1);
  }

  const Mat<T>& val(Ref r) const { return nodes_[r].value; }
  Mat<T>& grad(Ref r) { return nodes_[r].grad; }

  // -- elementwise ------------------------------------------------------

  Ref add(Ref a, Ref b) {
    const Mat<T>&A = val(a), &B = val(b);
    assert(A.rows == B.rows && A.cols == B.cols);
    Mat<T> out = A;
    for (std::size_t i = 0; i < out.size(); ++i) out.v[i] += B.v[i];
    return push(std::move(out), [a, b](Tape& t) {
      const Mat<T>& g = t.head().grad;
      axpy(t.grad(a), g);
      axpy(t.grad(b), g);
    });
  }

  Ref sub(Ref a, Ref b) {
    const Mat<T>&A = val(a), &B = val(b);
    assert(A.rows == B.rows && A.cols == B.cols);
    Mat<T> out = A;
    for (std::size_t i = 0; i < out.size(); ++i) out.v[i] -= B.v[i];
    return push(std::move(out), [a, b](Tape& t) {
      const Mat<T>& g = t.head().grad;
      axpy(t.grad(a), g);
      for (std::size_t i = 0; i < g.size(); ++i) t.grad(b).v[i] -= g.v[i];
    });
  }

  Ref hadamard(Ref a, Ref b) {
    const Mat<T>&A = val(a), &B = val(b);
    assert(A.rows == B.rows && A.cols == B.cols);
    Mat<T> out = A;
    for (std::size_t i = 0; i < out.size(); ++i) out.v[i] *= B.v[i];
    return push(std::move(out), [a, b](Tape& t) {
      const Mat<T>& g = t.head().grad;
      const Mat<T>&A2 = t.val(a), &B2 = t.val(b);
      for (std::size_t i = 0; i < g.size(); ++i) {
        t.grad(a).v[i] += g.v[i] * B2.v[i];
        t.grad(b).v[i] += g.v[i] * A2.v[i];
      }
    });
  }

  Ref scale(Ref a, T c) {
    Mat<T> out = val(a);
    for (auto& x : out.v) x *= c;
    return push(std::move(out), [a, c](Tape& t) {
      const Mat<T>& g = t.head().grad;
      for (std::size_t i = 0; i < g.size(); ++i) t.grad(a).v[i] += c * g.v[i];
    });
  }

  Ref relu(Ref a) {
    Mat<T> out = val(a);
    for (auto& x : out.v)
      if (x < T(0)) x = T(0);
    return push(std::move(out), [a](Tape& t) {
      const Mat<T>& g = t.head().grad;
      const Mat<T>& A = t.val(a);
      for (std::size_t i = 0; i < g.size(); ++i)
        if (A.v[i] > T(0)) t.grad(a).v[i] += g.v[i];
    });
  }

  Ref sigmoid(Ref a) {
    Mat<T> out = val(a);
    for (auto& x : out.v) x = T(1) / (T(1) + std::exp(-x));
    return push(std::move(out), [a](Tape& t) {
      const Node& n = t.head();
      for (std::size_t i = 0; i < n.grad.size(); ++i) {
        T s = n.value.v[i];
        t.grad(a).v[i] += n.grad.v[i] * s * (T(1) - s);
      }
    });
  }

  // Exact GELU: x * Phi(x) with Phi the standard normal CDF.
  Ref gelu(Ref a) {
    constexpr double kInvSqrt2 = 0.70710678118654752440;
    constexpr double kInvSqrt2Pi = 0.39894228040143267794;
    Mat<T> out = val(a);
    for (auto& x : out.v) {
      double xd = static_cast<double>(x);
      x = static_cast<T>(xd * 0.5 * (1.0 + std::erf(xd * kInvSqrt2)));
    }
    return push(std::move(out), [a, kInvSqrt2, kInvSqrt2Pi](Tape& t) {
      const Mat<T>& g = t.head().grad;
      const Mat<T>& A = t.val(a);
      for (std::size_t i = 0; i < g.size(); ++i) {
        double x = static_cast<double>(A.v[i]);
        double phi = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
        double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
        t.grad(a).v[i] += g.v[i] * static_cast<T>(phi + x * pdf);
      }
    });
  }

  // -- structural -------------------------------------------------------

  Ref gather_rows(Ref table, const std::vector<int>& ids) {
    const Mat<T>& E = val(table);
    Mat<T> out(static_cast<int>(ids.size()), E.cols);
    for (std::size_t r = 0; r < ids.size(); ++r)
      for (int c = 0; c < E.cols; ++c) out(static_cast<int>(r), c) = E(ids[r], c);
    return push(std::move(out), [table, ids](Tape& t) {
      const Mat<T>& g = t.head().grad;
      Mat<T>& tg = t.grad(table);
      for (std::size_t r = 0; r < ids.size(); ++r)
        for (int c = 0; c < g.cols; ++c)
          tg(ids[r], c) += g(static_cast<int>(r), c);
    });
  }

  Ref slice_rows(Ref a, int start, int n) {
    const Mat<T>& A = val(a);
    Mat<T> out(n, A.cols);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < A.cols; ++c) out(r, c) = A(start + r, c);
    return push(std::move(out), [a, start, n](Tape& t) {
      const Mat<T>& g = t.head().grad;
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < g.cols; ++c) t.grad(a)(start + r, c) += g(r, c);
    });
  }

  Ref concat_rows(const std::vector<Ref>& parts) {
    assert(!parts.empty());
    int cols = val(parts[0]).cols;
    int rows = 0;
    for (Ref p : parts) rows += val(p).rows;
    Mat<T> out(rows, cols);
    int r0 = 0;
    for (Ref p : parts) {
      const Mat<T>& P = val(p);
      for (int r = 0; r < P.rows; ++r)
        for (int c = 0; c < cols; ++c) out(r0 + r, c) = P(r, c);
      r0 += P.rows;
    }
    return push(std::move(out), [parts](Tape& t) {
      const Mat<T>& g = t.head().grad;
      int r0b = 0;
      for (Ref p : parts) {
        Mat<T>& pg = t.grad(p);
        for (int r = 0; r < pg.rows; ++r)
          for (int c = 0; c < g.cols; ++c) pg(r, c) += g(r0b + r, c);
        r0b += pg.rows;
      }
    });
  }

  Ref concat_cols(const std::vector<Ref>& parts) {
    assert(!parts.empty());
    int rows = val(parts[0]).rows;
    int cols = 0;
    for (Ref p : parts) cols += val(p).cols;
    Mat<T> out(rows, cols);
    int c0 = 0;
    for (Ref p : parts) {
      const Mat<T>& P = val(p);
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < P.cols; ++c) out(r, c0 + c) = P(r, c);
      c0 += P.cols;
    }
    return push(std::move(out), [parts](Tape& t) {
      const Mat<T>& g = t.head().grad;
      int c0b = 0;
      for (Ref p : parts) {
        Mat<T>& pg = t.grad(p);
        for (int r = 0; r < pg.rows; ++r)
          for (int c = 0; c < pg.cols; ++c) pg(r, c) += g(r, c0b + c);
        c0b += pg.cols;
      }
    });
  }

  // Identity forward, zero backward.
  Ref stop_gradient(Ref a) {
    Mat<T> out = val(a);
    return push(std::move(out), {});
  }

  // -- linear algebra ---------------------------------------------------

  Ref matmul(Ref a, Ref b, bool trans_a = false, bool trans_b = false) {
    const Mat<T>&A = val(a), &B = val(b);
    int m = trans_a ? A.cols : A.rows;
    int k = trans_a ? A.rows : A.cols;
    int kb = trans_b ? B.cols : B.rows;
    int n = trans_b ? B.rows : B.cols;
    if (k != kb) throw DimensionMismatch("matmul inner dimensions differ");
    Mat<T> out(m, n);
    for (int i = 0; i < m; ++i)
      for (int p = 0; p < k; ++p) {
        T av = trans_a ? A(p, i) : A(i, p);
        if (av == T(0)) continue;
        for (int j = 0; j < n; ++j)
          out(i, j) += av * (trans_b ? B(j, p) : B(p, j));
      }
    return push(std::move(out), [a, b, trans_a, trans_b, m, n, k](Tape& t) {
      const Mat<T>& g = t.head().grad;
      const Mat<T>&A2 = t.val(a), &B2 = t.val(b);
      Mat<T>&ga = t.grad(a), &gb = t.grad(b);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
          T gv = g(i, j);
          if (gv == T(0)) continue;
          for (int p = 0; p < k; ++p) {
            T bv = trans_b ? B2(j, p) : B2(p, j);
            T av = trans_a ? A2(p, i) : A2(i, p);
            if (trans_a)
              ga(p, i) += gv * bv;
            else
              ga(i, p) += gv * bv;
            if (trans_b)
              gb(j, p) += gv * av;
            else
              gb(p, j) += gv * av;
          }
        }
    });
  }

  // x (n x k) * W^T (k x m) + row-broadcast bias (1 x m)
  Ref linear(Ref x, Ref w, Ref bias) {
    Ref y = matmul(x, w, false, true);
    return add_row_broadcast(y, bias);
  }

  Ref add_row_broadcast(Ref a, Ref row) {
    const Mat<T>&A = val(a), &R = val(row);
    assert(R.rows == 1 && R.cols == A.cols);
    Mat<T> out = A;
    for (int r = 0; r < A.rows; ++r)
      for (int c = 0; c < A.cols; ++c) out(r, c) += R(0, c);
    return push(std::move(out), [a, row](Tape& t) {
      const Mat<T>& g = t.head().grad;
      axpy(t.grad(a), g);
      Mat<T>& rg = t.grad(row);
      for (int r = 0; r < g.rows; ++r)
        for (int c = 0; c < g.cols; ++c) rg(0, c) += g(r, c);
    });
  }

  // Row-wise softmax with max subtraction.
  Ref softmax_rows(Ref a) {
    Mat<T> out = val(a);
    for (int r = 0; r < out.rows; ++r) {
      T mx = out(r, 0);
      for (int c = 1; c < out.cols; ++c) mx = std::max(mx, out(r, c));
      T sum = T(0);
      for (int c = 0; c < out.cols; ++c) {
        out(r, c) = std::exp(out(r, c) - mx);
        sum += out(r, c);
      }
      for (int c = 0; c < out.cols; ++c) out(r, c) /= sum;
    }
    return push(std::move(out), [a](Tape& t) {
      const Node& n = t.head();
      for (int r = 0; r < n.value.rows; ++r) {
        T dot = T(0);
        for (int c = 0; c < n.value.cols; ++c)
          dot += n.grad(r, c) * n.value(r, c);
        for (int c = 0; c < n.value.cols; ++c)
          t.grad(a)(r, c) += n.value(r, c) * (n.grad(r, c) - dot);
      }
    });
  }

  // Per-row layer norm with scale gamma and offset beta (both 1 x d).
  Ref layer_norm(Ref x, Ref gamma, Ref beta, T eps = T(1e-5)) {
    const Mat<T>& X = val(x);
    const Mat<T>&G = val(gamma), &B = val(beta);
    int d = X.cols;
    Mat<T> out(X.rows, d);
    Mat<T> xhat(X.rows, d);
    std::vector<T> inv_std(X.rows);
    for (int r = 0; r < X.rows; ++r) {
      T mean = T(0);
      for (int c = 0; c < d; ++c) mean += X(r, c);
      mean /= T(d);
      T var = T(0);
      for (int c = 0; c < d; ++c) {
        T dcv = X(r, c) - mean;
        var += dcv * dcv;
      }
      var /= T(d);
      inv_std[r] = T(1) / std::sqrt(var + eps);
      for (int c = 0; c < d; ++c) {
        xhat(r, c) = (X(r, c) - mean) * inv_std[r];
        out(r, c) = xhat(r, c) * G(0, c) + B(0, c);
      }
    }
    auto xh = std::make_shared<Mat<T>>(std::move(xhat));
    auto is = std::make_shared<std::vector<T>>(std::move(inv_std));
    return push(std::move(out), [x, gamma, beta, xh, is, d](Tape& t) {
      const Mat<T>& g = t.head().grad;
      const Mat<T>& G2 = t.val(gamma);
      Mat<T>&gx = t.grad(x), &gg = t.grad(gamma), &gb = t.grad(beta);
      for (int r = 0; r < g.rows; ++r) {
        T sum_gy = T(0), sum_gy_xhat = T(0);
        for (int c = 0; c < d; ++c) {
          T gy = g(r, c) * G2(0, c);
          sum_gy += gy;
          sum_gy_xhat += gy * (*xh)(r, c);
          gg(0, c) += g(r, c) * (*xh)(r, c);
          gb(0, c) += g(r, c);
        }
        for (int c = 0; c < d; ++c) {
          T gy = g(r, c) * G2(0, c);
          gx(r, c) += (*is)[r] *
                      (gy - sum_gy / T(d) - (*xh)(r, c) * sum_gy_xhat / T(d));
        }
      }
    });
  }

  // 1-D convolution over a character matrix (L x d_char). Weight is
  // (filters x width*d_char), bias (1 x filters). Output ((L-w+1) x filters).
  Ref conv1d(Ref chars, Ref weight, Ref bias, int width) {
    const Mat<T>& C = val(chars);
    const Mat<T>&W = val(weight), &B = val(bias);
    int d = C.cols;
    int steps = C.rows - width + 1;
    assert(steps >= 1 && W.cols == width * d);
    int filters = W.rows;
    Mat<T> out(steps, filters);
    for (int tpos = 0; tpos < steps; ++tpos)
      for (int f = 0; f < filters; ++f) {
        T acc = B(0, f);
        for (int j = 0; j < width; ++j)
          for (int c = 0; c < d; ++c)
            acc += C(tpos + j, c) * W(f, j * d + c);
        out(tpos, f) = acc;
      }
    return push(std::move(out), [chars, weight, bias, width, d, steps,
                                 filters](Tape& t) {
      const Mat<T>& g = t.head().grad;
      const Mat<T>&C2 = t.val(chars), &W2 = t.val(weight);
      Mat<T>&gc = t.grad(chars), &gw = t.grad(weight), &gb = t.grad(bias);
      for (int tpos = 0; tpos < steps; ++tpos)
        for (int f = 0; f < filters; ++f) {
          T gv = g(tpos, f);
          if (gv == T(0)) continue;
          gb(0, f) += gv;
          for (int j = 0; j < width; ++j)
            for (int c = 0; c < d; ++c) {
              gw(f, j * d + c) += gv * C2(tpos + j, c);
              gc(tpos + j, c) += gv * W2(f, j * d + c);
            }
        }
    });
  }

  // Column-wise max over time: (steps x filters) -> (1 x filters), winner
  // takes the gradient (first winner on ties).
  Ref max_pool_time(Ref a) {
    const Mat<T>& A = val(a);
    Mat<T> out(1, A.cols);
    auto argmax = std::make_shared<std::vector<int>>(A.cols, 0);
    for (int c = 0; c < A.cols; ++c) {
      T best = A(0, c);
      for (int r = 1; r < A.rows; ++r)
        if (A(r, c) > best) {
          best = A(r, c);
          (*argmax)[c] = r;
        }
      out(0, c) = best;
    }
    return push(std::move(out), [a, argmax](Tape& t) {
      const Mat<T>& g = t.head().grad;
      for (int c = 0; c < g.cols; ++c)
        t.grad(a)((*argmax)[c], c) += g(0, c);
    });
  }

  // -- losses (scalar-valued, 1x1) --------------------------------------

  Ref dot(Ref a, Ref b) {
    const Mat<T>&A = val(a), &B = val(b);
    if (A.rows != 1 || B.rows != 1 || A.cols != B.cols)
      throw DimensionMismatch("dot expects equal-length row vectors");
    Mat<T> out(1, 1);
    for (int c = 0; c < A.cols; ++c) out(0, 0) += A(0, c) * B(0, c);
    return push(std::move(out), [a, b](Tape& t) {
      T g = t.head().grad(0, 0);
      const Mat<T>&A2 = t.val(a), &B2 = t.val(b);
      for (int c = 0; c < A2.cols; ++c) {
        t.grad(a)(0, c) += g * B2(0, c);
        t.grad(b)(0, c) += g * A2(0, c);
      }
    });
  }

  // -log softmax(logits)[pos]; logits is 1 x m.
  Ref cross_entropy(Ref logits, int pos) {
    const Mat<T>& L = val(logits);
    assert(L.rows == 1 && pos >= 0 && pos < L.cols);
    T mx = L(0, 0);
    for (int c = 1; c < L.cols; ++c) mx = std::max(mx, L(0, c));
    T sum = T(0);
    for (int c = 0; c < L.cols; ++c) sum += std::exp(L(0, c) - mx);
    Mat<T> out(1, 1);
    out(0, 0) = -(L(0, pos) - mx - std::log(sum));
    return push(std::move(out), [logits, pos, mx, sum](Tape& t) {
      T g = t.head().grad(0, 0);
      const Mat<T>& L2 = t.val(logits);
      for (int c = 0; c < L2.cols; ++c) {
        T p = std::exp(L2(0, c) - mx) / sum;
        t.grad(logits)(0, c) += g * (p - (c == pos ? T(1) : T(0)));
      }
    });
  }

  // KL(softmax(a) || softmax(b)) from logits. When stop_b is set, no gradient
  // flows to b (the teacher distribution).
  Ref kl_softmax(Ref a, Ref b, bool stop_b) {
    const Mat<T>&A = val(a), &B = val(b);
    if (A.rows != 1 || B.rows != 1 || A.cols != B.cols)
      throw DimensionMismatch("kl_softmax expects equal-length logit rows");
    int m = A.cols;
    auto pa = std::make_shared<std::vector<T>>(m);
    auto pb = std::make_shared<std::vector<T>>(m);
    softmax_into(A, *pa);
    softmax_into(B, *pb);
    Mat<T> out(1, 1);
    for (int c = 0; c < m; ++c)
      out(0, 0) += (*pa)[c] * std::log((*pa)[c] / (*pb)[c]);
    return push(std::move(out), [a, b, pa, pb, stop_b, m](Tape& t) {
      T g = t.head().grad(0, 0);
      // d/da_i KL = p_a(i) * (log(p_a(i)/p_b(i)) - KL)
      T kl = t.head().value(0, 0);
      for (int c = 0; c < m; ++c)
        t.grad(a)(0, c) +=
            g * (*pa)[c] * (std::log((*pa)[c] / (*pb)[c]) - kl);
      if (!stop_b) {
        for (int c = 0; c < m; ++c) {
          // d/db_i KL = p_b(i) * E_pb[p_a/p_b] - p_a(i)
          // with E_pb[p_a/p_b] = sum_j p_a(j) = 1
          t.grad(b)(0, c) += g * ((*pb)[c] - (*pa)[c]);
        }
      }
    });
  }

  Ref add_scalars(Ref a, Ref b) { return add(a, b); }

  void backward(Ref loss) {
    Node& last = nodes_[loss];
    assert(last.value.rows == 1 && last.value.cols == 1);
    if (!std::isfinite(static_cast<double>(last.value(0, 0))))
      throw NonFiniteLoss("loss is not finite");
    last.grad(0, 0) = T(1);
    for (int i = loss; i >= 0; --i) {
      if (nodes_[i].backward) {
        cursor_ = i;
        nodes_[i].backward(*this);
      }
    }
  }

  std::size_t size() const { return nodes_.size(); }

 private:
  friend struct TapeAccess;

  static void axpy(Mat<T>& dst, const Mat<T>& src) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst.v[i] += src.v[i];
  }

  static void softmax_into(const Mat<T>& logits, std::vector<T>& out) {
    T mx = logits(0, 0);
    for (int c = 1; c < logits.cols; ++c) mx = std::max(mx, logits(0, c));
    T sum = T(0);
    for (int c = 0; c < logits.cols; ++c) {
      out[c] = std::exp(logits(0, c) - mx);
      sum += out[c];
    }
    for (auto& x : out) x /= sum;
  }

  Ref push(Mat<T> value, std::function<void(Tape&)> backward) {
    Node n;
    n.grad = Mat<T>(value.rows, value.cols);
    n.value = std::move(value);
    n.backward = std::move(backward);
    nodes_.push_back(std::move(n));
    return static_cast<Ref>(nodes_.size() - 1);
  }

  std::vector<Node> nodes_;
  int cursor_ = -1;

 public:
  // The node currently being differentiated during the backward sweep.
  const Node& head() const { return nodes_[cursor_]; }
};

}  // namespace typodr
