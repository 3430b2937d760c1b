#include "embedkit/numcore/ops.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "embedkit/common/errors.hpp"
#include "embedkit/numcore/precision.hpp"

namespace embedkit::numcore {

namespace {

using EMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using EMap = Eigen::Map<EMat>;
using ECMap = Eigen::Map<const EMat>;

[[noreturn]] void shape_error(const char* op, const Shape& a, const Shape& b) {
  fail_data(std::string(op) + ": incompatible shapes " + shape_str(a) + " and " +
            shape_str(b));
}

void require_2d(const char* op, const Tensor& t) {
  if (t.shape().size() != 2) {
    fail_data(std::string(op) + ": expected a 2-D tensor, got " + shape_str(t.shape()));
  }
}

void require_1d(const char* op, const Tensor& t) {
  if (t.shape().size() != 1) {
    fail_data(std::string(op) + ": expected a 1-D tensor, got " + shape_str(t.shape()));
  }
}

Tensor make_result(Shape shape, std::vector<double> data,
                   std::vector<std::shared_ptr<Node>> parents, const char* op,
                   std::function<void(Node&)> backward_fn) {
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  for (double& v : node->data) v = quantize(v);
  node->op = op;
  bool needs = false;
  for (const auto& p : parents) needs = needs || p->needs_grad;
  node->needs_grad = needs;
  if (needs) {
    node->parents = std::move(parents);
    node->backward_fn = std::move(backward_fn);
  }
  return Tensor(node);
}

void accumulate(Node& parent, std::size_t i, double v) {
  if (parent.needs_grad) parent.grad[i] += v;
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_2d("matmul", a);
  require_2d("matmul", b);
  const std::size_t m = a.shape()[0], k = a.shape()[1];
  const std::size_t k2 = b.shape()[0], n = b.shape()[1];
  if (k != k2) shape_error("matmul", a.shape(), b.shape());

  std::vector<double> out(m * n);
  {
    ECMap A(a.data().data(), long(m), long(k));
    ECMap B(b.data().data(), long(k), long(n));
    EMap C(out.data(), long(m), long(n));
    C.noalias() = A * B;
  }
  return make_result(
      {m, n}, std::move(out), {a.node(), b.node()}, "matmul", [m, k, n](Node& self) {
        Node& A = *self.parents[0];
        Node& B = *self.parents[1];
        ECMap G(self.grad.data(), long(m), long(n));
        ECMap Am(A.data.data(), long(m), long(k));
        ECMap Bm(B.data.data(), long(k), long(n));
        if (A.needs_grad) {
          EMap GA(A.grad.data(), long(m), long(k));
          GA.noalias() += G * Bm.transpose();
        }
        if (B.needs_grad) {
          EMap GB(B.grad.data(), long(k), long(n));
          GB.noalias() += Am.transpose() * G;
        }
      });
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) shape_error("add", a.shape(), b.shape());
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + b.data()[i];
  return make_result(a.shape(), std::move(out), {a.node(), b.node()}, "add",
                     [](Node& self) {
                       for (std::size_t i = 0; i < self.grad.size(); ++i) {
                         accumulate(*self.parents[0], i, self.grad[i]);
                         accumulate(*self.parents[1], i, self.grad[i]);
                       }
                     });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) shape_error("sub", a.shape(), b.shape());
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] - b.data()[i];
  return make_result(a.shape(), std::move(out), {a.node(), b.node()}, "sub",
                     [](Node& self) {
                       for (std::size_t i = 0; i < self.grad.size(); ++i) {
                         accumulate(*self.parents[0], i, self.grad[i]);
                         accumulate(*self.parents[1], i, -self.grad[i]);
                       }
                     });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) shape_error("mul", a.shape(), b.shape());
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * b.data()[i];
  return make_result(a.shape(), std::move(out), {a.node(), b.node()}, "mul",
                     [](Node& self) {
                       Node& A = *self.parents[0];
                       Node& B = *self.parents[1];
                       for (std::size_t i = 0; i < self.grad.size(); ++i) {
                         accumulate(A, i, self.grad[i] * B.data[i]);
                         accumulate(B, i, self.grad[i] * A.data[i]);
                       }
                     });
}

Tensor scale(const Tensor& a, double c) {
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * c;
  return make_result(a.shape(), std::move(out), {a.node()}, "scale",
                     [c](Node& self) {
                       for (std::size_t i = 0; i < self.grad.size(); ++i) {
                         accumulate(*self.parents[0], i, self.grad[i] * c);
                       }
                     });
}

Tensor add_rowwise(const Tensor& m, const Tensor& rowv) {
  require_2d("add_rowwise", m);
  require_1d("add_rowwise", rowv);
  const std::size_t rows = m.shape()[0], cols = m.shape()[1];
  if (rowv.shape()[0] != cols) shape_error("add_rowwise", m.shape(), rowv.shape());
  std::vector<double> out(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      out[r * cols + c] = m.data()[r * cols + c] + rowv.data()[c];
    }
  }
  return make_result({rows, cols}, std::move(out), {m.node(), rowv.node()},
                     "add_rowwise", [rows, cols](Node& self) {
                       Node& M = *self.parents[0];
                       Node& R = *self.parents[1];
                       for (std::size_t r = 0; r < rows; ++r) {
                         for (std::size_t c = 0; c < cols; ++c) {
                           double g = self.grad[r * cols + c];
                           accumulate(M, r * cols + c, g);
                           accumulate(R, c, g);
                         }
                       }
                     });
}

Tensor gelu(const Tensor& x) {
  const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
  std::vector<double> out(x.numel());
  for (std::size_t i = 0; i < out.size(); ++i) {
    double v = x.data()[i];
    out[i] = 0.5 * v * (1.0 + std::erf(v * inv_sqrt2));
  }
  return make_result(
      x.shape(), std::move(out), {x.node()}, "gelu", [inv_sqrt2](Node& self) {
        Node& X = *self.parents[0];
        const double inv_sqrt2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
        for (std::size_t i = 0; i < self.grad.size(); ++i) {
          double v = X.data[i];
          double cdf = 0.5 * (1.0 + std::erf(v * inv_sqrt2));
          double pdf = std::exp(-0.5 * v * v) * inv_sqrt2pi;
          accumulate(X, i, self.grad[i] * (cdf + v * pdf));
        }
      });
}

Tensor softmax_rows(const Tensor& m) {
  require_2d("softmax_rows", m);
  const std::size_t rows = m.shape()[0], cols = m.shape()[1];
  std::vector<double> out(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = m.data().data() + r * cols;
    double* o = out.data() + r * cols;
    double mx = in[0];
    for (std::size_t c = 1; c < cols; ++c) mx = std::max(mx, in[c]);
    double sum = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      o[c] = std::exp(in[c] - mx);
      sum += o[c];
    }
    for (std::size_t c = 0; c < cols; ++c) o[c] /= sum;
  }
  return make_result({rows, cols}, std::move(out), {m.node()}, "softmax_rows",
                     [rows, cols](Node& self) {
                       Node& X = *self.parents[0];
                       if (!X.needs_grad) return;
                       for (std::size_t r = 0; r < rows; ++r) {
                         const double* y = self.data.data() + r * cols;
                         const double* g = self.grad.data() + r * cols;
                         double dotgy = 0.0;
                         for (std::size_t c = 0; c < cols; ++c) dotgy += g[c] * y[c];
                         for (std::size_t c = 0; c < cols; ++c) {
                           X.grad[r * cols + c] += y[c] * (g[c] - dotgy);
                         }
                       }
                     });
}

Tensor layer_norm_rows(const Tensor& m, const Tensor& gamma, const Tensor& beta,
                       double eps) {
  require_2d("layer_norm_rows", m);
  require_1d("layer_norm_rows", gamma);
  require_1d("layer_norm_rows", beta);
  const std::size_t rows = m.shape()[0], cols = m.shape()[1];
  if (gamma.shape()[0] != cols) shape_error("layer_norm_rows", m.shape(), gamma.shape());
  if (beta.shape()[0] != cols) shape_error("layer_norm_rows", m.shape(), beta.shape());

  std::vector<double> out(rows * cols);
  // inv standard deviation per row, cached for backward
  auto inv_std = std::make_shared<std::vector<double>>(rows);
  auto means = std::make_shared<std::vector<double>>(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = m.data().data() + r * cols;
    double mean = 0.0;
    for (std::size_t c = 0; c < cols; ++c) mean += in[c];
    mean /= double(cols);
    double var = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      double d = in[c] - mean;
      var += d * d;
    }
    var /= double(cols);
    double is = 1.0 / std::sqrt(var + eps);
    (*means)[r] = mean;
    (*inv_std)[r] = is;
    for (std::size_t c = 0; c < cols; ++c) {
      double xhat = (in[c] - mean) * is;
      out[r * cols + c] = gamma.data()[c] * xhat + beta.data()[c];
    }
  }
  return make_result(
      {rows, cols}, std::move(out), {m.node(), gamma.node(), beta.node()},
      "layer_norm_rows", [rows, cols, inv_std, means](Node& self) {
        Node& X = *self.parents[0];
        Node& G = *self.parents[1];
        Node& B = *self.parents[2];
        std::vector<double> xhat(cols);
        std::vector<double> gg(cols);
        for (std::size_t r = 0; r < rows; ++r) {
          const double* in = X.data.data() + r * cols;
          const double* g = self.grad.data() + r * cols;
          double is = (*inv_std)[r], mean = (*means)[r];
          double sum_gg = 0.0, sum_ggx = 0.0;
          for (std::size_t c = 0; c < cols; ++c) {
            xhat[c] = (in[c] - mean) * is;
            gg[c] = g[c] * G.data[c];
            sum_gg += gg[c];
            sum_ggx += gg[c] * xhat[c];
          }
          if (G.needs_grad || B.needs_grad) {
            for (std::size_t c = 0; c < cols; ++c) {
              accumulate(G, c, g[c] * xhat[c]);
              accumulate(B, c, g[c]);
            }
          }
          if (X.needs_grad) {
            double inv_n = 1.0 / double(cols);
            for (std::size_t c = 0; c < cols; ++c) {
              X.grad[r * cols + c] +=
                  is * (gg[c] - inv_n * sum_gg - xhat[c] * inv_n * sum_ggx);
            }
          }
        }
      });
}

Tensor embedding_rows(const Tensor& table, const std::vector<int>& ids) {
  require_2d("embedding_rows", table);
  const std::size_t vocab = table.shape()[0], dim = table.shape()[1];
  if (ids.empty()) fail_data("embedding_rows: empty id list");
  for (int id : ids) {
    if (id < 0 || std::size_t(id) >= vocab) {
      fail_data("embedding_rows: id " + std::to_string(id) +
                " out of range for table " + shape_str(table.shape()));
    }
  }
  std::vector<double> out(ids.size() * dim);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const double* src = table.data().data() + std::size_t(ids[i]) * dim;
    std::copy(src, src + dim, out.data() + i * dim);
  }
  auto ids_copy = std::make_shared<std::vector<int>>(ids);
  return make_result({ids.size(), dim}, std::move(out), {table.node()},
                     "embedding_rows", [ids_copy, dim](Node& self) {
                       Node& T = *self.parents[0];
                       if (!T.needs_grad) return;
                       for (std::size_t i = 0; i < ids_copy->size(); ++i) {
                         double* dst = T.grad.data() +
                                       std::size_t((*ids_copy)[i]) * dim;
                         const double* g = self.grad.data() + i * dim;
                         for (std::size_t c = 0; c < dim; ++c) dst[c] += g[c];
                       }
                     });
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) fail_data("concat_cols: no inputs");
  require_2d("concat_cols", parts[0]);
  const std::size_t rows = parts[0].shape()[0];
  std::size_t cols = 0;
  for (const auto& p : parts) {
    require_2d("concat_cols", p);
    if (p.shape()[0] != rows) shape_error("concat_cols", parts[0].shape(), p.shape());
    cols += p.shape()[1];
  }
  std::vector<double> out(rows * cols);
  std::size_t col_off = 0;
  for (const auto& p : parts) {
    std::size_t pc = p.shape()[1];
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy(p.data().data() + r * pc, p.data().data() + (r + 1) * pc,
                out.data() + r * cols + col_off);
    }
    col_off += pc;
  }
  std::vector<std::shared_ptr<Node>> parents;
  for (const auto& p : parts) parents.push_back(p.node());
  return make_result({rows, cols}, std::move(out), std::move(parents), "concat_cols",
                     [rows, cols](Node& self) {
                       std::size_t col_off = 0;
                       for (auto& pp : self.parents) {
                         Node& P = *pp;
                         std::size_t pc = P.shape[1];
                         if (P.needs_grad) {
                           for (std::size_t r = 0; r < rows; ++r) {
                             const double* g = self.grad.data() + r * cols + col_off;
                             double* dst = P.grad.data() + r * pc;
                             for (std::size_t c = 0; c < pc; ++c) dst[c] += g[c];
                           }
                         }
                         col_off += pc;
                       }
                     });
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
  if (parts.empty()) fail_data("concat_rows: no inputs");
  require_2d("concat_rows", parts[0]);
  const std::size_t cols = parts[0].shape()[1];
  std::size_t rows = 0;
  for (const auto& p : parts) {
    require_2d("concat_rows", p);
    if (p.shape()[1] != cols) shape_error("concat_rows", parts[0].shape(), p.shape());
    rows += p.shape()[0];
  }
  std::vector<double> out;
  out.reserve(rows * cols);
  for (const auto& p : parts) {
    out.insert(out.end(), p.data().begin(), p.data().end());
  }
  std::vector<std::shared_ptr<Node>> parents;
  for (const auto& p : parts) parents.push_back(p.node());
  return make_result({rows, cols}, std::move(out), std::move(parents), "concat_rows",
                     [](Node& self) {
                       std::size_t off = 0;
                       for (auto& pp : self.parents) {
                         Node& P = *pp;
                         if (P.needs_grad) {
                           for (std::size_t i = 0; i < P.data.size(); ++i) {
                             P.grad[i] += self.grad[off + i];
                           }
                         }
                         off += P.data.size();
                       }
                     });
}

Tensor slice_cols(const Tensor& m, std::size_t start, std::size_t count) {
  require_2d("slice_cols", m);
  const std::size_t rows = m.shape()[0], cols = m.shape()[1];
  if (start + count > cols || count == 0) {
    fail_data("slice_cols: range [" + std::to_string(start) + "," +
              std::to_string(start + count) + ") out of bounds for " +
              shape_str(m.shape()));
  }
  std::vector<double> out(rows * count);
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy(m.data().data() + r * cols + start,
              m.data().data() + r * cols + start + count, out.data() + r * count);
  }
  return make_result({rows, count}, std::move(out), {m.node()}, "slice_cols",
                     [rows, cols, start, count](Node& self) {
                       Node& M = *self.parents[0];
                       if (!M.needs_grad) return;
                       for (std::size_t r = 0; r < rows; ++r) {
                         for (std::size_t c = 0; c < count; ++c) {
                           M.grad[r * cols + start + c] += self.grad[r * count + c];
                         }
                       }
                     });
}

Tensor slice_rows(const Tensor& m, std::size_t start, std::size_t count) {
  require_2d("slice_rows", m);
  const std::size_t rows = m.shape()[0], cols = m.shape()[1];
  if (start + count > rows || count == 0) {
    fail_data("slice_rows: range [" + std::to_string(start) + "," +
              std::to_string(start + count) + ") out of bounds for " +
              shape_str(m.shape()));
  }
  std::vector<double> out(m.data().begin() + long(start * cols),
                          m.data().begin() + long((start + count) * cols));
  return make_result({count, cols}, std::move(out), {m.node()}, "slice_rows",
                     [cols, start, count](Node& self) {
                       Node& M = *self.parents[0];
                       if (!M.needs_grad) return;
                       for (std::size_t i = 0; i < count * cols; ++i) {
                         M.grad[start * cols + i] += self.grad[i];
                       }
                     });
}

Tensor transpose(const Tensor& m) {
  require_2d("transpose", m);
  const std::size_t rows = m.shape()[0], cols = m.shape()[1];
  std::vector<double> out(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out[c * rows + r] = m.data()[r * cols + c];
  }
  return make_result({cols, rows}, std::move(out), {m.node()}, "transpose",
                     [rows, cols](Node& self) {
                       Node& M = *self.parents[0];
                       if (!M.needs_grad) return;
                       for (std::size_t r = 0; r < rows; ++r) {
                         for (std::size_t c = 0; c < cols; ++c) {
                           M.grad[r * cols + c] += self.grad[c * rows + r];
                         }
                       }
                     });
}

Tensor reshape(const Tensor& t, Shape shape) {
  if (shape_numel(shape) != t.numel()) {
    shape_error("reshape", t.shape(), shape);
  }
  std::vector<double> out(t.data().begin(), t.data().end());
  return make_result(std::move(shape), std::move(out), {t.node()}, "reshape",
                     [](Node& self) {
                       Node& T = *self.parents[0];
                       if (!T.needs_grad) return;
                       for (std::size_t i = 0; i < self.grad.size(); ++i) {
                         T.grad[i] += self.grad[i];
                       }
                     });
}

Tensor sum_all(const Tensor& t) {
  double s = 0.0;
  for (double v : t.data()) s += v;
  return make_result({1}, {s}, {t.node()}, "sum_all", [](Node& self) {
    Node& T = *self.parents[0];
    if (!T.needs_grad) return;
    for (std::size_t i = 0; i < T.grad.size(); ++i) T.grad[i] += self.grad[0];
  });
}

Tensor mean_all(const Tensor& t) {
  double s = 0.0;
  for (double v : t.data()) s += v;
  const double inv_n = 1.0 / double(t.numel());
  return make_result({1}, {s * inv_n}, {t.node()}, "mean_all", [inv_n](Node& self) {
    Node& T = *self.parents[0];
    if (!T.needs_grad) return;
    for (std::size_t i = 0; i < T.grad.size(); ++i) {
      T.grad[i] += self.grad[0] * inv_n;
    }
  });
}

Tensor max_over_rows(const Tensor& m) {
  require_2d("max_over_rows", m);
  const std::size_t rows = m.shape()[0], cols = m.shape()[1];
  std::vector<double> out(cols);
  auto argmax = std::make_shared<std::vector<std::size_t>>(cols, 0);
  for (std::size_t c = 0; c < cols; ++c) {
    double best = m.data()[c];
    std::size_t best_r = 0;
    for (std::size_t r = 1; r < rows; ++r) {
      double v = m.data()[r * cols + c];
      if (v > best) {
        best = v;
        best_r = r;
      }
    }
    out[c] = best;
    (*argmax)[c] = best_r;
  }
  return make_result({cols}, std::move(out), {m.node()}, "max_over_rows",
                     [cols, argmax](Node& self) {
                       Node& M = *self.parents[0];
                       if (!M.needs_grad) return;
                       for (std::size_t c = 0; c < cols; ++c) {
                         M.grad[(*argmax)[c] * cols + c] += self.grad[c];
                       }
                     });
}

Tensor dot(const Tensor& a, const Tensor& b) {
  require_1d("dot", a);
  require_1d("dot", b);
  if (a.shape() != b.shape()) shape_error("dot", a.shape(), b.shape());
  double s = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) s += a.data()[i] * b.data()[i];
  return make_result({1}, {s}, {a.node(), b.node()}, "dot", [](Node& self) {
    Node& A = *self.parents[0];
    Node& B = *self.parents[1];
    double g = self.grad[0];
    for (std::size_t i = 0; i < A.data.size(); ++i) {
      accumulate(A, i, g * B.data[i]);
      accumulate(B, i, g * A.data[i]);
    }
  });
}

Tensor l2_normalize(const Tensor& v) {
  require_1d("l2_normalize", v);
  double norm2 = 0.0;
  for (double x : v.data()) norm2 += x * x;
  double norm = std::sqrt(norm2);
  if (norm == 0.0) fail_data("l2_normalize: zero vector");
  std::vector<double> out(v.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = v.data()[i] / norm;
  const double inv_norm = 1.0 / norm;
  return make_result(v.shape(), std::move(out), {v.node()}, "l2_normalize",
                     [inv_norm](Node& self) {
                       Node& V = *self.parents[0];
                       if (!V.needs_grad) return;
                       double gy = 0.0;
                       for (std::size_t i = 0; i < self.data.size(); ++i) {
                         gy += self.grad[i] * self.data[i];
                       }
                       for (std::size_t i = 0; i < self.data.size(); ++i) {
                         V.grad[i] += inv_norm * (self.grad[i] - self.data[i] * gy);
                       }
                     });
}

Tensor stack_rows(const std::vector<Tensor>& rows) {
  if (rows.empty()) fail_data("stack_rows: no inputs");
  require_1d("stack_rows", rows[0]);
  const std::size_t cols = rows[0].shape()[0];
  for (const auto& r : rows) {
    require_1d("stack_rows", r);
    if (r.shape()[0] != cols) shape_error("stack_rows", rows[0].shape(), r.shape());
  }
  std::vector<double> out;
  out.reserve(rows.size() * cols);
  for (const auto& r : rows) out.insert(out.end(), r.data().begin(), r.data().end());
  std::vector<std::shared_ptr<Node>> parents;
  for (const auto& r : rows) parents.push_back(r.node());
  return make_result({rows.size(), cols}, std::move(out), std::move(parents),
                     "stack_rows", [cols](Node& self) {
                       for (std::size_t r = 0; r < self.parents.size(); ++r) {
                         Node& P = *self.parents[r];
                         if (!P.needs_grad) continue;
                         for (std::size_t c = 0; c < cols; ++c) {
                           P.grad[c] += self.grad[r * cols + c];
                         }
                       }
                     });
}

Tensor row(const Tensor& m, std::size_t r) {
  require_2d("row", m);
  const std::size_t cols = m.shape()[1];
  return reshape(slice_rows(m, r, 1), {cols});
}

Tensor cross_entropy_rows(const Tensor& logits, const std::vector<int>& targets,
                          int ignore_index, Reduction reduction) {
  require_2d("cross_entropy_rows", logits);
  const std::size_t rows = logits.shape()[0], cols = logits.shape()[1];
  if (targets.size() != rows) {
    fail_data("cross_entropy_rows: " + std::to_string(targets.size()) +
              " targets for " + std::to_string(rows) + " logit rows");
  }
  std::size_t active = 0;
  for (int t : targets) {
    if (t == ignore_index) continue;
    if (t < 0 || std::size_t(t) >= cols) {
      fail_data("cross_entropy_rows: target " + std::to_string(t) +
                " out of range for " + shape_str(logits.shape()));
    }
    ++active;
  }
  if (active == 0) fail_data("cross_entropy_rows: every row is ignored");

  double loss = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (targets[r] == ignore_index) continue;
    const double* in = logits.data().data() + r * cols;
    double mx = in[0];
    for (std::size_t c = 1; c < cols; ++c) mx = std::max(mx, in[c]);
    double sum = 0.0;
    for (std::size_t c = 0; c < cols; ++c) sum += std::exp(in[c] - mx);
    loss += std::log(sum) + mx - in[targets[r]];
  }
  const double weight = reduction == Reduction::mean ? 1.0 / double(active) : 1.0;
  loss *= weight;

  auto targets_copy = std::make_shared<std::vector<int>>(targets);
  return make_result(
      {1}, {loss}, {logits.node()}, "cross_entropy_rows",
      [rows, cols, targets_copy, ignore_index, weight](Node& self) {
        Node& L = *self.parents[0];
        if (!L.needs_grad) return;
        double g = self.grad[0] * weight;
        for (std::size_t r = 0; r < rows; ++r) {
          int t = (*targets_copy)[r];
          if (t == ignore_index) continue;
          const double* in = L.data.data() + r * cols;
          double mx = in[0];
          for (std::size_t c = 1; c < cols; ++c) mx = std::max(mx, in[c]);
          double sum = 0.0;
          for (std::size_t c = 0; c < cols; ++c) sum += std::exp(in[c] - mx);
          for (std::size_t c = 0; c < cols; ++c) {
            double p = std::exp(in[c] - mx) / sum;
            L.grad[r * cols + c] += g * (p - (int(c) == t ? 1.0 : 0.0));
          }
        }
      });
}

}  // namespace embedkit::numcore
