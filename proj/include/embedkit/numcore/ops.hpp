#pragma once

#include <cstdint>
#include <vector>

#include "embedkit/numcore/tensor.hpp"

namespace embedkit::numcore {

// Shapes are explicit everywhere; no broadcasting. Mismatches raise a
// descriptive error naming the op and both shapes.

Tensor matmul(const Tensor& a, const Tensor& b);            // (m,k)x(k,n)
Tensor add(const Tensor& a, const Tensor& b);                // same shape
Tensor sub(const Tensor& a, const Tensor& b);                // same shape
Tensor mul(const Tensor& a, const Tensor& b);                // elementwise
Tensor scale(const Tensor& a, double c);
Tensor add_rowwise(const Tensor& m, const Tensor& row);      // (m,n) + (n)

Tensor gelu(const Tensor& x);                                // exact erf form
Tensor softmax_rows(const Tensor& m);                        // over last axis
Tensor layer_norm_rows(const Tensor& m, const Tensor& gamma,
                       const Tensor& beta, double eps = 1e-12);

Tensor embedding_rows(const Tensor& table, const std::vector<int>& ids);

Tensor concat_cols(const std::vector<Tensor>& parts);        // same row count
Tensor concat_rows(const std::vector<Tensor>& parts);        // same col count
Tensor slice_cols(const Tensor& m, std::size_t start, std::size_t count);
Tensor slice_rows(const Tensor& m, std::size_t start, std::size_t count);
Tensor transpose(const Tensor& m);
Tensor reshape(const Tensor& t, Shape shape);                // numel preserved

Tensor sum_all(const Tensor& t);                             // -> (1)
Tensor mean_all(const Tensor& t);                            // -> (1)
Tensor max_over_rows(const Tensor& m);                       // (m,n) -> (n)

Tensor dot(const Tensor& a, const Tensor& b);                // 1-D, -> (1)
Tensor l2_normalize(const Tensor& v);                        // 1-D
Tensor stack_rows(const std::vector<Tensor>& rows);          // k x (n) -> (k,n)
Tensor row(const Tensor& m, std::size_t r);                  // (m,n) -> (n)

enum class Reduction { mean, sum };

// Cross-entropy of row logits against integer targets; rows whose target
// equals ignore_index contribute nothing. Errors if every row is ignored.
Tensor cross_entropy_rows(const Tensor& logits, const std::vector<int>& targets,
                          int ignore_index = -100,
                          Reduction reduction = Reduction::mean);

}  // namespace embedkit::numcore
