#pragma once

#include <vector>

#include "embedkit/numcore/ops.hpp"
#include "embedkit/numcore/tensor.hpp"

namespace embedkit::train {

// InfoNCE over cosine similarities of unit vectors:
//   -log( e^{s(q,d+)/tau} / (e^{s(q,d+)/tau} + sum_i e^{s(q,d_i)/tau}) )
// computed with max-subtraction; zero negatives give exactly zero loss.
numcore::Tensor infonce(const numcore::Tensor& query, const numcore::Tensor& positive,
                        const std::vector<numcore::Tensor>& negatives, double tau);

// Same formula on plain similarity values (no graph); shared by tests.
double infonce_value(double s_positive, const std::vector<double>& s_negatives,
                     double tau);

// In-batch objective: row i of queries scores against every positive, its
// own at rank 0; mean cross-entropy over the batch.
numcore::Tensor infonce_in_batch(const std::vector<numcore::Tensor>& queries,
                                 const std::vector<numcore::Tensor>& positives,
                                 double tau);

}  // namespace embedkit::train
