#ifndef DHIN_FL_KERNELS_HPP
#define DHIN_FL_KERNELS_HPP

#include <cmath>
#include <span>

#include "dhin/fl/model.hpp"

// Data-parallel inner loops of the FL core. Each kernel has a serial
// reference and an OpenMP variant. Both accumulate per fixed-size chunk and
// fold the chunk partials in index order, so the two paths are bit-identical
// regardless of thread count; tests assert exact equality and bench-kernels
// compares throughput.

namespace dhin::fl {

inline constexpr std::size_t kChunkRows = 256;

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// z = w . [x, 1]  (bias folded into the last weight)
double decision_value(const ModelParams& params, const std::vector<double>& x);

struct EvalResult {
  double loss = 0.0;      // mean logistic loss
  double accuracy = 0.0;  // 0.5-threshold accuracy; sigma == 0.5 predicts 1
};

EvalResult eval_model_serial(const ModelParams& params, const FeatureMatrix& data);
EvalResult eval_model_parallel(const ModelParams& params, const FeatureMatrix& data);

// Mean logistic-loss gradient over the given row indices (one mini-batch).
// Gradient vector has the model's dim; last component is the bias term.
std::vector<double> batch_gradient(const ModelParams& params,
                                   const FeatureMatrix& data,
                                   std::span<const std::uint32_t> idx);

// Mean gradient over the whole matrix, chunked.
std::vector<double> full_gradient_serial(const ModelParams& params,
                                         const FeatureMatrix& data);
std::vector<double> full_gradient_parallel(const ModelParams& params,
                                           const FeatureMatrix& data);

}  // namespace dhin::fl

#endif
