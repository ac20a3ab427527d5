#include "dhin/fl/kernels.hpp"

#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dhin::fl {

double decision_value(const ModelParams& params, const std::vector<double>& x) {
  if (x.size() + 1 != params.dim)
    throw std::invalid_argument("feature/model dimension mismatch");
  double z = params.w[params.dim - 1];  // bias
  for (std::size_t j = 0; j < x.size(); ++j) z += params.w[j] * x[j];
  return z;
}

namespace {

// log(1 + e^z), stable for large |z|
inline double softplus(double z) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::fabs(z)));
}

struct ChunkEval {
  double loss_sum = 0.0;
  std::uint64_t correct = 0;
};

ChunkEval eval_chunk(const ModelParams& params, const FeatureMatrix& data,
                     std::size_t begin, std::size_t end) {
  ChunkEval out;
  for (std::size_t i = begin; i < end; ++i) {
    const FeatureRow& row = data.rows[i];
    double z = decision_value(params, row.x);
    out.loss_sum += softplus(z) - static_cast<double>(row.label) * z;
    int predicted = z >= 0.0 ? 1 : 0;
    if (predicted == row.label) ++out.correct;
  }
  return out;
}

EvalResult fold_eval(const std::vector<ChunkEval>& parts, std::size_t n) {
  double loss_sum = 0.0;
  std::uint64_t correct = 0;
  for (const ChunkEval& p : parts) {
    loss_sum += p.loss_sum;
    correct += p.correct;
  }
  if (n == 0) return EvalResult{0.0, 0.0};
  return EvalResult{loss_sum / static_cast<double>(n),
                    static_cast<double>(correct) / static_cast<double>(n)};
}

void grad_chunk(const ModelParams& params, const FeatureMatrix& data,
                std::size_t begin, std::size_t end, std::vector<double>& acc) {
  for (std::size_t i = begin; i < end; ++i) {
    const FeatureRow& row = data.rows[i];
    double err = sigmoid(decision_value(params, row.x)) -
                 static_cast<double>(row.label);
    for (std::size_t j = 0; j < row.x.size(); ++j) acc[j] += err * row.x[j];
    acc[params.dim - 1] += err;
  }
}

std::vector<double> fold_grad(const std::vector<std::vector<double>>& parts,
                              std::uint32_t dim, std::size_t n) {
  std::vector<double> grad(dim, 0.0);
  for (const auto& p : parts)
    for (std::uint32_t j = 0; j < dim; ++j) grad[j] += p[j];
  if (n > 0)
    for (double& g : grad) g /= static_cast<double>(n);
  return grad;
}

std::size_t chunk_count(std::size_t n) { return (n + kChunkRows - 1) / kChunkRows; }

}  // namespace

EvalResult eval_model_serial(const ModelParams& params,
                             const FeatureMatrix& data) {
  std::size_t n = data.rows.size();
  std::vector<ChunkEval> parts(chunk_count(n));
  for (std::size_t c = 0; c < parts.size(); ++c)
    parts[c] = eval_chunk(params, data, c * kChunkRows,
                          std::min(n, (c + 1) * kChunkRows));
  return fold_eval(parts, n);
}

EvalResult eval_model_parallel(const ModelParams& params,
                               const FeatureMatrix& data) {
  std::size_t n = data.rows.size();
  std::vector<ChunkEval> parts(chunk_count(n));
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < static_cast<std::int64_t>(parts.size()); ++c)
    parts[c] = eval_chunk(params, data, c * kChunkRows,
                          std::min(n, (c + 1) * kChunkRows));
  return fold_eval(parts, n);
}

std::vector<double> batch_gradient(const ModelParams& params,
                                   const FeatureMatrix& data,
                                   std::span<const std::uint32_t> idx) {
  std::vector<double> grad(params.dim, 0.0);
  for (std::uint32_t i : idx) {
    const FeatureRow& row = data.rows[i];
    double err = sigmoid(decision_value(params, row.x)) -
                 static_cast<double>(row.label);
    for (std::size_t j = 0; j < row.x.size(); ++j) grad[j] += err * row.x[j];
    grad[params.dim - 1] += err;
  }
  if (!idx.empty())
    for (double& g : grad) g /= static_cast<double>(idx.size());
  return grad;
}

std::vector<double> full_gradient_serial(const ModelParams& params,
                                         const FeatureMatrix& data) {
  std::size_t n = data.rows.size();
  std::vector<std::vector<double>> parts(chunk_count(n),
                                         std::vector<double>(params.dim, 0.0));
  for (std::size_t c = 0; c < parts.size(); ++c)
    grad_chunk(params, data, c * kChunkRows, std::min(n, (c + 1) * kChunkRows),
               parts[c]);
  return fold_grad(parts, params.dim, n);
}

std::vector<double> full_gradient_parallel(const ModelParams& params,
                                           const FeatureMatrix& data) {
  std::size_t n = data.rows.size();
  std::vector<std::vector<double>> parts(chunk_count(n),
                                         std::vector<double>(params.dim, 0.0));
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < static_cast<std::int64_t>(parts.size()); ++c)
    grad_chunk(params, data, c * kChunkRows, std::min(n, (c + 1) * kChunkRows),
               parts[c]);
  return fold_grad(parts, params.dim, n);
}

}  // namespace dhin::fl
