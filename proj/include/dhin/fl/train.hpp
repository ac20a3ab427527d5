#ifndef DHIN_FL_TRAIN_HPP
#define DHIN_FL_TRAIN_HPP

#include "dhin/fl/kernels.hpp"

// Local training and the FedAvg global step. Training on distinct patients
// runs concurrently; apply_global is the serialized per-round barrier.

namespace dhin::fl {

enum class FlError : std::uint8_t {
  DimensionMismatch,
  ZeroParticipation,
  SelfNotInRoster,
  IncompleteRoster,
  RoundMismatch,
};

const char* fl_error_name(FlError e);

// Deterministic from config.init_seed: weights uniform in [-0.01, 0.01],
// bias 0.
ModelParams init_model(const StudyConfig& config);

// local_epochs of seeded mini-batch gradient descent on the logistic loss;
// delta = quantize(n * (w_final - w_global)). Zero rows yields a zero delta.
Outcome<LocalUpdate, FlError> local_train(const ModelParams& global,
                                          const FeatureMatrix& data,
                                          const StudyConfig& config,
                                          const identity::Did& patient,
                                          std::uint32_t round);

// w <- w + lr_global * dequantize(sum_delta) / total_n
Outcome<ModelParams, FlError> apply_global(const ModelParams& global,
                                           const FixedVec& sum_delta,
                                           std::uint64_t total_n,
                                           double lr_global);

inline EvalResult evaluate_model(const ModelParams& params,
                                 const FeatureMatrix& data) {
  return eval_model_parallel(params, data);
}

// Plain centralized SGD with the same step rule as local_train; the oracle
// baseline for federated-vs-centralized comparisons.
ModelParams train_centralized(const FeatureMatrix& data, const StudyConfig& config,
                              std::uint32_t epochs);

}  // namespace dhin::fl

#endif
