#include "dhin/fl/train.hpp"

namespace dhin::fl {

const char* fl_error_name(FlError e) {
  switch (e) {
    case FlError::DimensionMismatch: return "DimensionMismatch";
    case FlError::ZeroParticipation: return "ZeroParticipation";
    case FlError::SelfNotInRoster: return "SelfNotInRoster";
    case FlError::IncompleteRoster: return "IncompleteRoster";
    case FlError::RoundMismatch: return "RoundMismatch";
  }
  return "?";
}

ModelParams init_model(const StudyConfig& config) {
  std::uint32_t dim = config.schema.feature_dim + 1;
  ModelParams params{dim, std::vector<double>(dim, 0.0)};
  crypto::Rng rng(config.init_seed);
  for (std::uint32_t j = 0; j + 1 < dim; ++j)
    params.w[j] = (rng.next_unit() * 2.0 - 1.0) * 0.01;
  return params;
}

namespace {

void sgd_epochs(ModelParams& params, const FeatureMatrix& data,
                const StudyConfig& config, std::uint32_t epochs,
                crypto::Rng& rng) {
  std::vector<std::uint32_t> order(data.rows.size());
  for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::uint32_t epoch = 0; epoch < epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size();
         start += config.batch_size) {
      std::size_t len = std::min<std::size_t>(config.batch_size,
                                              order.size() - start);
      std::vector<double> grad = batch_gradient(
          params, data, std::span<const std::uint32_t>(&order[start], len));
      for (std::uint32_t j = 0; j < params.dim; ++j)
        params.w[j] -= config.lr_local * grad[j];
    }
  }
}

}  // namespace

Outcome<LocalUpdate, FlError> local_train(const ModelParams& global,
                                          const FeatureMatrix& data,
                                          const StudyConfig& config,
                                          const identity::Did& patient,
                                          std::uint32_t round) {
  if (global.dim != config.schema.feature_dim + 1 ||
      (!data.rows.empty() && data.dim != config.schema.feature_dim))
    return FlError::DimensionMismatch;

  LocalUpdate update;
  update.patient = patient;
  update.round = round;
  update.n_samples = static_cast<std::uint32_t>(data.rows.size());
  if (data.rows.empty()) {
    update.delta = FixedVec::zeros(global.dim);
    return update;
  }

  // Shuffle order is deterministic per (study seed, patient, round).
  Encoder label;
  label.raw(as_span(patient.id));
  label.u32(round);
  crypto::Rng rng(crypto::kdf(config.init_seed, as_span(label.data())));

  ModelParams local = global;
  sgd_epochs(local, data, config, config.local_epochs, rng);

  std::vector<double> scaled(global.dim);
  double n = static_cast<double>(data.rows.size());
  for (std::uint32_t j = 0; j < global.dim; ++j)
    scaled[j] = n * (local.w[j] - global.w[j]);
  update.delta = quantize(scaled);
  return update;
}

Outcome<ModelParams, FlError> apply_global(const ModelParams& global,
                                           const FixedVec& sum_delta,
                                           std::uint64_t total_n,
                                           double lr_global) {
  if (sum_delta.dim != global.dim) return FlError::DimensionMismatch;
  if (total_n == 0) return FlError::ZeroParticipation;
  ModelParams next = global;
  for (std::uint32_t j = 0; j < global.dim; ++j)
    next.w[j] += lr_global * dequantize_scalar(sum_delta.v[j]) /
                 static_cast<double>(total_n);
  return next;
}

ModelParams train_centralized(const FeatureMatrix& data, const StudyConfig& config,
                              std::uint32_t epochs) {
  ModelParams params = init_model(config);
  if (data.rows.empty()) return params;
  crypto::Rng rng(crypto::kdf(config.init_seed, as_span("centralized")));
  sgd_epochs(params, data, config, epochs, rng);
  return params;
}

}  // namespace dhin::fl
