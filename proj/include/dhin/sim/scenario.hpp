#ifndef DHIN_SIM_SCENARIO_HPP
#define DHIN_SIM_SCENARIO_HPP

#include "dhin/common.hpp"
#include "dhin/phr.hpp"

// Declarative simulation input. Serializes to a flat key = value file
// (integers, reals, strings); lists are comma-separated strings.

namespace dhin::sim {

struct DataModel {
  std::uint32_t feature_dim = 8;
  double margin = 0.3;          // minimum |w*.x| of accepted samples
  double label_noise = 0.08;    // label flip probability
  double rotation_angle = 0.15; // per-patient feature-plane rotation, radians
  std::vector<std::uint32_t> sample_counts;  // rows per patient
};

struct InsurancePlan {
  Tokens premium = 40;          // per epoch (one round)
  Tokens coverage_cap = 300;
  std::uint32_t epochs_per_purchase = 1;
};

struct ClaimScript {
  std::uint32_t round = 0;
  std::uint32_t patient_index = 0;
  Tokens amount = 0;
};

struct Scenario {
  std::uint64_t seed = 42;
  std::uint32_t n_patients = 20;
  std::uint32_t n_physicians = 3;
  std::uint32_t n_evaluators = 3;
  std::uint32_t n_devices = 1;
  std::uint32_t n_pharmacies = 1;

  DataModel data;

  // Study hyperparameters.
  std::uint8_t local_epochs = 2;
  std::uint16_t batch_size = 16;
  double lr_local = 0.2;
  double lr_global = 1.0;
  std::uint16_t rounds = 30;
  Tokens reward_budget_per_round = 1000;
  Tokens evaluator_fee_per_round = 5;
  std::uint32_t validation_rows = 512;
  std::uint32_t test_rows = 1024;

  InsurancePlan insurance;
  std::vector<ClaimScript> claims;

  Tokens owner_allocation = 100000;
  Tokens evaluator_allocation = 3000;
  Tokens nft_self_price = 1000;
  std::uint32_t quorum = 3;
  double kappa = 3.0;
  std::uint32_t tax_basis_points = 100;
  std::uint32_t ticks_per_round = 3;  // clinical, fl, economy
  phr::AnchorMode anchor_mode = phr::AnchorMode::OnChain;

  // The fixed fixture all acceptance tests reference: 20 patients (five at
  // 200 rows, fifteen at 50), 3 physicians, 3 evaluators, 1 device, d=8,
  // 30 rounds, budget 1000/round, premium funded from rewards, tau=1%.
  static Scenario reference();

  std::string serialize() const;
  static Outcome<Scenario, std::string> parse(std::string_view text);
  // Error message, or nullopt when the scenario is viable.
  std::optional<std::string> validate() const;
};

}  // namespace dhin::sim

#endif
