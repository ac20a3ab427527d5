#ifndef DHIN_PROTOCOL_HPP
#define DHIN_PROTOCOL_HPP

#include "dhin/contracts.hpp"
#include "dhin/insurance.hpp"

// The standard on-chain deployment: coordinator at id 1, insurance pool at
// id 2, policy anchors at id 3, all constructed from the genesis parameters.
// verify rebuilds the same set, so chains are self-contained.

namespace dhin {

inline ledger::ContractFactory standard_contract_factory() {
  return [](const ledger::GenesisMeta& meta, const identity::Resolver&) {
    std::map<ledger::ContractId, std::unique_ptr<ledger::Contract>> out;
    out.emplace(contracts::kCoordinatorId,
                std::make_unique<contracts::CoordinatorContract>(
                    meta.quorum, meta.kappa, meta.tax_basis_points));
    out.emplace(insurance::kInsurancePoolId,
                std::make_unique<insurance::InsurancePoolContract>(
                    meta.ticks_per_epoch));
    out.emplace(contracts::kPolicyAnchorId,
                std::make_unique<contracts::PolicyAnchorContract>());
    return out;
  };
}

}  // namespace dhin

#endif
