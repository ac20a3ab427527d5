#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dhin/ledger.hpp"

using namespace dhin;
using namespace dhin::ledger;

namespace {

// Toy contract exercising payments, payouts, events, and revert atomicity.
class VaultContract : public Contract {
 public:
  std::string name() const override { return "vault"; }

  void call(CallContext& ctx, const std::string& method,
            Decoder& args) override {
    if (method == "deposit") {
      ++deposits_;
      ctx.emit("Deposited", {});
      return;
    }
    if (method == "withdraw") {
      Tokens amount = args.u64();
      ctx.pay_out(ctx.sender(), amount);
      return;
    }
    if (method == "fail_after_mutation") {
      ++deposits_;  // must be rolled back
      throw ContractRevert{"deliberate failure"};
    }
    throw ContractRevert{"unknown method: " + method};
  }

  void encode_state(Encoder& enc) const override { enc.u64(deposits_); }

  std::unique_ptr<Contract> clone() const override {
    return std::make_unique<VaultContract>(*this);
  }

  std::uint64_t deposits() const { return deposits_; }

 private:
  std::uint64_t deposits_ = 0;
};

struct Fixture {
  identity::Resolver staging;
  std::vector<identity::Identity> ids;
  GenesisMeta meta;

  explicit Fixture(std::size_t n, Tokens each) {
    crypto::Rng rng(std::uint64_t{31337});
    for (std::size_t i = 0; i < n; ++i) {
      ids.push_back(identity::generate_identity(rng.fill32(), staging));
      meta.documents.push_back(ids.back().document);
      meta.allocations[ids.back().did] = each;
    }
  }

  ContractFactory factory() const {
    return [](const GenesisMeta&, const identity::Resolver&) {
      std::map<ContractId, std::unique_ptr<Contract>> out;
      out.emplace(1, std::make_unique<VaultContract>());
      return out;
    };
  }
};

}  // namespace

TEST_CASE("genesis allocations and supply") {
  Fixture fx(2, 0);
  fx.meta.allocations[fx.ids[0].did] = 100;
  fx.meta.allocations[fx.ids[1].did] = 50;
  Chain chain(fx.meta, empty_contract_factory());
  CHECK(chain.total_supply() == 150);
  CHECK(chain.balance(fx.ids[0].did) == 100);
  CHECK(chain.balance(fx.ids[1].did) == 50);
  CHECK(chain.blocks().size() == 1);
  CHECK(chain.head().parent_digest == Bytes32{});

  GenesisMeta empty;
  Chain none(empty, empty_contract_factory());
  CHECK(none.total_supply() == 0);
}

TEST_CASE("transfers apply, reject on funds, and bump nonces") {
  Fixture fx(2, 100);
  Chain chain(fx.meta, empty_contract_factory());
  const auto& a = fx.ids[0];
  const auto& b = fx.ids[1];

  chain.submit_tx(make_transfer(a.key, 1, b.did, 30));
  const Block& blk = chain.produce_block();
  REQUIRE(blk.tx_results.size() == 1);
  CHECK(blk.tx_results[0].applied());
  CHECK(chain.balance(a.did) == 70);
  CHECK(chain.balance(b.did) == 130);

  chain.submit_tx(make_transfer(a.key, 2, b.did, 200));
  const Block& blk2 = chain.produce_block();
  CHECK(blk2.tx_results[0].reason == RejectReason::InsufficientFunds);
  CHECK(chain.balance(a.did) == 70);

  // Two txs reusing nonce 2 (the failed one did not consume it): the first
  // applies, the duplicate is BadNonce.
  chain.submit_tx(make_transfer(a.key, 2, b.did, 10));
  chain.submit_tx(make_transfer(a.key, 2, b.did, 10));
  const Block& blk3 = chain.produce_block();
  CHECK(blk3.tx_results[0].applied());
  CHECK(blk3.tx_results[1].reason == RejectReason::BadNonce);
}

TEST_CASE("bad signatures and unknown senders are rejected") {
  Fixture fx(2, 100);
  Chain chain(fx.meta, empty_contract_factory());

  Transaction tx = make_transfer(fx.ids[0].key, 1, fx.ids[1].did, 10);
  tx.signature[5] ^= 0x01;
  chain.submit_tx(tx);

  identity::Resolver other;
  identity::Identity stranger =
      identity::generate_identity(Bytes32{{9, 9, 9}}, other);
  chain.submit_tx(make_transfer(stranger.key, 1, fx.ids[1].did, 1));

  const Block& blk = chain.produce_block();
  CHECK(blk.tx_results[0].reason == RejectReason::BadSignature);
  CHECK(blk.tx_results[1].reason == RejectReason::BadSignature);
}

TEST_CASE("submit order is FIFO and digests match") {
  Fixture fx(2, 100);
  Chain chain(fx.meta, empty_contract_factory());
  Bytes32 d1 = chain.submit_tx(make_transfer(fx.ids[0].key, 1, fx.ids[1].did, 1));
  Bytes32 d2 = chain.submit_tx(make_transfer(fx.ids[0].key, 2, fx.ids[1].did, 2));
  Bytes32 d3 = chain.submit_tx(make_transfer(fx.ids[0].key, 3, fx.ids[1].did, 3));
  const Block& blk = chain.produce_block();
  REQUIRE(blk.txs.size() == 3);
  CHECK(blk.tx_results[0].tx_digest == d1);
  CHECK(blk.tx_results[1].tx_digest == d2);
  CHECK(blk.tx_results[2].tx_digest == d3);
}

TEST_CASE("empty queue yields an empty block") {
  Fixture fx(1, 10);
  Chain chain(fx.meta, empty_contract_factory());
  const Block& blk = chain.produce_block();
  CHECK(blk.txs.empty());
  CHECK(blk.height == 1);
}

TEST_CASE("contract calls: payment, payout, revert atomicity") {
  Fixture fx(2, 100);
  Chain chain(fx.meta, fx.factory());
  const auto& a = fx.ids[0];

  chain.submit_tx(make_call(a.key, 1, 1, "deposit", {}, 40));
  chain.produce_block();
  CHECK(chain.balance(a.did) == 60);
  CHECK(chain.escrow(1) == 40);
  auto* vault = dynamic_cast<const VaultContract*>(chain.contract(1));
  REQUIRE(vault != nullptr);
  CHECK(vault->deposits() == 1);

  // Withdraw part of it back.
  Encoder args;
  args.u64(25);
  chain.submit_tx(make_call(a.key, 2, 1, "withdraw", args.take()));
  chain.produce_block();
  CHECK(chain.balance(a.did) == 85);
  CHECK(chain.escrow(1) == 15);

  // A reverting call leaves state exactly unchanged, including its payment.
  Bytes32 root_before = chain.head().state_root;
  chain.submit_tx(make_call(a.key, 3, 1, "fail_after_mutation", {}, 10));
  const Block& blk = chain.produce_block();
  CHECK(blk.tx_results[0].reason == RejectReason::ContractError);
  CHECK(blk.tx_results[0].detail == "deliberate failure");
  CHECK(chain.head().state_root == root_before);
  CHECK(chain.balance(a.did) == 85);
  CHECK(vault->deposits() == 1);

  // Unknown contract and overdraw payout.
  chain.submit_tx(make_call(a.key, 3, 9, "deposit", {}));
  Encoder big;
  big.u64(10000);
  chain.submit_tx(make_call(a.key, 4, 1, "withdraw", big.take()));
  const Block& blk2 = chain.produce_block();
  CHECK(blk2.tx_results[0].reason == RejectReason::ContractError);
  CHECK(blk2.tx_results[1].reason == RejectReason::ContractError);
  CHECK(chain.escrow(1) == 15);
}

TEST_CASE("conservation holds across a random 100-tx workload") {
  Fixture fx(4, 1000);
  Chain chain(fx.meta, fx.factory());
  crypto::Rng rng(std::uint64_t{77});
  std::map<identity::Did, std::uint64_t> nonces;

  for (int b = 0; b < 10; ++b) {
    for (int t = 0; t < 10; ++t) {
      const auto& sender = fx.ids[rng.uniform(fx.ids.size())];
      std::uint64_t nonce = ++nonces[sender.did];
      if (rng.uniform(3) == 0) {
        chain.submit_tx(make_call(sender.key, nonce, 1, "deposit", {},
                                  rng.uniform(200)));
      } else {
        const auto& to = fx.ids[rng.uniform(fx.ids.size())];
        chain.submit_tx(
            make_transfer(sender.key, nonce, to.did, rng.uniform(300)));
      }
    }
    chain.produce_block();
    // Oracle: re-sum wallets + contract holdings.
    Tokens sum = 0;
    for (const auto& [did, amount] : chain.balances()) sum += amount;
    for (const auto& [id, amount] : chain.escrows()) sum += amount;
    CHECK(sum == chain.total_supply());
  }
  // Rejected txs do not consume nonces, so replay must reproduce identical
  // receipts.
  CHECK(chain.verify());
}

TEST_CASE("determinism: identical submissions give identical roots") {
  auto run = [] {
    Fixture fx(3, 500);
    Chain chain(fx.meta, fx.factory());
    chain.submit_tx(make_transfer(fx.ids[0].key, 1, fx.ids[1].did, 5));
    chain.submit_tx(make_call(fx.ids[1].key, 1, 1, "deposit", {}, 7));
    chain.produce_block();
    chain.submit_tx(make_transfer(fx.ids[2].key, 1, fx.ids[0].did, 9));
    chain.produce_block();
    return chain.chain_digest();
  };
  CHECK(run() == run());
}

TEST_CASE("verify detects every single-byte mutation (fuzz)") {
  Fixture fx(3, 1000);
  Chain chain(fx.meta, fx.factory());
  crypto::Rng rng(std::uint64_t{4242});
  std::map<identity::Did, std::uint64_t> nonces;
  for (int b = 0; b < 50; ++b) {
    int txs = 1 + rng.uniform(3);
    for (int t = 0; t < txs; ++t) {
      const auto& sender = fx.ids[rng.uniform(fx.ids.size())];
      const auto& to = fx.ids[rng.uniform(fx.ids.size())];
      chain.submit_tx(make_transfer(sender.key, ++nonces[sender.did], to.did,
                                    rng.uniform(50)));
    }
    chain.produce_block();
  }
  REQUIRE(chain.verify());

  const int trials = 500;
  int detected = 0;
  for (int t = 0; t < trials; ++t) {
    std::vector<Block> mutated = chain.blocks();
    std::size_t bi = rng.uniform(mutated.size());
    Block& blk = mutated[bi];
    std::uint8_t flip = static_cast<std::uint8_t>(1 + rng.uniform(255));
    switch (rng.uniform(6)) {
      case 0:
        blk.state_root[rng.uniform(32)] ^= flip;
        break;
      case 1:
        if (bi > 0) {
          blk.parent_digest[rng.uniform(32)] ^= flip;
          break;
        }
        [[fallthrough]];
      case 2:
        if (!blk.txs.empty()) {
          Transaction& tx = blk.txs[rng.uniform(blk.txs.size())];
          if (tx.is_transfer()) {
            TransferData d = tx.transfer();
            d.amount += 1;
            tx.kind = d;
          } else {
            tx.signature[rng.uniform(64)] ^= flip;
          }
          break;
        }
        [[fallthrough]];
      case 3:
        if (!blk.tx_results.empty()) {
          blk.tx_results[rng.uniform(blk.tx_results.size())].tx_digest[0] ^= flip;
          break;
        }
        [[fallthrough]];
      case 4:
        if (!blk.genesis_meta.empty()) {
          blk.genesis_meta[rng.uniform(blk.genesis_meta.size())] ^= flip;
          break;
        }
        [[fallthrough]];
      default:
        blk.height += 1;
        break;
    }
    if (!verify_blocks(mutated, fx.factory())) ++detected;
  }
  CHECK(detected == trials);
}
