#ifndef DHIN_LEDGER_HPP
#define DHIN_LEDGER_HPP

#include <deque>
#include <functional>
#include <map>
#include <memory>

#include "dhin/codec.hpp"
#include "dhin/common.hpp"
#include "dhin/identity.hpp"

// Deterministic single-chain simulated ledger: wallets, transfers, contract
// calls, on-demand block production, full replay verification. One honest
// block producer, FIFO transaction order, no fees, no consensus.

namespace dhin::ledger {

using ContractId = std::uint32_t;

struct TransferData {
  identity::Did to;
  Tokens amount = 0;
};

struct ContractCallData {
  ContractId contract = 0;
  std::string method;
  Bytes args;
  Tokens payment = 0;
};

struct Transaction {
  std::uint64_t nonce = 0;  // per-sender, first valid value is 1
  identity::Did sender;
  std::variant<TransferData, ContractCallData> kind;
  Sig64 signature{};

  bool is_transfer() const { return kind.index() == 0; }
  const TransferData& transfer() const { return std::get<0>(kind); }
  const ContractCallData& call() const { return std::get<1>(kind); }

  Bytes signing_bytes() const;
  Bytes encode() const;
  static std::optional<Transaction> decode(ByteSpan bytes);
  Bytes32 digest() const;
};

Transaction make_transfer(const crypto::KeyPair& sender, std::uint64_t nonce,
                          const identity::Did& to, Tokens amount);
Transaction make_call(const crypto::KeyPair& sender, std::uint64_t nonce,
                      ContractId contract, std::string method, Bytes args,
                      Tokens payment = 0);

enum class RejectReason : std::uint8_t {
  None = 0,
  BadSignature = 1,
  BadNonce = 2,
  InsufficientFunds = 3,
  ContractError = 4,
};

const char* reject_reason_name(RejectReason r);

struct Event {
  std::string topic;
  Bytes payload;
};

struct Receipt {
  Bytes32 tx_digest{};
  RejectReason reason = RejectReason::None;
  std::string detail;
  std::vector<Event> events;

  bool applied() const { return reason == RejectReason::None; }
  void encode(Encoder& enc) const;
  static Receipt decode(Decoder& dec);
};

struct Block {
  std::uint64_t height = 0;
  Bytes32 parent_digest{};
  std::vector<Transaction> txs;
  Bytes32 state_root{};
  std::vector<Receipt> tx_results;
  Bytes genesis_meta;  // canonical genesis blob; non-empty only at height 0

  Bytes encode() const;
  Bytes32 digest() const;
};

// Thrown by contract code to reject the current call; the transaction is
// reported Rejected(ContractError(detail)) and leaves state untouched.
struct ContractRevert {
  std::string detail;
};

class Chain;

// Execution context handed to a contract for one call. All effects land on
// working copies and are committed only if the call completes.
class CallContext {
 public:
  const identity::Did& sender() const { return sender_; }
  Tokens payment() const { return payment_; }
  std::uint64_t height() const { return height_; }

  Tokens balance(const identity::Did& did) const;
  Tokens held() const { return held_; }

  // Contract-held funds -> wallet. Reverts the call if underfunded.
  void pay_out(const identity::Did& to, Tokens amount);
  // Wallet -> contract-held funds under a standing authorization (e.g. the
  // Harberger tax pull). Returns false if the wallet cannot cover it.
  bool pull_from_wallet(const identity::Did& from, Tokens amount);

  void emit(std::string topic, Bytes payload);

  const identity::Resolver& resolver() const { return resolver_; }
  const identity::IssuerRegistry& issuers() const { return issuers_; }

 private:
  friend class Chain;
  CallContext(identity::Did sender, Tokens payment, std::uint64_t height,
              std::map<identity::Did, Tokens>& balances, Tokens& held,
              std::vector<Event>& events, const identity::Resolver& resolver,
              const identity::IssuerRegistry& issuers)
      : sender_(std::move(sender)), payment_(payment), height_(height),
        balances_(balances), held_(held), events_(events), resolver_(resolver),
        issuers_(issuers) {}

  identity::Did sender_;
  Tokens payment_;
  std::uint64_t height_;
  std::map<identity::Did, Tokens>& balances_;
  Tokens& held_;
  std::vector<Event>& events_;
  const identity::Resolver& resolver_;
  const identity::IssuerRegistry& issuers_;
};

class Contract {
 public:
  virtual ~Contract() = default;
  virtual std::string name() const = 0;
  // Throw ContractRevert to reject. Args are canonical bytes per method.
  virtual void call(CallContext& ctx, const std::string& method,
                    Decoder& args) = 0;
  virtual void encode_state(Encoder& enc) const = 0;
  virtual std::unique_ptr<Contract> clone() const = 0;
};

struct GenesisMeta {
  std::map<identity::Did, Tokens> allocations;
  std::vector<identity::DidDocument> documents;
  identity::IssuerRegistry issuers;
  // Protocol parameters contracts are constructed with.
  std::uint32_t quorum = 3;
  double kappa = 3.0;
  std::uint32_t tax_basis_points = 100;  // 1%
  std::uint32_t ticks_per_epoch = 1;

  Bytes encode() const;
  static std::optional<GenesisMeta> decode(ByteSpan bytes);
};

using ContractFactory = std::function<std::map<ContractId, std::unique_ptr<Contract>>(
    const GenesisMeta&, const identity::Resolver&)>;

ContractFactory empty_contract_factory();

class Chain {
 public:
  Chain(GenesisMeta meta, ContractFactory factory);

  // Enqueues in submission order; validity is judged at block production.
  Bytes32 submit_tx(Transaction tx);
  std::size_t pending_count() const { return pending_.size(); }

  // Applies pending txs FIFO; each is independently Applied or Rejected.
  const Block& produce_block();

  Tokens balance(const identity::Did& did) const;
  Tokens escrow(ContractId id) const;
  std::uint64_t nonce(const identity::Did& did) const;
  Tokens total_supply() const { return total_supply_; }

  const std::vector<Block>& blocks() const { return blocks_; }
  const Block& head() const { return blocks_.back(); }
  std::uint64_t height() const { return blocks_.back().height; }

  const Contract* contract(ContractId id) const;
  const identity::Resolver& resolver() const { return resolver_; }
  const GenesisMeta& meta() const { return meta_; }
  const std::map<identity::Did, Tokens>& balances() const { return balances_; }
  const std::map<ContractId, Tokens>& escrows() const { return held_; }

  // Sum(wallets) + Sum(contract holdings) == total supply.
  bool conservation_holds() const;

  // Hash links hold and a full replay from genesis reproduces every block
  // bit-exactly (state roots, receipts, everything).
  bool verify() const;

  // Digest over the concatenation of all block digests.
  Bytes32 chain_digest() const;

 private:
  Bytes32 compute_state_root() const;
  Receipt apply_tx(const Transaction& tx, std::uint64_t height);

  GenesisMeta meta_;
  ContractFactory factory_;
  identity::Resolver resolver_;
  std::map<identity::Did, Tokens> balances_;
  std::map<identity::Did, std::uint64_t> nonces_;
  std::map<ContractId, std::unique_ptr<Contract>> contracts_;
  std::map<ContractId, Tokens> held_;
  Tokens total_supply_ = 0;
  std::deque<Transaction> pending_;
  std::vector<Block> blocks_;
};

// Replays `blocks` from the genesis meta embedded in blocks[0] and reports
// whether every stored block is reproduced bit-exactly.
bool verify_blocks(const std::vector<Block>& blocks,
                   const ContractFactory& factory);

}  // namespace dhin::ledger

#endif
