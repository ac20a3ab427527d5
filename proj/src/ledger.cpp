#include "dhin/ledger.hpp"

#include <stdexcept>

namespace dhin::ledger {

const char* reject_reason_name(RejectReason r) {
  switch (r) {
    case RejectReason::None: return "Applied";
    case RejectReason::BadSignature: return "BadSignature";
    case RejectReason::BadNonce: return "BadNonce";
    case RejectReason::InsufficientFunds: return "InsufficientFunds";
    case RejectReason::ContractError: return "ContractError";
  }
  return "?";
}

Bytes Transaction::signing_bytes() const {
  Encoder enc;
  enc.u64(nonce);
  enc.raw(as_span(sender.id));
  if (is_transfer()) {
    const TransferData& t = transfer();
    enc.u8(0);
    enc.raw(as_span(t.to.id));
    enc.u64(t.amount);
  } else {
    const ContractCallData& c = call();
    enc.u8(1);
    enc.u32(c.contract);
    enc.str(c.method);
    enc.bytes(as_span(c.args));
    enc.u64(c.payment);
  }
  return enc.take();
}

Bytes Transaction::encode() const {
  Encoder enc;
  enc.raw(as_span(signing_bytes()));
  enc.raw(as_span(signature));
  return enc.take();
}

std::optional<Transaction> Transaction::decode(ByteSpan bytes) {
  try {
    Decoder dec(bytes);
    Transaction tx;
    tx.nonce = dec.u64();
    tx.sender.id = dec.fixed<32>();
    std::uint8_t tag = dec.u8();
    if (tag == 0) {
      TransferData t;
      t.to.id = dec.fixed<32>();
      t.amount = dec.u64();
      tx.kind = t;
    } else if (tag == 1) {
      ContractCallData c;
      c.contract = dec.u32();
      c.method = dec.str();
      c.args = dec.bytes();
      c.payment = dec.u64();
      tx.kind = c;
    } else {
      return std::nullopt;
    }
    tx.signature = dec.fixed<64>();
    if (!dec.done()) return std::nullopt;
    return tx;
  } catch (const CodecError&) {
    return std::nullopt;
  }
}

Bytes32 Transaction::digest() const { return crypto::sha256(as_span(encode())); }

Transaction make_transfer(const crypto::KeyPair& sender, std::uint64_t nonce,
                          const identity::Did& to, Tokens amount) {
  Transaction tx;
  tx.nonce = nonce;
  tx.sender = identity::did_of(sender.public_key);
  tx.kind = TransferData{to, amount};
  tx.signature = crypto::sign(sender, as_span(tx.signing_bytes()));
  return tx;
}

Transaction make_call(const crypto::KeyPair& sender, std::uint64_t nonce,
                      ContractId contract, std::string method, Bytes args,
                      Tokens payment) {
  Transaction tx;
  tx.nonce = nonce;
  tx.sender = identity::did_of(sender.public_key);
  tx.kind = ContractCallData{contract, std::move(method), std::move(args), payment};
  tx.signature = crypto::sign(sender, as_span(tx.signing_bytes()));
  return tx;
}

void Receipt::encode(Encoder& enc) const {
  enc.raw(as_span(tx_digest));
  enc.u8(static_cast<std::uint8_t>(reason));
  enc.str(detail);
  enc.u32(static_cast<std::uint32_t>(events.size()));
  for (const Event& e : events) {
    enc.str(e.topic);
    enc.bytes(as_span(e.payload));
  }
}

Receipt Receipt::decode(Decoder& dec) {
  Receipt r;
  r.tx_digest = dec.fixed<32>();
  r.reason = static_cast<RejectReason>(dec.u8());
  r.detail = dec.str();
  std::uint32_t n = dec.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    Event e;
    e.topic = dec.str();
    e.payload = dec.bytes();
    r.events.push_back(std::move(e));
  }
  return r;
}

Bytes Block::encode() const {
  Encoder enc;
  enc.u64(height);
  enc.raw(as_span(parent_digest));
  enc.u32(static_cast<std::uint32_t>(txs.size()));
  for (const Transaction& tx : txs) enc.bytes(as_span(tx.encode()));
  enc.raw(as_span(state_root));
  enc.u32(static_cast<std::uint32_t>(tx_results.size()));
  for (const Receipt& r : tx_results) r.encode(enc);
  enc.bytes(as_span(genesis_meta));
  return enc.take();
}

Bytes32 Block::digest() const { return crypto::sha256(as_span(encode())); }

Bytes GenesisMeta::encode() const {
  Encoder enc;
  enc.u32(static_cast<std::uint32_t>(allocations.size()));
  for (const auto& [did, amount] : allocations) {
    enc.raw(as_span(did.id));
    enc.u64(amount);
  }
  enc.u32(static_cast<std::uint32_t>(documents.size()));
  for (const identity::DidDocument& doc : documents) {
    enc.raw(as_span(doc.did.id));
    enc.raw(as_span(doc.public_key));
    enc.u64(doc.created_at);
  }
  issuers.encode(enc);
  enc.u32(quorum);
  enc.f64(kappa);
  enc.u32(tax_basis_points);
  enc.u32(ticks_per_epoch);
  return enc.take();
}

std::optional<GenesisMeta> GenesisMeta::decode(ByteSpan bytes) {
  try {
    Decoder dec(bytes);
    GenesisMeta meta;
    std::uint32_t n = dec.u32();
    for (std::uint32_t i = 0; i < n; ++i) {
      identity::Did did{dec.fixed<32>()};
      meta.allocations[did] = dec.u64();
    }
    n = dec.u32();
    for (std::uint32_t i = 0; i < n; ++i) {
      identity::DidDocument doc;
      doc.did.id = dec.fixed<32>();
      doc.public_key = dec.fixed<32>();
      doc.created_at = dec.u64();
      meta.documents.push_back(doc);
    }
    meta.issuers = identity::IssuerRegistry::decode(dec);
    meta.quorum = dec.u32();
    meta.kappa = dec.f64();
    meta.tax_basis_points = dec.u32();
    meta.ticks_per_epoch = dec.u32();
    if (!dec.done()) return std::nullopt;
    return meta;
  } catch (const CodecError&) {
    return std::nullopt;
  }
}

ContractFactory empty_contract_factory() {
  return [](const GenesisMeta&, const identity::Resolver&) {
    return std::map<ContractId, std::unique_ptr<Contract>>{};
  };
}

Tokens CallContext::balance(const identity::Did& did) const {
  auto it = balances_.find(did);
  return it == balances_.end() ? 0 : it->second;
}

void CallContext::pay_out(const identity::Did& to, Tokens amount) {
  if (held_ < amount) throw ContractRevert{"contract holdings underfunded"};
  held_ -= amount;
  balances_[to] += amount;
}

bool CallContext::pull_from_wallet(const identity::Did& from, Tokens amount) {
  auto it = balances_.find(from);
  if (it == balances_.end() || it->second < amount) return false;
  it->second -= amount;
  held_ += amount;
  return true;
}

void CallContext::emit(std::string topic, Bytes payload) {
  events_.push_back(Event{std::move(topic), std::move(payload)});
}

Chain::Chain(GenesisMeta meta, ContractFactory factory)
    : meta_(std::move(meta)), factory_(std::move(factory)) {
  for (const identity::DidDocument& doc : meta_.documents)
    resolver_.register_document(doc);
  for (const auto& [did, amount] : meta_.allocations) {
    balances_[did] = amount;
    total_supply_ += amount;
  }
  contracts_ = factory_(meta_, resolver_);
  for (const auto& [id, c] : contracts_) held_[id] = 0;

  Block genesis;
  genesis.height = 0;
  genesis.parent_digest = Bytes32{};
  genesis.genesis_meta = meta_.encode();
  genesis.state_root = compute_state_root();
  blocks_.push_back(std::move(genesis));
}

Bytes32 Chain::submit_tx(Transaction tx) {
  Bytes32 d = tx.digest();
  pending_.push_back(std::move(tx));
  return d;
}

Bytes32 Chain::compute_state_root() const {
  Encoder enc;
  enc.u64(total_supply_);
  enc.u32(static_cast<std::uint32_t>(balances_.size()));
  for (const auto& [did, amount] : balances_) {
    enc.raw(as_span(did.id));
    enc.u64(amount);
  }
  enc.u32(static_cast<std::uint32_t>(nonces_.size()));
  for (const auto& [did, nonce] : nonces_) {
    enc.raw(as_span(did.id));
    enc.u64(nonce);
  }
  enc.u32(static_cast<std::uint32_t>(contracts_.size()));
  for (const auto& [id, contract] : contracts_) {
    enc.u32(id);
    enc.str(contract->name());
    enc.u64(held_.at(id));
    Encoder state;
    contract->encode_state(state);
    enc.bytes(as_span(state.data()));
  }
  return crypto::sha256(as_span(enc.data()));
}

Receipt Chain::apply_tx(const Transaction& tx, std::uint64_t height) {
  Receipt receipt;
  receipt.tx_digest = tx.digest();

  const identity::DidDocument* doc = resolver_.lookup(tx.sender);
  if (!doc || !crypto::verify(doc->public_key, as_span(tx.signing_bytes()),
                              tx.signature)) {
    receipt.reason = RejectReason::BadSignature;
    return receipt;
  }
  std::uint64_t expected = nonces_[tx.sender] + 1;
  if (tx.nonce != expected) {
    receipt.reason = RejectReason::BadNonce;
    return receipt;
  }

  if (tx.is_transfer()) {
    const TransferData& t = tx.transfer();
    auto it = balances_.find(tx.sender);
    if (it == balances_.end() || it->second < t.amount) {
      receipt.reason = RejectReason::InsufficientFunds;
      return receipt;
    }
    it->second -= t.amount;
    balances_[t.to] += t.amount;
    nonces_[tx.sender] = expected;
    return receipt;
  }

  const ContractCallData& c = tx.call();
  auto cit = contracts_.find(c.contract);
  if (cit == contracts_.end()) {
    receipt.reason = RejectReason::ContractError;
    receipt.detail = "unknown contract";
    return receipt;
  }
  {
    auto it = balances_.find(tx.sender);
    Tokens have = it == balances_.end() ? 0 : it->second;
    if (have < c.payment) {
      receipt.reason = RejectReason::InsufficientFunds;
      return receipt;
    }
  }

  // Work on copies; commit only if the call completes.
  std::map<identity::Did, Tokens> work_balances = balances_;
  Tokens work_held = held_[c.contract];
  std::unique_ptr<Contract> work_contract = cit->second->clone();
  work_balances[tx.sender] -= c.payment;
  work_held += c.payment;

  std::vector<Event> events;
  CallContext ctx(tx.sender, c.payment, height, work_balances, work_held,
                  events, resolver_, meta_.issuers);
  try {
    Decoder args(as_span(c.args));
    work_contract->call(ctx, c.method, args);
  } catch (const ContractRevert& revert) {
    receipt.reason = RejectReason::ContractError;
    receipt.detail = revert.detail;
    return receipt;
  } catch (const CodecError&) {
    receipt.reason = RejectReason::ContractError;
    receipt.detail = "malformed args";
    return receipt;
  }

  balances_ = std::move(work_balances);
  held_[c.contract] = work_held;
  cit->second = std::move(work_contract);
  nonces_[tx.sender] = expected;
  receipt.events = std::move(events);
  return receipt;
}

const Block& Chain::produce_block() {
  Block block;
  block.height = blocks_.back().height + 1;
  block.parent_digest = blocks_.back().digest();
  while (!pending_.empty()) {
    Transaction tx = std::move(pending_.front());
    pending_.pop_front();
    block.tx_results.push_back(apply_tx(tx, block.height));
    block.txs.push_back(std::move(tx));
  }
  block.state_root = compute_state_root();
  blocks_.push_back(std::move(block));
  if (!conservation_holds())
    throw std::logic_error("token conservation violated");
  return blocks_.back();
}

Tokens Chain::balance(const identity::Did& did) const {
  auto it = balances_.find(did);
  return it == balances_.end() ? 0 : it->second;
}

Tokens Chain::escrow(ContractId id) const {
  auto it = held_.find(id);
  return it == held_.end() ? 0 : it->second;
}

std::uint64_t Chain::nonce(const identity::Did& did) const {
  auto it = nonces_.find(did);
  return it == nonces_.end() ? 0 : it->second;
}

const Contract* Chain::contract(ContractId id) const {
  auto it = contracts_.find(id);
  return it == contracts_.end() ? nullptr : it->second.get();
}

bool Chain::conservation_holds() const {
  Tokens sum = 0;
  for (const auto& [did, amount] : balances_) sum += amount;
  for (const auto& [id, amount] : held_) sum += amount;
  return sum == total_supply_;
}

bool Chain::verify() const { return verify_blocks(blocks_, factory_); }

Bytes32 Chain::chain_digest() const {
  Encoder enc;
  for (const Block& b : blocks_) enc.raw(as_span(b.digest()));
  return crypto::sha256(as_span(enc.data()));
}

bool verify_blocks(const std::vector<Block>& blocks,
                   const ContractFactory& factory) {
  if (blocks.empty()) return false;
  auto meta = GenesisMeta::decode(as_span(blocks[0].genesis_meta));
  if (!meta) return false;

  Chain replay(*meta, factory);
  if (replay.blocks()[0].digest() != blocks[0].digest()) return false;

  for (std::size_t i = 1; i < blocks.size(); ++i) {
    if (blocks[i].parent_digest != blocks[i - 1].digest()) return false;
    if (blocks[i].height != i) return false;
    for (const Transaction& tx : blocks[i].txs) replay.submit_tx(tx);
    const Block& produced = replay.produce_block();
    if (produced.digest() != blocks[i].digest()) return false;
  }
  return true;
}

}  // namespace dhin::ledger
