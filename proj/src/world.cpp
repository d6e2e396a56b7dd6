#include "vecsim/world.hpp"

#include <algorithm>
#include <cassert>

namespace vecsim {

const CacheEntryMeta* CacheStore::find(ServiceId id) const {
  auto it = entries_.find(id);
  return it == entries_.end() ? nullptr : &it->second;
}

bool CacheStore::touch(ServiceId id, Tick now) {
  auto it = entries_.find(id);
  if (it == entries_.end()) return false;
  it->second.last_used = now;
  it->second.freq += 1;
  it->second.ref_bit = true;
  return true;
}

bool CacheStore::insert(ServiceId id, std::int64_t size_bytes, Tick now) {
  if (contains(id)) return false;
  if (size_bytes > free_bytes()) return false;
  CacheEntryMeta m;
  m.size_bytes = size_bytes;
  m.inserted = now;
  m.last_used = now;
  m.freq = 1;
  m.insert_seq = next_seq_++;
  m.ref_bit = true;
  entries_.emplace(id, m);
  ring_.push_back(id);
  occupied_ += size_bytes;
  return true;
}

bool CacheStore::erase(ServiceId id) {
  auto it = entries_.find(id);
  if (it == entries_.end()) return false;
  occupied_ -= it->second.size_bytes;
  entries_.erase(it);
  auto pos = std::find(ring_.begin(), ring_.end(), id);
  assert(pos != ring_.end());
  const auto idx = static_cast<std::size_t>(pos - ring_.begin());
  ring_.erase(pos);
  if (ring_.empty()) {
    hand_ = 0;
  } else {
    if (idx < hand_) --hand_;
    hand_ %= ring_.size();
  }
  return true;
}

void CacheStore::pin(ServiceId id) {
  auto it = entries_.find(id);
  if (it != entries_.end()) it->second.pin_count += 1;
}

void CacheStore::unpin(ServiceId id) {
  auto it = entries_.find(id);
  if (it != entries_.end() && it->second.pin_count > 0) it->second.pin_count -= 1;
}

void CacheStore::clear_ref_bit(ServiceId id) {
  auto it = entries_.find(id);
  if (it != entries_.end()) it->second.ref_bit = false;
}

std::string_view to_string(ConnStatus s) {
  switch (s) {
    case ConnStatus::Pending: return "pending";
    case ConnStatus::Established: return "established";
    case ConnStatus::Transmitting: return "transmitting";
    case ConnStatus::Computing: return "computing";
    case ConnStatus::Finished: return "finished";
    case ConnStatus::Failed: return "failed";
  }
  return "?";
}

std::string_view to_string(ConnKind k) {
  switch (k) {
    case ConnKind::V2R: return "v2r";
    case ConnKind::V2V: return "v2v";
    case ConnKind::R2R: return "r2r";
    case ConnKind::R2C: return "r2c";
  }
  return "?";
}

bool conn_transition_allowed(ConnStatus from, ConnEvent ev) {
  switch (ev) {
    case ConnEvent::Establish:
      return from == ConnStatus::Pending;
    case ConnEvent::StartTransmit:
      return from == ConnStatus::Established;
    case ConnEvent::StartCompute:
      return from == ConnStatus::Transmitting;
    case ConnEvent::Finish:
      return from == ConnStatus::Transmitting || from == ConnStatus::Computing;
    case ConnEvent::Fail:
      return from != ConnStatus::Finished && from != ConnStatus::Failed;
  }
  return false;
}

ConnStatus conn_transition(ConnStatus from, ConnEvent ev) {
  assert(conn_transition_allowed(from, ev));
  switch (ev) {
    case ConnEvent::Establish: return ConnStatus::Established;
    case ConnEvent::StartTransmit: return ConnStatus::Transmitting;
    case ConnEvent::StartCompute: return ConnStatus::Computing;
    case ConnEvent::Finish: return ConnStatus::Finished;
    case ConnEvent::Fail: return ConnStatus::Failed;
  }
  return from;
}

}  // namespace vecsim
