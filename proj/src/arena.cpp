#include "rpnlgp/evaluator.hpp"

#include <string>

namespace rpnlgp {

Arena::Arena(std::size_t capacity)
    : slots_(capacity), alive_pos_(capacity, kNotAlive) {
  if (capacity == 0 || capacity >= kNotAlive) throw UsageError("arena capacity out of range");
  dead_pool_.reserve(capacity);
  alive_.reserve(capacity);
  for (std::size_t i = 0; i < capacity; ++i) slots_[i].slot_id = static_cast<SlotId>(i);
}

SlotId Arena::acquire() {
  SlotId slot;
  if (!dead_pool_.empty()) {
    slot = dead_pool_.back();
    dead_pool_.pop_back();
  } else if (touched_ < slots_.size()) {
    slot = static_cast<SlotId>(touched_++);
  } else {
    throw CapacityError("arena full: all " + std::to_string(slots_.size()) + " slots are alive");
  }
  Individual& ind = slots_[slot];
  ind.alive = true;
  ind.score = std::numeric_limits<double>::quiet_NaN();
  ind.evaluated = false;
  alive_pos_[slot] = static_cast<std::uint32_t>(alive_.size());
  alive_.push_back(slot);
  return slot;
}

void Arena::release(SlotId slot) {
  if (slot >= slots_.size() || !slots_[slot].alive) {
    throw UsageError("release of slot " + std::to_string(slot) + " which is not alive");
  }
  slots_[slot].alive = false;
  const std::uint32_t pos = alive_pos_[slot];
  const SlotId moved = alive_.back();
  alive_[pos] = moved;
  alive_pos_[moved] = pos;
  alive_.pop_back();
  alive_pos_[slot] = kNotAlive;
  dead_pool_.push_back(slot);
}

}  // namespace rpnlgp
