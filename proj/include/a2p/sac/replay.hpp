#pragma once

#include "a2p/common.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace a2p::sac {

/// One stored interaction. `mixed_action` is the action that actually reached
/// the environment, i.e. the (1-eps)a + eps*a_bar blend.
struct Transition {
  Vec state;
  Vec mixed_action;
  double reward = 0.0;
  Vec next_state;
  bool done = false;
};

/// Fixed-capacity ring buffer, oldest-first eviction, uniform sampling with
/// replacement.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ConfigError("replay buffer: capacity must be positive");
    storage_.reserve(capacity);
  }

  void push(Transition t) {
    if (storage_.size() < capacity_) {
      storage_.push_back(std::move(t));
    } else {
      storage_[head_] = std::move(t);
      head_ = (head_ + 1) % capacity_;
      ++evicted_;
    }
    ++inserted_;
  }

  std::size_t size() const { return storage_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::size_t inserted() const { return inserted_; }
  std::size_t evicted() const { return evicted_; }

  const Transition& at(std::size_t i) const { return storage_[i]; }

  std::vector<std::size_t> sample_indices(int batch, Rng& rng) const {
    if (storage_.empty()) throw ConfigError("replay buffer: sampling from empty buffer");
    std::vector<std::size_t> idx(static_cast<std::size_t>(batch));
    for (auto& i : idx) i = static_cast<std::size_t>(rng.index(static_cast<std::int64_t>(storage_.size())));
    return idx;
  }

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;
  std::size_t inserted_ = 0;
  std::size_t evicted_ = 0;
  std::vector<Transition> storage_;
};

/// Column-per-sample batch matrices assembled from buffer rows.
struct Batch {
  Mat obs;        // (obs_dim x B)
  Mat action;     // (act_dim x B)
  Vec reward;     // (B)
  Mat next_obs;   // (obs_dim x B)
  Vec done_mask;  // (B), 1.0 where done
};

inline Batch assemble_batch(const ReplayBuffer& buf, const std::vector<std::size_t>& idx) {
  if (idx.empty()) throw ConfigError("assemble_batch: empty batch");
  const auto& first = buf.at(idx[0]);
  const int obs_dim = static_cast<int>(first.state.size());
  const int act_dim = static_cast<int>(first.mixed_action.size());
  const int b = static_cast<int>(idx.size());
  Batch out;
  out.obs.resize(obs_dim, b);
  out.action.resize(act_dim, b);
  out.reward.resize(b);
  out.next_obs.resize(obs_dim, b);
  out.done_mask.resize(b);
  for (int k = 0; k < b; ++k) {
    const Transition& t = buf.at(idx[static_cast<std::size_t>(k)]);
    out.obs.col(k) = t.state;
    out.action.col(k) = t.mixed_action;
    out.reward[k] = t.reward;
    out.next_obs.col(k) = t.next_state;
    out.done_mask[k] = t.done ? 1.0 : 0.0;
  }
  return out;
}

}  // namespace a2p::sac
