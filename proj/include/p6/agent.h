// Copyright 2026 The P6 Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// A small Double-DQN learner: an online and a target multi-layer
// perceptron, epsilon-greedy exploration with linear decay, and a replay
// memory prioritized by absolute reward rank.

#ifndef P6_AGENT_H_
#define P6_AGENT_H_

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "p6/fuzz.h"
#include "p6/rng.h"

namespace p6 {

struct DimensionMismatch : std::runtime_error {
  explicit DimensionMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct MlpLayer {
  Eigen::MatrixXd w;  // out x in
  Eigen::VectorXd b;
};

// Rectifier units on hidden layers, identity on the output layer.
class MlpModel {
 public:
  MlpModel() = default;

  // sizes = {input, hidden..., output}. Weights and biases are drawn
  // uniformly from [-1/sqrt(fan_in), +1/sqrt(fan_in)].
  static MlpModel init(const std::vector<int>& sizes, Rng& rng);

  // Throws DimensionMismatch when x does not match the input width.
  Eigen::VectorXd forward(const Eigen::VectorXd& x) const;

  int input_size() const { return layers_.empty() ? 0 : static_cast<int>(layers_[0].w.cols()); }
  int output_size() const {
    return layers_.empty() ? 0 : static_cast<int>(layers_.back().w.rows());
  }
  std::vector<MlpLayer>& layers() { return layers_; }
  const std::vector<MlpLayer>& layers() const { return layers_; }

  bool operator==(const MlpModel& other) const;

 private:
  std::vector<MlpLayer> layers_;
};

Eigen::VectorXd to_vector(const FuzzState& state);

struct Transition {
  FuzzState s;
  int a = 0;
  double r = 0;
  FuzzState s_next;
  bool terminal = false;
};

// Ring buffer with rank-based prioritized sampling: entries are ordered by
// absolute reward descending (ties favor the most recent), the entry at
// rank k carries weight priority_factor^k, and draws are independent with
// replacement under the normalized weights.
class ReplayMemory {
 public:
  ReplayMemory(std::size_t capacity, double priority_factor);

  void push(Transition t);
  std::size_t size() const { return entries_.size(); }
  const Transition& entry(std::size_t i) const { return entries_[i].t; }

  std::vector<Transition> sample(std::size_t batch, Rng& rng) const;

  // Normalized sampling probability per stored entry, in insertion order.
  std::vector<double> sampling_weights() const;

 private:
  struct Stamped {
    Transition t;
    uint64_t seq = 0;
  };
  std::vector<std::size_t> ranked() const;  // indices into entries_, by rank

  std::size_t capacity_;
  double priority_factor_;
  std::vector<Stamped> entries_;
  std::size_t write_pos_ = 0;
  uint64_t next_seq_ = 0;
};

struct Hyperparams {
  double gamma = 0.9;
  double eps_start = 1.0;
  double eps_min = 0.05;
  // 0 means: decay linearly to eps_min across the first half of the
  // planned num_episodes * max_ep_len steps.
  double eps_decay_per_step = 0;
  double learning_rate = 1e-3;
  int batch_size = 32;
  int target_sync_every = 100;
  int num_episodes = 200;
  int max_ep_len = 32;
  std::size_t replay_capacity = 4096;
  double priority_factor = 0.9;
  std::vector<int> hidden = {64, 64};

  // The regression loss is the default; the cross-entropy variant applies
  // softmax over the Q-values against a one-hot of the taken action,
  // weighted by the target value.
  enum class Loss { kMse, kCrossEntropy };
  Loss loss = Loss::kMse;
};

// y = r for terminal transitions, else
// y = r + gamma * Q_target(s', argmax_a Q_online(s', a)).
double ddqn_target(const Transition& t, const MlpModel& online, const MlpModel& target,
                   double gamma);

using MlpGradients = std::vector<MlpLayer>;

// Loss over a batch against the Double-DQN targets, taken actions only.
double batch_loss(const MlpModel& online, const MlpModel& target,
                  const std::vector<Transition>& batch, const Hyperparams& hp);

// Analytic gradients of batch_loss with respect to the online weights.
MlpGradients compute_gradients(const MlpModel& online, const MlpModel& target,
                               const std::vector<Transition>& batch, const Hyperparams& hp);

// One stochastic gradient descent step on the online network. The target
// network is read, never written. Returns the pre-update loss.
double train_step(MlpModel& online, const MlpModel& target,
                  const std::vector<Transition>& batch, const Hyperparams& hp);

// With probability eps a uniform action, otherwise the argmax of the online
// Q-values; ties break toward the lowest index.
int select_action(const MlpModel& online, const FuzzState& s, double eps, Rng& rng);

struct TrainResult {
  MlpModel online;
  MlpModel target;
  std::vector<double> episode_rewards;
  int global_steps = 0;
};

// Runs num_episodes episodes against the environment: epsilon-greedy
// action selection, replay push, one train step per environment step once
// the memory can fill a batch, and a target copy every target_sync_every
// global steps. Fully determined by (env state, hp, seed).
TrainResult train_agent(FuzzEnv& env, const Hyperparams& hp, uint64_t seed);

// Text tensor format with a version header; round-trips bit-exactly.
void save_model(const MlpModel& model, const std::string& path);
MlpModel load_model(const std::string& path);  // throws std::runtime_error

}  // namespace p6

#endif  // P6_AGENT_H_
