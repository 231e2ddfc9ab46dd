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

#include "p6/agent.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <utility>

namespace p6 {
namespace {

int argmax_lowest(const Eigen::VectorXd& v) {
  int best = 0;
  for (int i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

Eigen::VectorXd stable_softmax(const Eigen::VectorXd& z) {
  const Eigen::VectorXd shifted = z.array() - z.maxCoeff();
  const Eigen::VectorXd e = shifted.array().exp();
  return e / e.sum();
}

// Activations per layer: pre[i] = z of layer i, act[i] = input of layer i.
struct ForwardTrace {
  std::vector<Eigen::VectorXd> act;
  std::vector<Eigen::VectorXd> pre;
  Eigen::VectorXd out;
};

ForwardTrace traced_forward(const MlpModel& m, const Eigen::VectorXd& x) {
  ForwardTrace t;
  Eigen::VectorXd a = x;
  const auto& layers = m.layers();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    t.act.push_back(a);
    Eigen::VectorXd z = layers[i].w * a + layers[i].b;
    t.pre.push_back(z);
    a = i + 1 < layers.size() ? z.cwiseMax(0.0) : z;
  }
  t.out = a;
  return t;
}

// Per-sample targets, treated as constants during differentiation.
std::vector<double> batch_targets(const MlpModel& online, const MlpModel& target,
                                  const std::vector<Transition>& batch, double gamma) {
  std::vector<double> y;
  y.reserve(batch.size());
  for (const Transition& t : batch) y.push_back(ddqn_target(t, online, target, gamma));
  return y;
}

}  // namespace

MlpModel MlpModel::init(const std::vector<int>& sizes, Rng& rng) {
  if (sizes.size() < 2) throw DimensionMismatch("an MLP needs at least input and output sizes");
  MlpModel m;
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    const int in = sizes[i];
    const int out = sizes[i + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    MlpLayer layer;
    layer.w.resize(out, in);
    layer.b.resize(out);
    for (int r = 0; r < out; ++r) {
      for (int c = 0; c < in; ++c) layer.w(r, c) = (2 * rng.real01() - 1) * bound;
    }
    for (int r = 0; r < out; ++r) layer.b(r) = (2 * rng.real01() - 1) * bound;
    m.layers_.push_back(std::move(layer));
  }
  return m;
}

Eigen::VectorXd MlpModel::forward(const Eigen::VectorXd& x) const {
  if (layers_.empty()) throw DimensionMismatch("model has no layers");
  if (x.size() != layers_[0].w.cols()) {
    throw DimensionMismatch("input size " + std::to_string(x.size()) + " does not match " +
                            std::to_string(layers_[0].w.cols()));
  }
  return traced_forward(*this, x).out;
}

bool MlpModel::operator==(const MlpModel& other) const {
  if (layers_.size() != other.layers_.size()) return false;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const MlpLayer& a = layers_[i];
    const MlpLayer& b = other.layers_[i];
    if (a.w.rows() != b.w.rows() || a.w.cols() != b.w.cols()) return false;
    if ((a.w.array() != b.w.array()).any()) return false;
    if ((a.b.array() != b.b.array()).any()) return false;
  }
  return true;
}

Eigen::VectorXd to_vector(const FuzzState& state) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(state.size()));
  for (std::size_t i = 0; i < state.size(); ++i) v[static_cast<Eigen::Index>(i)] = state[i];
  return v;
}

ReplayMemory::ReplayMemory(std::size_t capacity, double priority_factor)
    : capacity_(capacity), priority_factor_(priority_factor) {
  if (capacity_ == 0) throw std::invalid_argument("replay capacity must be positive");
  if (priority_factor_ <= 0 || priority_factor_ > 1) {
    throw std::invalid_argument("priority factor must be in (0, 1]");
  }
}

void ReplayMemory::push(Transition t) {
  Stamped s{std::move(t), next_seq_++};
  if (entries_.size() < capacity_) {
    entries_.push_back(std::move(s));
  } else {
    entries_[write_pos_] = std::move(s);
    write_pos_ = (write_pos_ + 1) % capacity_;
  }
}

std::vector<std::size_t> ReplayMemory::ranked() const {
  std::vector<std::size_t> order(entries_.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double ra = std::abs(entries_[a].t.r);
    const double rb = std::abs(entries_[b].t.r);
    if (ra != rb) return ra > rb;
    return entries_[a].seq > entries_[b].seq;  // ties favor the newest
  });
  return order;
}

std::vector<double> ReplayMemory::sampling_weights() const {
  std::vector<double> weights(entries_.size(), 0.0);
  double w = 1.0;
  double total = 0.0;
  const std::vector<std::size_t> order = ranked();
  for (std::size_t k = 0; k < order.size(); ++k) {
    weights[order[k]] = w;
    total += w;
    w *= priority_factor_;
  }
  for (double& x : weights) x /= total;
  return weights;
}

std::vector<Transition> ReplayMemory::sample(std::size_t batch, Rng& rng) const {
  if (entries_.empty()) throw std::out_of_range("cannot sample from an empty replay memory");
  const std::vector<std::size_t> order = ranked();
  std::vector<double> cumulative(order.size());
  double total = 0.0;
  double w = 1.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    total += w;
    cumulative[k] = total;
    w *= priority_factor_;
  }
  std::vector<Transition> out;
  out.reserve(batch);
  for (std::size_t i = 0; i < batch; ++i) {
    const double u = rng.real01() * total;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const std::size_t k =
        std::min<std::size_t>(order.size() - 1, it - cumulative.begin());
    out.push_back(entries_[order[k]].t);
  }
  return out;
}

double ddqn_target(const Transition& t, const MlpModel& online, const MlpModel& target,
                   double gamma) {
  if (t.terminal) return t.r;
  const Eigen::VectorXd next = to_vector(t.s_next);
  const int a_star = argmax_lowest(online.forward(next));
  return t.r + gamma * target.forward(next)[a_star];
}

double batch_loss(const MlpModel& online, const MlpModel& target,
                  const std::vector<Transition>& batch, const Hyperparams& hp) {
  const std::vector<double> y = batch_targets(online, target, batch, hp.gamma);
  double loss = 0.0;
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const Eigen::VectorXd q = online.forward(to_vector(batch[j].s));
    if (hp.loss == Hyperparams::Loss::kMse) {
      const double d = q[batch[j].a] - y[j];
      loss += d * d;
    } else {
      const Eigen::VectorXd p = stable_softmax(q);
      loss += -y[j] * std::log(std::max(p[batch[j].a], 1e-300));
    }
  }
  return loss / static_cast<double>(batch.size());
}

MlpGradients compute_gradients(const MlpModel& online, const MlpModel& target,
                               const std::vector<Transition>& batch, const Hyperparams& hp) {
  const std::vector<double> y = batch_targets(online, target, batch, hp.gamma);
  const auto& layers = online.layers();

  MlpGradients grads;
  for (const MlpLayer& l : layers) {
    MlpLayer g;
    g.w = Eigen::MatrixXd::Zero(l.w.rows(), l.w.cols());
    g.b = Eigen::VectorXd::Zero(l.b.size());
    grads.push_back(std::move(g));
  }

  const double scale = 1.0 / static_cast<double>(batch.size());
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const ForwardTrace trace = traced_forward(online, to_vector(batch[j].s));
    Eigen::VectorXd delta = Eigen::VectorXd::Zero(trace.out.size());
    if (hp.loss == Hyperparams::Loss::kMse) {
      delta[batch[j].a] = 2.0 * (trace.out[batch[j].a] - y[j]) * scale;
    } else {
      delta = stable_softmax(trace.out) * (y[j] * scale);
      delta[batch[j].a] -= y[j] * scale;
    }
    for (int l = static_cast<int>(layers.size()) - 1; l >= 0; --l) {
      grads[l].w += delta * trace.act[l].transpose();
      grads[l].b += delta;
      if (l > 0) {
        delta = (layers[l].w.transpose() * delta).cwiseProduct(
            (trace.pre[l - 1].array() > 0.0).cast<double>().matrix());
      }
    }
  }
  return grads;
}

double train_step(MlpModel& online, const MlpModel& target,
                  const std::vector<Transition>& batch, const Hyperparams& hp) {
  const double loss = batch_loss(online, target, batch, hp);
  const MlpGradients grads = compute_gradients(online, target, batch, hp);
  for (std::size_t l = 0; l < online.layers().size(); ++l) {
    online.layers()[l].w -= hp.learning_rate * grads[l].w;
    online.layers()[l].b -= hp.learning_rate * grads[l].b;
  }
  return loss;
}

int select_action(const MlpModel& online, const FuzzState& s, double eps, Rng& rng) {
  if (rng.real01() < eps) {
    return static_cast<int>(rng.below(static_cast<uint64_t>(online.output_size())));
  }
  return argmax_lowest(online.forward(to_vector(s)));
}

TrainResult train_agent(FuzzEnv& env, const Hyperparams& hp, uint64_t seed) {
  Rng init_rng(Rng::substream(seed, 0));
  Rng policy_rng(Rng::substream(seed, 1));
  Rng replay_rng(Rng::substream(seed, 2));

  std::vector<int> sizes;
  sizes.push_back(kStateOctets);
  for (int h : hp.hidden) sizes.push_back(h);
  sizes.push_back(static_cast<int>(env.actions().size()));

  TrainResult result;
  result.online = MlpModel::init(sizes, init_rng);
  result.target = result.online;

  ReplayMemory memory(hp.replay_capacity, hp.priority_factor);
  const double planned = 0.5 * hp.num_episodes * hp.max_ep_len;
  const double decay = hp.eps_decay_per_step > 0
                           ? hp.eps_decay_per_step
                           : (hp.eps_start - hp.eps_min) / std::max(1.0, planned);

  for (int ep = 0; ep < hp.num_episodes; ++ep) {
    FuzzState s = env.reset();
    double ep_reward = 0.0;
    for (int t = 0; t < hp.max_ep_len; ++t) {
      const double eps = std::max(hp.eps_min, hp.eps_start - decay * result.global_steps);
      const int a = select_action(result.online, s, eps, policy_rng);
      const StepOutcome out = env.step(a);
      memory.push({s, a, out.reward, out.state, out.terminal});
      ep_reward += out.reward;
      s = out.state;
      if (memory.size() >= static_cast<std::size_t>(hp.batch_size)) {
        train_step(result.online, result.target,
                   memory.sample(static_cast<std::size_t>(hp.batch_size), replay_rng), hp);
      }
      ++result.global_steps;
      if (hp.target_sync_every > 0 && result.global_steps % hp.target_sync_every == 0) {
        result.target = result.online;
      }
      if (out.terminal) break;
    }
    result.episode_rewards.push_back(ep_reward);
  }
  return result;
}

void save_model(const MlpModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  out.precision(std::numeric_limits<double>::max_digits10);
  out << "p6-model 1\n";
  out << "layers " << model.layers().size() << "\n";
  for (const MlpLayer& l : model.layers()) {
    out << "layer " << l.w.rows() << " " << l.w.cols() << "\n";
    for (Eigen::Index r = 0; r < l.w.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.w.cols(); ++c) {
        out << l.w(r, c) << (c + 1 == l.w.cols() ? "" : " ");
      }
      out << "\n";
    }
    for (Eigen::Index r = 0; r < l.b.size(); ++r) {
      out << l.b(r) << (r + 1 == l.b.size() ? "" : " ");
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("failed writing model file: " + path);
}

MlpModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read model file: " + path);
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "p6-model" || version != 1) {
    throw std::runtime_error("not a p6 model file: " + path);
  }
  std::string word;
  std::size_t layer_count = 0;
  in >> word >> layer_count;
  if (word != "layers") throw std::runtime_error("malformed model file: " + path);

  MlpModel m;
  for (std::size_t i = 0; i < layer_count; ++i) {
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    in >> word >> rows >> cols;
    if (word != "layer" || rows <= 0 || cols <= 0) {
      throw std::runtime_error("malformed model file: " + path);
    }
    MlpLayer layer;
    layer.w.resize(rows, cols);
    layer.b.resize(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) in >> layer.w(r, c);
    }
    for (Eigen::Index r = 0; r < rows; ++r) in >> layer.b(r);
    m.layers().push_back(std::move(layer));
  }
  if (!in) throw std::runtime_error("malformed model file: " + path);
  return m;
}

}  // namespace p6
