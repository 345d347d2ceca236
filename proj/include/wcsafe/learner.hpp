#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "wcsafe/linalg.hpp"
#include "wcsafe/rng.hpp"

#include <json.hpp>

namespace wcsafe {

/// Fully connected net with rectifier hidden units and either an identity
/// output (critic) or a bound-scaled tanh squash (actor). Weights are
/// row-major (out x in) flat arrays.
class Mlp {
 public:
  enum class Output { Identity, TanhScaled };

  struct Layer {
    int in = 0;
    int out = 0;
    Vec w;
    Vec b;
  };

  /// Per-layer gradient buffers, same shapes as the layers.
  struct Grads {
    std::vector<Vec> w;
    std::vector<Vec> b;
    void zero();
  };

  /// Forward caches for backpropagation.
  struct Tape {
    std::vector<Vec> inputs;  // input seen by each layer
    std::vector<Vec> pre;     // preactivations
    Vec out;
  };

  Mlp() = default;
  /// sizes = {in, hidden..., out}. Hidden layers use fan-in uniform init;
  /// the final layer is zeroed when zero_final (so a fresh actor outputs 0).
  Mlp(const std::vector<int>& sizes, Output output, double bound, Rng& rng,
      bool zero_final = false);

  int input_dim() const { return layers_.empty() ? 0 : layers_.front().in; }
  int output_dim() const { return layers_.empty() ? 0 : layers_.back().out; }
  int layer_count() const { return static_cast<int>(layers_.size()); }
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& mutable_layers() { return layers_; }
  Output output_kind() const { return output_; }
  double bound() const { return bound_; }

  Vec forward(const Vec& x) const;
  void forward(const Vec& x, Tape& tape) const;

  /// Backpropagates dL/dout through the tape, accumulating parameter
  /// gradients into `grads` and returning dL/dinput.
  Vec backward(const Tape& tape, const Vec& dout, Grads& grads) const;

  Grads make_grads() const;

  std::size_t parameter_count() const;
  void apply_adam(const Grads& grads, Grads& m, Grads& v, double lr, long long t);
  /// this <- tau * source + (1 - tau) * this, elementwise.
  void soft_update_from(const Mlp& source, double tau);

  nlohmann::json to_json() const;
  static Mlp from_json(const nlohmann::json& j);

 private:
  std::vector<Layer> layers_;
  Output output_ = Output::Identity;
  double bound_ = 1.0;
};

/// Loss functional over a batch for gradient checking: per-sample value and
/// gradient with respect to the network output.
struct LossFn {
  std::function<double(const Vec& out, int sample)> value;
  std::function<Vec(const Vec& out, int sample)> grad;
};

/// Analytic backpropagation vs central finite differences (step h) over
/// every parameter; returns the max relative error
/// |ga - gn| / max(1, |ga|, |gn|).
double gradient_check(const Mlp& net, const std::vector<Vec>& inputs, const LossFn& loss,
                      double h = 1e-5);

struct Transition {
  Vec s;
  Vec a;
  double r = 0.0;
  Vec s_next;
  bool done = false;
};

/// Fixed-capacity ring with FIFO eviction. Logical index 0 is the oldest
/// retained transition.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& operator[](std::size_t logical) const;
  const Transition& sample(Rng& rng) const;

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // slot of the oldest element once full
  std::vector<Transition> data_;
};

struct AgentConfig {
  std::vector<int> hidden{64, 64};
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  double discount = 0.99;
  double tau = 0.005;
  // Exploration noise scale as a fraction of the action bound, decaying
  // linearly over noise_decay_steps environment steps.
  double noise_sigma_start = 0.10;
  double noise_sigma_end = 0.01;
  long long noise_decay_steps = 60000;
  int batch_size = 64;
  std::size_t buffer_capacity = 100000;
  int warmup = 1000;
  double action_bound = 1.0;
  std::uint64_t seed = 0;
};

void to_json(nlohmann::json& j, const AgentConfig& c);
void from_json(const nlohmann::json& j, AgentConfig& c);

/// Deterministic-policy-gradient agent (actor-critic, replay, target
/// networks, one critic regression + one actor ascent + soft target update
/// per environment step). All randomness comes from the seeded generator.
class DdpgAgent {
 public:
  DdpgAgent(int state_dim, int action_dim, const AgentConfig& cfg);

  /// Actor output; with explore, adds scheduled Gaussian noise and clamps
  /// to the action bound.
  Vec act(const Vec& s, bool explore);

  /// Deterministic actor output; const and safe to call concurrently.
  Vec policy_action(const Vec& s) const;

  struct UpdateDiag {
    bool updated = false;
    double critic_loss = 0.0;
    double actor_value = 0.0;
  };

  /// Stores the transition and, once the buffer is warm, performs one
  /// training update. Throws NumericBlowupError on a non-finite loss.
  UpdateDiag observe_and_update(const Transition& t);

  const AgentConfig& config() const { return cfg_; }
  int state_dim() const { return state_dim_; }
  int action_dim() const { return action_dim_; }
  long long steps_observed() const { return env_steps_; }

  const Mlp& actor() const { return actor_; }
  const Mlp& critic() const { return critic_; }
  const Mlp& actor_target() const { return actor_target_; }
  const Mlp& critic_target() const { return critic_target_; }

  /// Weight checkpoint (versioned JSON; config hash recorded by the caller).
  nlohmann::json checkpoint(const std::string& config_hash) const;
  static DdpgAgent restore(const nlohmann::json& j);

 private:
  void update_once(UpdateDiag& diag);

  int state_dim_ = 0;
  int action_dim_ = 0;
  AgentConfig cfg_;
  Rng rng_;
  Mlp actor_, critic_, actor_target_, critic_target_;
  Mlp::Grads actor_grads_, critic_grads_, scratch_grads_;
  Mlp::Grads actor_m_, actor_v_, critic_m_, critic_v_;
  ReplayBuffer buffer_;
  long long env_steps_ = 0;
  long long updates_ = 0;

  // preallocated workspaces
  Mlp::Tape actor_tape_, critic_tape_, target_tape_;
  Vec sa_;
};

}  // namespace wcsafe
