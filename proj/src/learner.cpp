#include "wcsafe/learner.hpp"

#include <algorithm>
#include <cmath>

#include "wcsafe/errors.hpp"

namespace wcsafe {

void Mlp::Grads::zero() {
  for (auto& g : w) std::fill(g.begin(), g.end(), 0.0);
  for (auto& g : b) std::fill(g.begin(), g.end(), 0.0);
}

Mlp::Mlp(const std::vector<int>& sizes, Output output, double bound, Rng& rng, bool zero_final)
    : output_(output), bound_(bound) {
  if (sizes.size() < 2) throw DimensionError("Mlp: need at least input and output sizes");
  for (int s : sizes)
    if (s < 1) throw DimensionError("Mlp: layer sizes must be positive");
  layers_.resize(sizes.size() - 1);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Layer& layer = layers_[l];
    layer.in = sizes[l];
    layer.out = sizes[l + 1];
    layer.w.assign(static_cast<std::size_t>(layer.in) * layer.out, 0.0);
    layer.b.assign(layer.out, 0.0);
    const bool last = l + 1 == layers_.size();
    if (last && zero_final) continue;
    const double s = 1.0 / std::sqrt(static_cast<double>(layer.in));
    for (double& w : layer.w) w = rng.uniform(-s, s);
    for (double& b : layer.b) b = rng.uniform(-s, s);
  }
}

namespace {

inline void affine(const Mlp::Layer& layer, const Vec& x, Vec& out) {
  out.resize(layer.out);
  const double* w = layer.w.data();
  for (int i = 0; i < layer.out; ++i) {
    double s = layer.b[i];
    const double* row = w + static_cast<std::size_t>(i) * layer.in;
    for (int j = 0; j < layer.in; ++j) s += row[j] * x[j];
    out[i] = s;
  }
}

}  // namespace

Vec Mlp::forward(const Vec& x) const {
  Tape tape;
  forward(x, tape);
  return tape.out;
}

void Mlp::forward(const Vec& x, Tape& tape) const {
  if (static_cast<int>(x.size()) != input_dim())
    throw DimensionError("Mlp::forward: input size mismatch");
  tape.inputs.resize(layers_.size());
  tape.pre.resize(layers_.size());
  const Vec* cur = &x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    tape.inputs[l] = *cur;
    affine(layers_[l], *cur, tape.pre[l]);
    const bool last = l + 1 == layers_.size();
    if (!last) {
      Vec& act = tape.pre[l];
      tape.inputs[l + 1].resize(act.size());
      for (std::size_t i = 0; i < act.size(); ++i)
        tape.inputs[l + 1][i] = act[i] > 0.0 ? act[i] : 0.0;
      cur = &tape.inputs[l + 1];
    }
  }
  const Vec& last_pre = tape.pre.back();
  tape.out.resize(last_pre.size());
  if (output_ == Output::Identity) {
    tape.out = last_pre;
  } else {
    for (std::size_t i = 0; i < last_pre.size(); ++i)
      tape.out[i] = bound_ * std::tanh(last_pre[i]);
  }
}

Vec Mlp::backward(const Tape& tape, const Vec& dout, Grads& grads) const {
  const std::size_t depth = layers_.size();
  Vec delta(dout.size());
  if (output_ == Output::Identity) {
    delta = dout;
  } else {
    for (std::size_t i = 0; i < dout.size(); ++i) {
      const double t = std::tanh(tape.pre.back()[i]);
      delta[i] = dout[i] * bound_ * (1.0 - t * t);
    }
  }
  Vec dinput;
  for (std::size_t l = depth; l-- > 0;) {
    const Layer& layer = layers_[l];
    const Vec& in = tape.inputs[l];
    Vec& gw = grads.w[l];
    Vec& gb = grads.b[l];
    for (int i = 0; i < layer.out; ++i) {
      const double d = delta[i];
      gb[i] += d;
      double* grow = gw.data() + static_cast<std::size_t>(i) * layer.in;
      for (int j = 0; j < layer.in; ++j) grow[j] += d * in[j];
    }
    dinput.assign(layer.in, 0.0);
    for (int i = 0; i < layer.out; ++i) {
      const double d = delta[i];
      const double* row = layer.w.data() + static_cast<std::size_t>(i) * layer.in;
      for (int j = 0; j < layer.in; ++j) dinput[j] += d * row[j];
    }
    if (l > 0) {
      delta.resize(layer.in);
      for (int j = 0; j < layer.in; ++j)
        delta[j] = tape.pre[l - 1][j] > 0.0 ? dinput[j] : 0.0;
    }
  }
  return dinput;
}

Mlp::Grads Mlp::make_grads() const {
  Grads g;
  g.w.resize(layers_.size());
  g.b.resize(layers_.size());
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    g.w[l].assign(layers_[l].w.size(), 0.0);
    g.b[l].assign(layers_[l].b.size(), 0.0);
  }
  return g;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const Layer& l : layers_) n += l.w.size() + l.b.size();
  return n;
}

void Mlp::apply_adam(const Grads& grads, Grads& m, Grads& v, double lr, long long t) {
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(t));
  const auto step = [&](Vec& param, const Vec& g, Vec& mm, Vec& vv) {
    for (std::size_t i = 0; i < param.size(); ++i) {
      mm[i] = kBeta1 * mm[i] + (1.0 - kBeta1) * g[i];
      vv[i] = kBeta2 * vv[i] + (1.0 - kBeta2) * g[i] * g[i];
      param[i] -= lr * (mm[i] / bc1) / (std::sqrt(vv[i] / bc2) + kEps);
    }
  };
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    step(layers_[l].w, grads.w[l], m.w[l], v.w[l]);
    step(layers_[l].b, grads.b[l], m.b[l], v.b[l]);
  }
}

void Mlp::soft_update_from(const Mlp& source, double tau) {
  // Convex-combination form so tau = 1 copies and tau = 0 is a no-op, both
  // bit-exact.
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Vec& w = layers_[l].w;
    const Vec& sw = source.layers_[l].w;
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = tau * sw[i] + (1.0 - tau) * w[i];
    Vec& b = layers_[l].b;
    const Vec& sb = source.layers_[l].b;
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = tau * sb[i] + (1.0 - tau) * b[i];
  }
}

nlohmann::json Mlp::to_json() const {
  nlohmann::json layers = nlohmann::json::array();
  for (const Layer& l : layers_) {
    layers.push_back({{"in", l.in}, {"out", l.out}, {"w", l.w}, {"b", l.b}});
  }
  return {{"output", output_ == Output::Identity ? "identity" : "tanh_scaled"},
          {"bound", bound_},
          {"layers", layers}};
}

Mlp Mlp::from_json(const nlohmann::json& j) {
  Mlp net;
  net.output_ = j.at("output") == "identity" ? Output::Identity : Output::TanhScaled;
  net.bound_ = j.at("bound").get<double>();
  for (const auto& jl : j.at("layers")) {
    Layer l;
    l.in = jl.at("in").get<int>();
    l.out = jl.at("out").get<int>();
    l.w = jl.at("w").get<Vec>();
    l.b = jl.at("b").get<Vec>();
    if (l.w.size() != static_cast<std::size_t>(l.in) * l.out ||
        l.b.size() != static_cast<std::size_t>(l.out))
      throw ConfigError("checkpoint layer shape mismatch");
    net.layers_.push_back(std::move(l));
  }
  return net;
}

double gradient_check(const Mlp& net, const std::vector<Vec>& inputs, const LossFn& loss,
                      double h) {
  Mlp work = net;
  Mlp::Grads analytic = work.make_grads();
  Mlp::Tape tape;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    work.forward(inputs[i], tape);
    work.backward(tape, loss.grad(tape.out, static_cast<int>(i)), analytic);
  }

  const auto total_loss = [&](const Mlp& m) {
    double acc = 0.0;
    for (std::size_t i = 0; i < inputs.size(); ++i)
      acc += loss.value(m.forward(inputs[i]), static_cast<int>(i));
    return acc;
  };

  double max_rel = 0.0;
  // Perturb every parameter in place; restore after each probe.
  Mlp probe = net;
  auto& layers = probe.mutable_layers();
  for (int l = 0; l < probe.layer_count(); ++l) {
    for (Vec* params : {&layers[l].w, &layers[l].b}) {
      const Vec& g = params == &layers[l].w ? analytic.w[l] : analytic.b[l];
      for (std::size_t i = 0; i < params->size(); ++i) {
        const double saved = (*params)[i];
        (*params)[i] = saved + h;
        const double up = total_loss(probe);
        (*params)[i] = saved - h;
        const double down = total_loss(probe);
        (*params)[i] = saved;
        const double numeric = (up - down) / (2.0 * h);
        const double rel =
            std::abs(g[i] - numeric) / std::max({1.0, std::abs(g[i]), std::abs(numeric)});
        max_rel = std::max(max_rel, rel);
      }
    }
  }
  return max_rel;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw DimensionError("ReplayBuffer: capacity must be positive");
  data_.reserve(std::min<std::size_t>(capacity, 4096));
}

void ReplayBuffer::push(Transition t) {
  if (data_.size() < capacity_) {
    data_.push_back(std::move(t));
  } else {
    data_[head_] = std::move(t);
    head_ = (head_ + 1) % capacity_;
  }
}

const Transition& ReplayBuffer::operator[](std::size_t logical) const {
  return data_[(head_ + logical) % data_.size()];
}

const Transition& ReplayBuffer::sample(Rng& rng) const {
  return data_[rng.uniform_index(data_.size())];
}

void to_json(nlohmann::json& j, const AgentConfig& c) {
  j = {{"hidden", c.hidden},
       {"actor_lr", c.actor_lr},
       {"critic_lr", c.critic_lr},
       {"discount", c.discount},
       {"tau", c.tau},
       {"noise_sigma_start", c.noise_sigma_start},
       {"noise_sigma_end", c.noise_sigma_end},
       {"noise_decay_steps", c.noise_decay_steps},
       {"batch_size", c.batch_size},
       {"buffer_capacity", c.buffer_capacity},
       {"warmup", c.warmup},
       {"action_bound", c.action_bound},
       {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, AgentConfig& c) {
  c = AgentConfig{};
  if (j.contains("hidden")) j.at("hidden").get_to(c.hidden);
  if (j.contains("actor_lr")) j.at("actor_lr").get_to(c.actor_lr);
  if (j.contains("critic_lr")) j.at("critic_lr").get_to(c.critic_lr);
  if (j.contains("discount")) j.at("discount").get_to(c.discount);
  if (j.contains("tau")) j.at("tau").get_to(c.tau);
  if (j.contains("noise_sigma_start")) j.at("noise_sigma_start").get_to(c.noise_sigma_start);
  if (j.contains("noise_sigma_end")) j.at("noise_sigma_end").get_to(c.noise_sigma_end);
  if (j.contains("noise_decay_steps")) j.at("noise_decay_steps").get_to(c.noise_decay_steps);
  if (j.contains("batch_size")) j.at("batch_size").get_to(c.batch_size);
  if (j.contains("buffer_capacity")) j.at("buffer_capacity").get_to(c.buffer_capacity);
  if (j.contains("warmup")) j.at("warmup").get_to(c.warmup);
  if (j.contains("action_bound")) j.at("action_bound").get_to(c.action_bound);
  if (j.contains("seed")) j.at("seed").get_to(c.seed);
}

namespace {

std::vector<int> net_sizes(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> sizes;
  sizes.push_back(in);
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return sizes;
}

void validate_agent_config(const AgentConfig& c) {
  if (!(c.discount > 0.0 && c.discount <= 1.0))
    throw ConfigError("agent.discount", "must lie in (0, 1]");
  if (!(c.tau > 0.0 && c.tau <= 1.0)) throw ConfigError("agent.tau", "must lie in (0, 1]");
  if (c.batch_size < 1) throw ConfigError("agent.batch_size", "must be >= 1");
  if (c.warmup < c.batch_size) throw ConfigError("agent.warmup", "must be >= batch_size");
  if (!(c.action_bound > 0.0)) throw ConfigError("agent.action_bound", "must be positive");
}

}  // namespace

DdpgAgent::DdpgAgent(int state_dim, int action_dim, const AgentConfig& cfg)
    : state_dim_(state_dim),
      action_dim_(action_dim),
      cfg_(cfg),
      rng_(cfg.seed),
      actor_(net_sizes(state_dim, cfg.hidden, action_dim), Mlp::Output::TanhScaled,
             cfg.action_bound, rng_, /*zero_final=*/true),
      critic_(net_sizes(state_dim + action_dim, cfg.hidden, 1), Mlp::Output::Identity, 1.0, rng_),
      actor_target_(actor_),
      critic_target_(critic_),
      buffer_(cfg.buffer_capacity) {
  validate_agent_config(cfg);
  actor_grads_ = actor_.make_grads();
  critic_grads_ = critic_.make_grads();
  scratch_grads_ = critic_.make_grads();
  actor_m_ = actor_.make_grads();
  actor_v_ = actor_.make_grads();
  critic_m_ = critic_.make_grads();
  critic_v_ = critic_.make_grads();
  sa_.resize(state_dim + action_dim);
}

Vec DdpgAgent::policy_action(const Vec& s) const { return actor_.forward(s); }

Vec DdpgAgent::act(const Vec& s, bool explore) {
  Vec a = actor_.forward(s);
  if (explore) {
    const double progress =
        cfg_.noise_decay_steps > 0
            ? std::min(1.0, static_cast<double>(env_steps_) / cfg_.noise_decay_steps)
            : 1.0;
    const double sigma =
        (cfg_.noise_sigma_start + (cfg_.noise_sigma_end - cfg_.noise_sigma_start) * progress) *
        cfg_.action_bound;
    for (double& x : a)
      x = std::clamp(x + sigma * rng_.gaussian(), -cfg_.action_bound, cfg_.action_bound);
  }
  return a;
}

DdpgAgent::UpdateDiag DdpgAgent::observe_and_update(const Transition& t) {
  if (static_cast<int>(t.s.size()) != state_dim_ ||
      static_cast<int>(t.s_next.size()) != state_dim_ ||
      static_cast<int>(t.a.size()) != action_dim_)
    throw DimensionError("observe_and_update: transition dimension mismatch");
  buffer_.push(t);
  ++env_steps_;
  UpdateDiag diag;
  if (buffer_.size() >= static_cast<std::size_t>(cfg_.warmup)) update_once(diag);
  return diag;
}

void DdpgAgent::update_once(UpdateDiag& diag) {
  const int batch = cfg_.batch_size;
  const double inv_batch = 1.0 / batch;

  // One critic regression pass against the frozen targets.
  critic_grads_.zero();
  double critic_loss = 0.0;
  std::vector<const Transition*> samples(batch);
  for (int i = 0; i < batch; ++i) samples[i] = &buffer_.sample(rng_);

  for (int i = 0; i < batch; ++i) {
    const Transition& tr = *samples[i];
    actor_target_.forward(tr.s_next, actor_tape_);
    std::copy(tr.s_next.begin(), tr.s_next.end(), sa_.begin());
    std::copy(actor_tape_.out.begin(), actor_tape_.out.end(), sa_.begin() + state_dim_);
    critic_target_.forward(sa_, target_tape_);
    const double y =
        tr.r + cfg_.discount * (tr.done ? 0.0 : 1.0) * target_tape_.out[0];

    std::copy(tr.s.begin(), tr.s.end(), sa_.begin());
    std::copy(tr.a.begin(), tr.a.end(), sa_.begin() + state_dim_);
    critic_.forward(sa_, critic_tape_);
    const double err = critic_tape_.out[0] - y;
    critic_loss += err * err * inv_batch;
    critic_.backward(critic_tape_, Vec{2.0 * err * inv_batch}, critic_grads_);
  }
  ++updates_;
  critic_.apply_adam(critic_grads_, critic_m_, critic_v_, cfg_.critic_lr, updates_);

  // One actor ascent pass on the updated critic.
  actor_grads_.zero();
  double actor_value = 0.0;
  for (int i = 0; i < batch; ++i) {
    const Transition& tr = *samples[i];
    actor_.forward(tr.s, actor_tape_);
    std::copy(tr.s.begin(), tr.s.end(), sa_.begin());
    std::copy(actor_tape_.out.begin(), actor_tape_.out.end(), sa_.begin() + state_dim_);
    critic_.forward(sa_, critic_tape_);
    actor_value += critic_tape_.out[0] * inv_batch;
    scratch_grads_.zero();
    const Vec dsa = critic_.backward(critic_tape_, Vec{1.0}, scratch_grads_);
    Vec dact(action_dim_);
    for (int k = 0; k < action_dim_; ++k) dact[k] = -dsa[state_dim_ + k] * inv_batch;
    actor_.backward(actor_tape_, dact, actor_grads_);
  }
  actor_.apply_adam(actor_grads_, actor_m_, actor_v_, cfg_.actor_lr, updates_);

  actor_target_.soft_update_from(actor_, cfg_.tau);
  critic_target_.soft_update_from(critic_, cfg_.tau);

  if (!std::isfinite(critic_loss) || !std::isfinite(actor_value))
    throw NumericBlowupError("DdpgAgent: non-finite training loss");

  diag.updated = true;
  diag.critic_loss = critic_loss;
  diag.actor_value = actor_value;
}

nlohmann::json DdpgAgent::checkpoint(const std::string& config_hash) const {
  nlohmann::json j;
  j["format_version"] = 1;
  j["config_hash"] = config_hash;
  j["state_dim"] = state_dim_;
  j["action_dim"] = action_dim_;
  j["agent_config"] = cfg_;
  j["env_steps"] = env_steps_;
  j["actor"] = actor_.to_json();
  j["critic"] = critic_.to_json();
  j["actor_target"] = actor_target_.to_json();
  j["critic_target"] = critic_target_.to_json();
  return j;
}

DdpgAgent DdpgAgent::restore(const nlohmann::json& j) {
  if (j.at("format_version").get<int>() != 1)
    throw ConfigError("checkpoint", "unsupported format_version");
  AgentConfig cfg = j.at("agent_config").get<AgentConfig>();
  DdpgAgent agent(j.at("state_dim").get<int>(), j.at("action_dim").get<int>(), cfg);
  agent.actor_ = Mlp::from_json(j.at("actor"));
  agent.critic_ = Mlp::from_json(j.at("critic"));
  agent.actor_target_ = Mlp::from_json(j.at("actor_target"));
  agent.critic_target_ = Mlp::from_json(j.at("critic_target"));
  agent.env_steps_ = j.value("env_steps", 0LL);
  return agent;
}

}  // namespace wcsafe
